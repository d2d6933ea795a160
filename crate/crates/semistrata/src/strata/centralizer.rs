//! Centralizers B = ker a_β, the lattices n_l, m_l, b_l, the critical
//! exponent k₀ and tame corestrictions.

use serde_json::{json, Value};

use crate::arith::fmat::{self, FMat};
use crate::arith::{Elem, Field, Mat};
use crate::error::{Error, Result};
use crate::forms::HermForm;
use crate::lattices::{LatticeSeq, MatrixLattice};
use crate::strata::Stratum;

/// a_β(x) = βx − xβ.
pub fn a_beta(beta: &FMat, x: &FMat) -> FMat {
    beta.mul(x).sub(&x.mul(beta))
}

fn a_beta_matrix(beta: &FMat) -> FMat {
    let f = beta.get(0, 0).field().clone();
    let n = beta.rows;
    let cols: Vec<Vec<Elem>> = (0..n * n)
        .map(|c| {
            let u = fmat::unit(&f, n, c / n, c % n);
            fmat::flatten(&a_beta(beta, &u))
        })
        .collect();
    Mat::from_cols(&cols, &f.zero())
}

/// An F-basis of the centralizer of β.
pub fn centralizer_of(beta: &FMat) -> Result<Vec<FMat>> {
    let f = beta.get(0, 0).field().clone();
    let n = beta.rows;
    let k = a_beta_matrix(beta).kernel()?;
    Ok((0..k.cols).map(|c| fmat::unflatten(&f, n, &k.col(c))).collect())
}

fn flat_rows(ms: &[FMat]) -> Vec<Vec<Elem>> {
    ms.iter().map(fmat::flatten).collect()
}

#[derive(Clone, Debug)]
pub struct CentralizerData {
    pub lat: LatticeSeq,
    pub beta: FMat,
    pub q: i64,
    pub basis: Vec<FMat>,
    pub scalar: bool,
    pub k0: i64,
}

impl CentralizerData {
    pub fn field(&self) -> &Field {
        self.lat.field()
    }
    pub fn dim(&self) -> usize {
        self.beta.rows
    }

    /// b_l = B ∩ a_l.
    pub fn b(&self, l: i64) -> Result<MatrixLattice> {
        self.lat.filtration(l).meet_subspace(&flat_rows(&self.basis))
    }

    /// n_l = a_β⁻¹(a_l) ∩ a_0.
    pub fn n(&self, l: i64) -> Result<MatrixLattice> {
        n_lattice(&self.lat, &self.beta, l)
    }

    /// m_l = n_{l+k₀} ∩ a_l.
    pub fn m(&self, l: i64) -> Result<MatrixLattice> {
        self.n(l + self.k0)?.intersect(&self.lat.filtration(l))
    }

    /// [Λ, q, s, β] is simple exactly when s < −k₀.
    pub fn is_simple_at(&self, s: i64) -> bool {
        s < -self.k0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dim_B": self.basis.len(),
            "scalar": self.scalar,
            "k0": self.k0,
            "q": self.q,
        })
    }
}

pub fn n_lattice(lat: &LatticeSeq, beta: &FMat, l: i64) -> Result<MatrixLattice> {
    let f = lat.field().clone();
    let n = lat.dim();
    lat.filtration(0).preimage(&lat.filtration(l), |v| fmat::flatten(&a_beta(beta, &fmat::unflatten(&f, n, v))))
}

/// k₀(β, Λ) = max{−q, max{l : n_l ⊄ b_0 + a_1}}; −q for β ∈ F.
pub fn critical_exponent(beta: &FMat, lat: &LatticeSeq) -> Result<CentralizerData> {
    let n = lat.dim();
    let q = match lat.nu(beta) {
        None => 0,
        Some(v) => -v,
    };
    let basis = centralizer_of(beta)?;
    let scalar = basis.len() == n * n;
    let mut data = CentralizerData { lat: lat.clone(), beta: beta.clone(), q, basis, scalar, k0: -q };
    if scalar {
        return Ok(data);
    }
    let target = data.b(0)?.sum(&lat.filtration(1))?;
    let limit = -q + 4 * lat.period() * (n as i64 + 1);
    for l in -q..=limit {
        if target.contains_lattice(&data.n(l)?) {
            data.k0 = (l - 1).max(-q);
            return Ok(data);
        }
    }
    Err(Error::PrecisionExhausted("k0 search did not terminate".into()))
}

/// k₀ of β^{⊕e} on Λ† = Λ ⊕ (Λ − 1) ⊕ ⋯ ⊕ (Λ − (e − 1)).
pub fn dagger_k0(beta: &FMat, lat: &LatticeSeq) -> Result<i64> {
    let f = lat.field();
    let n = lat.dim();
    let e = lat.period() as usize;
    let mut big = fmat::zeros(f, n * e, n * e);
    for b in 0..e {
        for i in 0..n {
            for j in 0..n {
                big.set(b * n + i, b * n + j, beta.get(i, j).clone());
            }
        }
    }
    Ok(critical_exponent(&big, &lat.dagger())?.k0)
}

/// Off-diagonal blocks of n_{−s} lie in a_{−(k₀+s)}, and
/// n_{−s} = b_0 + n_{−s} ∩ a_{−(k₀+s)}.
pub fn descr_checks(c: &CentralizerData, idems: &[FMat], s: i64) -> Result<(bool, bool)> {
    let f = c.field().clone();
    let n = c.dim();
    let ns = c.n(-s)?;
    let lvl = c.lat.filtration(-(c.k0 + s));
    let mut off_ok = true;
    for g in ns.rows() {
        let x = fmat::unflatten(&f, n, g);
        for (i, ei) in idems.iter().enumerate() {
            for (j, ej) in idems.iter().enumerate() {
                if i != j && !lvl.contains_matrix(&ei.mul(&x).mul(ej)) {
                    off_ok = false;
                }
            }
        }
    }
    let rhs = c.b(0)?.sum(&ns.intersect(&lvl)?)?;
    Ok((off_ok, rhs.same(&ns)))
}

/// A B-B-bimodule projection A → B along im a_γ.
#[derive(Clone, Debug)]
pub struct TameCorestriction {
    pub gamma: FMat,
    pub b_basis: Vec<FMat>,
    /// Matrix on flattened coordinates.
    pub proj: FMat,
    pub equivariant: bool,
}

impl TameCorestriction {
    pub fn apply(&self, x: &FMat) -> FMat {
        let f = x.get(0, 0).field().clone();
        fmat::unflatten(&f, x.rows, &self.proj.mul_vec(&fmat::flatten(x)))
    }

    /// s(a_j) = a_j ∩ B on the given lattice for j in one period.
    pub fn defining_property(&self, lat: &LatticeSeq) -> Result<bool> {
        let n = self.gamma.rows;
        for j in 0..lat.period() {
            let a = lat.filtration(j);
            let img = a.image(n * n, |v| self.proj.mul_vec(v))?;
            let bj = a.meet_subspace(&flat_rows(&self.b_basis))?;
            if !img.same(&bj) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// ker s = im a_γ: ranks add up and a_γ(A) is annihilated.
    pub fn exactness(&self) -> Result<bool> {
        let n = self.gamma.rows;
        let ag = a_beta_matrix(&self.gamma);
        let comp = self.proj.mul(&ag);
        let rk_img = ag.rank()?;
        let rk_s = self.proj.rank()?;
        Ok(comp.is_zero() && rk_img + rk_s == n * n && rk_s == self.b_basis.len())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "gamma": fmat::to_json(&self.gamma),
            "dim_B": self.b_basis.len(),
            "unit": "1",
            "equivariant": self.equivariant,
        })
    }
}

pub fn tame_corestriction(gamma: &FMat, lats: &[LatticeSeq], herm: Option<&HermForm>) -> Result<TameCorestriction> {
    let f = gamma.get(0, 0).field().clone();
    let n = gamma.rows;
    let b_basis = centralizer_of(gamma)?;
    let d = b_basis.len();
    let ag = a_beta_matrix(gamma);
    let (_, piv, _) = ag.rref()?;
    let mut cols: Vec<Vec<Elem>> = flat_rows(&b_basis);
    for &c in &piv {
        cols.push(ag.col(c));
    }
    if cols.len() != n * n {
        return Err(Error::WildOrInseparable);
    }
    let c = Mat::from_cols(&cols, &f.zero());
    if c.det()?.is_zero() {
        return Err(Error::WildOrInseparable);
    }
    let mut sel = fmat::zeros(&f, n * n, n * n);
    for i in 0..d {
        sel.set(i, i, f.one());
    }
    let mut proj = c.mul(&sel).mul(&c.inverse()?);
    let equivariant = herm.is_some();
    if let Some(h) = herm {
        let sig = |x: &FMat| h.adjoint(x);
        let half = f.rational(1, 2)?;
        let mut tw_cols = vec![];
        for k in 0..n * n {
            let u = fmat::unit(&f, n, k / n, k % n);
            let su = sig(&u)?;
            let ps = fmat::unflatten(&f, n, &proj.mul_vec(&fmat::flatten(&su)));
            tw_cols.push(fmat::flatten(&sig(&ps)?));
        }
        let tw = Mat::from_cols(&tw_cols, &f.zero());
        proj = proj.add(&tw).scale(&half);
    }
    let s = TameCorestriction { gamma: gamma.clone(), b_basis, proj, equivariant };
    for lat in lats {
        if !s.defining_property(lat)? {
            return Err(Error::NormalizationFailed("s(a_j) differs from b_j".into()));
        }
    }
    Ok(s)
}

/// [Λ, r + 1, r, s_γ(β − γ)] for [Λ, q, r + 1, γ] equivalent to
/// [Λ, q, r + 1, β].
#[derive(Clone, Debug)]
pub struct DerivedStratum {
    pub lat: LatticeSeq,
    pub q: i64,
    pub r: i64,
    pub element: FMat,
    pub in_centralizer: bool,
}

impl DerivedStratum {
    pub fn to_json(&self) -> Value {
        json!({
            "lattice": self.lat.to_json(),
            "q": self.q,
            "r": self.r,
            "element": fmat::to_json(&self.element),
            "in_centralizer": self.in_centralizer,
        })
    }
}

pub fn derived_stratum(d: &Stratum, gamma: &FMat, s: &TameCorestriction) -> Result<DerivedStratum> {
    let c = d.beta.sub(gamma);
    if !d.lat.contains_in_filtration(&c, -(d.r + 1)) {
        return Err(Error::NotEquivalentAtLevel);
    }
    let sc = s.apply(&c);
    let in_b = a_beta(gamma, &sc).is_zero() && d.lat.contains_in_filtration(&sc, -(d.r + 1));
    Ok(DerivedStratum { lat: d.lat.clone(), q: d.r + 1, r: d.r, element: sc, in_centralizer: in_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strata::fixtures::*;
    use crate::strata::split::split_stratum;

    fn companion(f: &Field) -> FMat {
        fmat::from_ints(f, &[&[0, 5], &[1, 0]])
    }

    #[test]
    fn centralizers() {
        let f = q3();
        assert_eq!(centralizer_of(&fmat::identity(&f, 3).scale(&f.int(7))).unwrap().len(), 9);
        let b = centralizer_of(&companion(&f)).unwrap();
        assert_eq!(b.len(), 2);
        let (s, _) = gl_pair();
        let b = centralizer_of(&s.beta).unwrap();
        assert_eq!(b.len(), 8);
        for x in &b {
            for (i, j) in [(0, 2), (0, 3), (1, 2), (3, 1)] {
                assert!(x.get(i, j).is_zero());
            }
        }
    }

    #[test]
    fn k0_examples() {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let sc = critical_exponent(&fmat::identity(&f, 2).scale(&f.pi_pow(-2)), &lat).unwrap();
        assert!(sc.scalar);
        assert_eq!(sc.k0, -2);
        let c = critical_exponent(&companion(&f).scale(&f.pi_pow(-1)), &lat).unwrap();
        assert_eq!(c.k0, -1);
        assert!(c.is_simple_at(0));
        let lat2 = LatticeSeq::standard(&f, vec![0, 0], 2).unwrap();
        let b = companion(&f).scale(&f.pi_pow(-1));
        let k = critical_exponent(&b, &lat2).unwrap().k0;
        assert_eq!(dagger_k0(&b, &lat2).unwrap(), k);
    }

    #[test]
    fn descr_on_gl_example() {
        let (s, _) = gl_pair();
        let c = critical_exponent(&s.beta, &s.lat).unwrap();
        assert_eq!(c.k0, -2);
        let sp = split_stratum(&s).unwrap();
        for sh in -3..=3 {
            let (i, ii) = descr_checks(&c, &sp.idempotents, sh).unwrap();
            assert!(i && ii, "s = {sh}");
        }
    }

    #[test]
    fn tame_corestriction_companion() {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let g = companion(&f);
        let s = tame_corestriction(&g, &[lat.clone()], None).unwrap();
        assert!(s.exactness().unwrap());
        assert!(s.defining_property(&lat).unwrap());
        let one = fmat::identity(&f, 2);
        assert!(s.apply(&one).eq_approx(&one));
        let id = tame_corestriction(&one.scale(&f.int(2)), &[lat], None).unwrap();
        let x = fmat::from_ints(&f, &[&[1, 2], &[3, 4]]);
        assert!(id.apply(&x).eq_approx(&x));
    }

    #[test]
    fn derived_strata() {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let g = companion(&f).scale(&f.pi_pow(-2));
        let s = tame_corestriction(&g, &[lat.clone()], None).unwrap();
        let d = Stratum::new(lat.clone(), 2, 1, g.clone(), None).unwrap();
        let z = derived_stratum(&d, &g, &s).unwrap();
        assert!(z.element.is_zero());
        let c = companion(&f).add(&fmat::identity(&f, 2)).scale(&f.pi_pow(-1));
        let d = Stratum::new(lat.clone(), 2, 0, g.add(&c), None).unwrap();
        let z = derived_stratum(&d, &g, &s).unwrap();
        assert!(z.element.eq_approx(&c) && z.in_centralizer);
        let off = fmat::from_ints(&f, &[&[1, 0], &[0, 0]]).scale(&f.pi_pow(-1));
        let d = Stratum::new(lat, 2, 0, g.add(&off), None).unwrap();
        let z = derived_stratum(&d, &g, &s).unwrap();
        assert!(z.in_centralizer);
        assert!(a_beta(&g, &off.sub(&z.element)).rank().unwrap() > 0 || off.sub(&z.element).is_zero());
    }
}
