//! Graded pieces a_i/a_{i+1} as κ_F-vector spaces, the residual algebra R
//! of a stratum of shape r = q − 1, and the multiplication maps m_{n,q,b}.

use serde_json::{json, Value};

use crate::arith::fmat::{self, FMat};
use crate::arith::scalar::Scalar;
use crate::arith::{FfElem, Field, FiniteField, Mat};
use crate::error::{Error, Result};
use crate::lattices::LatticeSeq;
use crate::strata::{stratum_invariants, Stratum};

/// a_i/a_{i+1} in split coordinates: one κ_F-coordinate per matrix position
/// whose bound grows between levels i and i + 1.
#[derive(Clone, Debug)]
pub struct Graded {
    field: Field,
    n: usize,
    pub level: i64,
    pub pos: Vec<(usize, usize, i64)>,
}

impl Graded {
    pub fn new(lat: &LatticeSeq, i: i64) -> Graded {
        let n = lat.dim();
        let mut pos = vec![];
        for k in 0..n {
            for j in 0..n {
                let c = lat.entry_bound(i, k, j);
                if lat.entry_bound(i + 1, k, j) > c {
                    pos.push((k, j, c));
                }
            }
        }
        Graded { field: lat.field().clone(), n, level: i, pos }
    }

    pub fn dim(&self) -> usize {
        self.pos.len()
    }

    pub fn residue_field(&self) -> FiniteField {
        self.field.residue_field()
    }

    /// Coordinates of y ∈ a_i (split coordinates) modulo a_{i+1}.
    pub fn coords(&self, y: &FMat) -> Result<Vec<FfElem>> {
        self.pos.iter().map(|&(k, j, c)| y.get(k, j).mul(&self.field.pi_pow(-c)).residue()).collect()
    }

    pub fn lift(&self, c: &[FfElem]) -> FMat {
        let mut m = fmat::zeros(&self.field, self.n, self.n);
        for (&(k, j, e), x) in self.pos.iter().zip(c) {
            m.set(k, j, self.field.lift(x).mul(&self.field.pi_pow(e)));
        }
        m
    }

    pub fn unit(&self, idx: usize) -> FMat {
        let (k, j, e) = self.pos[idx];
        let mut m = fmat::zeros(&self.field, self.n, self.n);
        m.set(k, j, self.field.pi_pow(e));
        m
    }
}

/// The κ_F-matrix of the map gr(src) → gr(dst) induced by an F-linear map
/// on split coordinates.
pub fn graded_map(src: &Graded, dst: &Graded, f: impl Fn(&FMat) -> FMat) -> Result<Mat<FfElem>> {
    let z = src.residue_field().zero();
    let mut cols = vec![];
    for i in 0..src.dim() {
        cols.push(dst.coords(&f(&src.unit(i)))?);
    }
    if cols.is_empty() {
        return Ok(Mat::zeros(dst.dim(), 0, &z));
    }
    Ok(Mat::from_cols(&cols, &z))
}

pub fn ff_rank(m: &Mat<FfElem>) -> usize {
    if m.rows == 0 || m.cols == 0 {
        return 0;
    }
    m.rank().expect("exact rank")
}

/// R = {x̄ ∈ a_0/a_1 : xβ ≡ βx mod a_{1−q}} with its structure constants.
#[derive(Clone, Debug)]
pub struct RAlgebra {
    pub gr0: Graded,
    /// Lifts (split coordinates) of a κ_F-basis.
    pub basis: Vec<FMat>,
    coords: Mat<FfElem>,
    table: Vec<Vec<Vec<FfElem>>>,
    k: FiniteField,
}

impl RAlgebra {
    pub fn new(lat: &LatticeSeq, beta_split: &FMat, q: i64) -> Result<RAlgebra> {
        let gr0 = Graded::new(lat, 0);
        let grq = Graded::new(lat, -q);
        let k = gr0.residue_field();
        let z = k.zero();
        let m = graded_map(&gr0, &grq, |x| x.mul(beta_split).sub(&beta_split.mul(x)))?;
        let ker = if m.rows == 0 { Mat::identity(gr0.dim(), &z) } else { m.kernel()? };
        let basis: Vec<FMat> = (0..ker.cols).map(|c| gr0.lift(&ker.col(c))).collect();
        let mut alg = RAlgebra { gr0, basis, coords: ker, table: vec![], k };
        let d = alg.dim();
        let mut table = vec![vec![vec![]; d]; d];
        for i in 0..d {
            for j in 0..d {
                let p = alg.basis[i].mul(&alg.basis[j]);
                table[i][j] = alg.express(&p)?;
            }
        }
        alg.table = table;
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// R-coordinates of an element of R given in split coordinates.
    pub fn express(&self, x: &FMat) -> Result<Vec<FfElem>> {
        let c = self.gr0.coords(x)?;
        if self.dim() == 0 {
            return Ok(vec![]);
        }
        self.coords.solve(&c)?.ok_or_else(|| Error::PrecisionExhausted("product left the residual algebra".into()))
    }

    pub fn mul(&self, a: &[FfElem], b: &[FfElem]) -> Vec<FfElem> {
        let d = self.dim();
        let mut out = vec![self.k.zero(); d];
        for i in 0..d {
            if a[i].is_zero_ff() {
                continue;
            }
            for j in 0..d {
                if b[j].is_zero_ff() {
                    continue;
                }
                let s = a[i].mul(&b[j]);
                for (o, t) in out.iter_mut().zip(&self.table[i][j]) {
                    *o = o.add(&s.mul(t));
                }
            }
        }
        out
    }

    fn unit_vec(&self, i: usize) -> Vec<FfElem> {
        let mut v = vec![self.k.zero(); self.dim()];
        v[i] = self.k.one();
        v
    }

    /// Matrix of left multiplication by a on R.
    fn left_matrix(&self, a: &[FfElem]) -> Mat<FfElem> {
        let cols: Vec<Vec<FfElem>> = (0..self.dim()).map(|j| self.mul(a, &self.unit_vec(j))).collect();
        Mat::from_cols(&cols, &self.k.zero())
    }

    /// Common radical of the trace forms tr(L_{xy}) and tr(xy | Λ_0/πΛ_0):
    /// contains the Jacobson radical.
    pub fn trace_radical(&self) -> Result<Mat<FfElem>> {
        let d = self.dim();
        let z = self.k.zero();
        if d == 0 {
            return Ok(Mat::zeros(0, 0, &z));
        }
        let mut t = Mat::zeros(2 * d, d, &z);
        for i in 0..d {
            for j in 0..d {
                let p = self.mul(&self.unit_vec(i), &self.unit_vec(j));
                t.set(i, j, self.left_matrix(&p).trace());
                let nat = self.basis[i].mul(&self.basis[j]).trace().residue()?;
                t.set(d + i, j, nat);
            }
        }
        t.kernel()
    }

    fn span_rank(&self, vs: &[Vec<FfElem>]) -> (usize, Vec<Vec<FfElem>>) {
        if vs.is_empty() {
            return (0, vec![]);
        }
        let m = Mat::from_rows(vs.to_vec(), &self.k.zero());
        let (r, piv, _) = m.rref().expect("exact rref");
        let rows: Vec<Vec<FfElem>> = (0..piv.len()).map(|i| r.row(i)).collect();
        (piv.len(), rows)
    }

    /// Is the left ideal R x + κ x nilpotent?
    pub fn left_ideal_nilpotent(&self, x: &[FfElem]) -> bool {
        let d = self.dim();
        let mut gens = vec![x.to_vec()];
        for i in 0..d {
            gens.push(self.mul(&self.unit_vec(i), x));
        }
        let (_, ideal) = self.span_rank(&gens);
        let mut pow = ideal.clone();
        for _ in 0..=d {
            if pow.is_empty() {
                return true;
            }
            let mut next = vec![];
            for a in &pow {
                for b in &ideal {
                    next.push(self.mul(a, b));
                }
            }
            let (rk, rows) = self.span_rank(&next);
            pow = if rk == 0 { vec![] } else { rows };
        }
        pow.is_empty()
    }

    /// Decide semisimplicity.  Returns a nonzero radical element when R is
    /// not semisimple.
    pub fn radical_witness(&self, budget: u64) -> Result<Option<Vec<FfElem>>> {
        let t = self.trace_radical()?;
        let m = t.cols;
        if m == 0 {
            return Ok(None);
        }
        let q = self.k.size();
        let total = (q as f64).powi(m as i32);
        if total > budget as f64 {
            return Err(Error::Undecided(format!("radical search over {m}-dimensional trace radical exceeds budget")));
        }
        let elems: Vec<FfElem> = self.k.elements().collect();
        let mut idx = vec![0usize; m];
        // first nonzero coordinate normalized to 1
        loop {
            let mut carry = true;
            for c in idx.iter_mut() {
                if carry {
                    *c += 1;
                    if *c == elems.len() {
                        *c = 0;
                    } else {
                        carry = false;
                    }
                }
            }
            if carry {
                break;
            }
            let lead = idx.iter().rposition(|&c| c != 0).unwrap();
            if !elems[idx[lead]].is_one() {
                continue;
            }
            let coeffs: Vec<FfElem> = idx.iter().map(|&c| elems[c].clone()).collect();
            let x = t.mul_vec(&coeffs);
            if self.left_ideal_nilpotent(&x) {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Simple,
    Semisimple,
    Neither,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Simple => "equivalent-to-simple",
            Verdict::Semisimple => "equivalent-to-semisimple",
            Verdict::Neither => "neither",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FundamentalAnalysis {
    pub fundamental: bool,
    pub r_dim: usize,
    pub r_basis: Vec<FMat>,
    pub r_semisimple: bool,
    pub radical_witness: Option<FMat>,
    pub m_maps_ok: bool,
    pub first_bad_n: Option<i64>,
    pub verdict: Verdict,
}

impl FundamentalAnalysis {
    pub fn to_json(&self) -> Value {
        json!({
            "fundamental": self.fundamental,
            "R_dim": self.r_dim,
            "R_basis": self.r_basis.iter().map(fmat::to_json).collect::<Vec<_>>(),
            "R_semisimple": self.r_semisimple,
            "radical_witness": self.radical_witness.as_ref().map(fmat::to_json),
            "m_maps_ok": self.m_maps_ok,
            "first_bad_n": self.first_bad_n,
            "verdict": self.verdict.as_str(),
        })
    }
}

/// Left multiplication by b: a_{−nq}/a_{1−nq} → a_{−(n+1)q}/a_{1−(n+1)q}.
pub fn m_map(lat: &LatticeSeq, b: &FMat, n: i64, q: i64) -> Result<Mat<FfElem>> {
    let src = Graded::new(lat, -n * q);
    let dst = Graded::new(lat, -(n + 1) * q);
    graded_map(&src, &dst, |x| b.mul(x))
}

/// ker m_{n+1} ∩ im m_n = 0 for n = 0 .. e·N; returns the first failure.
pub fn m_maps_condition(lat: &LatticeSeq, b: &FMat, q: i64) -> Result<Option<i64>> {
    let bound = lat.period() * lat.dim() as i64;
    let mut cur = m_map(lat, b, 0, q)?;
    for n in 0..=bound {
        let next = m_map(lat, b, n + 1, q)?;
        let rk = ff_rank(&cur);
        let comp = if cur.cols == 0 { 0 } else { ff_rank(&next.mul(&cur)) };
        if comp != rk {
            return Ok(Some(n));
        }
        cur = next;
    }
    Ok(None)
}

pub const RADICAL_BUDGET: u64 = 600_000;

pub fn analyze_fundamental(d: &Stratum) -> Result<FundamentalAnalysis> {
    if d.r != d.q - 1 && !(d.is_zero() && d.q == d.r) {
        return Err(Error::WrongShape);
    }
    let f = d.field();
    if d.is_zero() {
        let gr0 = Graded::new(&d.lat, 0);
        let dim = gr0.dim();
        return Ok(FundamentalAnalysis {
            fundamental: false,
            r_dim: dim,
            r_basis: (0..dim).map(|i| d.lat.from_split(&gr0.unit(i))).collect(),
            r_semisimple: true,
            radical_witness: None,
            m_maps_ok: true,
            first_bad_n: None,
            verdict: Verdict::Semisimple,
        });
    }
    let inv = stratum_invariants(d)?;
    let fundamental = !inv.is_power_of_x();
    let bs = d.beta_split();
    let alg = RAlgebra::new(&d.lat, &bs, d.q)?;
    let wit = alg.radical_witness(RADICAL_BUDGET)?;
    let r_semisimple = wit.is_none();
    let radical_witness = wit.map(|x| {
        let s = alg.basis.iter().zip(&x).fold(fmat::zeros(f, d.dim(), d.dim()), |acc, (b, c)| acc.add(&b.scale(&f.lift(c))));
        d.lat.from_split(&s)
    });
    let bad = m_maps_condition(&d.lat, &bs, d.q)?;
    let m_ok = bad.is_none();
    let verdict = if !fundamental || !r_semisimple || !m_ok {
        Verdict::Neither
    } else if inv.is_primary() {
        Verdict::Simple
    } else {
        Verdict::Semisimple
    };
    Ok(FundamentalAnalysis {
        fundamental,
        r_dim: alg.dim(),
        r_basis: alg.basis.iter().map(|b| d.lat.from_split(b)).collect(),
        r_semisimple,
        radical_witness,
        m_maps_ok: m_ok,
        first_bad_n: bad,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strata::fixtures::*;

    fn std2(f: &Field) -> LatticeSeq {
        LatticeSeq::standard(f, vec![0, 0], 1).unwrap()
    }

    #[test]
    fn gl_example_is_semisimple() {
        let (s, _) = gl_pair();
        let a = analyze_fundamental(&s).unwrap();
        assert!(a.fundamental && a.r_semisimple && a.m_maps_ok);
        assert_eq!(a.verdict, Verdict::Semisimple);
    }

    #[test]
    fn unipotent_is_neither() {
        let f = q3();
        let b = fmat::from_ints(&f, &[&[1, 1], &[0, 1]]).scale(&f.pi_pow(-1));
        let s = Stratum::new(std2(&f), 1, 0, b, None).unwrap();
        let a = analyze_fundamental(&s).unwrap();
        assert!(a.fundamental);
        assert_eq!(a.r_dim, 2);
        assert!(!a.r_semisimple);
        assert_eq!(a.verdict, Verdict::Neither);
    }

    #[test]
    fn unramified_companion_is_simple() {
        let f = q3();
        let b = fmat::from_ints(&f, &[&[0, 5], &[1, 0]]).scale(&f.pi_pow(-1));
        let s = Stratum::new(std2(&f), 1, 0, b, None).unwrap();
        let a = analyze_fundamental(&s).unwrap();
        assert_eq!(a.r_dim, 2);
        assert_eq!(a.verdict, Verdict::Simple);
    }

    #[test]
    fn two_eigenvalues_semisimple() {
        let f = q3();
        let b = fmat::from_ints(&f, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1]]).scale(&f.pi_pow(-1));
        let lat = LatticeSeq::standard(&f, vec![0, 0, 0], 1).unwrap();
        let s = Stratum::new(lat, 1, 0, b, None).unwrap();
        assert_eq!(analyze_fundamental(&s).unwrap().verdict, Verdict::Semisimple);
    }
}
