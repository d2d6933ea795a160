//! Lattice sequences through splitting bases, and o_F-lattices in F^N in
//! Hermite normal form.

use serde_json::{json, Value};

use crate::arith::fmat::{self, FMat};
use crate::arith::{Elem, Field, Mat};
use crate::error::{Error, Result};

pub fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// An o_F-lattice in F^N given by an echelon basis: each row starts with a
/// pivot π^k, entries above a pivot are reduced modulo π^k.
#[derive(Clone, Debug)]
pub struct MatrixLattice {
    field: Field,
    dim: usize,
    rows: Vec<Vec<Elem>>,
    pivots: Vec<(usize, i64)>,
}

impl MatrixLattice {
    pub fn zero(field: &Field, dim: usize) -> MatrixLattice {
        MatrixLattice { field: field.clone(), dim, rows: vec![], pivots: vec![] }
    }

    /// o_F^N scaled by π^k.
    pub fn standard(field: &Field, dim: usize, k: i64) -> MatrixLattice {
        let gens = (0..dim)
            .map(|i| {
                let mut v = vec![field.zero(); dim];
                v[i] = field.pi_pow(k);
                v
            })
            .collect();
        MatrixLattice::from_generators(field, dim, gens).expect("standard lattice")
    }

    pub fn from_generators(field: &Field, dim: usize, gens: Vec<Vec<Elem>>) -> Result<MatrixLattice> {
        let (rows, pivots) = echelon(field, dim, gens)?;
        Ok(MatrixLattice { field: field.clone(), dim, rows, pivots })
    }

    pub fn from_matrices(field: &Field, n: usize, gens: &[FMat]) -> Result<MatrixLattice> {
        MatrixLattice::from_generators(field, n * n, gens.iter().map(fmat::flatten).collect())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
    pub fn rows(&self) -> &[Vec<Elem>] {
        &self.rows
    }
    pub fn pivots(&self) -> &[(usize, i64)] {
        &self.pivots
    }
    pub fn is_full_rank(&self) -> bool {
        self.rows.len() == self.dim
    }

    /// Generators as n×n matrices (for lattices in a matrix algebra).
    pub fn matrices(&self, n: usize) -> Vec<FMat> {
        self.rows.iter().map(|r| fmat::unflatten(&self.field, n, r)).collect()
    }

    pub fn contains(&self, v: &[Elem]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut v = v.to_vec();
        for (row, &(c, k)) in self.rows.iter().zip(&self.pivots) {
            let x = &v[c];
            if x.is_zero() {
                continue;
            }
            if x.valuation().unwrap() < k {
                return false;
            }
            let q = x.mul(&self.field.pi_pow(-k));
            for (t, r) in v.iter_mut().zip(row).skip(c) {
                *t = t.sub(&q.mul(r));
            }
        }
        v.iter().all(|x| x.is_zero())
    }

    pub fn contains_matrix(&self, m: &FMat) -> bool {
        self.contains(&fmat::flatten(m))
    }

    pub fn contains_lattice(&self, o: &MatrixLattice) -> bool {
        o.rows.iter().all(|r| self.contains(r))
    }

    pub fn same(&self, o: &MatrixLattice) -> bool {
        self.rank() == o.rank() && self.contains_lattice(o) && o.contains_lattice(self)
    }

    pub fn sum(&self, o: &MatrixLattice) -> Result<MatrixLattice> {
        let mut g = self.rows.clone();
        g.extend(o.rows.iter().cloned());
        MatrixLattice::from_generators(&self.field, self.dim, g)
    }

    pub fn scale(&self, x: &Elem) -> Result<MatrixLattice> {
        let g = self.rows.iter().map(|r| r.iter().map(|a| a.mul(x)).collect()).collect();
        MatrixLattice::from_generators(&self.field, self.dim, g)
    }

    /// Image under an F-linear map.
    pub fn image(&self, out_dim: usize, f: impl Fn(&[Elem]) -> Vec<Elem>) -> Result<MatrixLattice> {
        let g = self.rows.iter().map(|r| f(r)).collect();
        MatrixLattice::from_generators(&self.field, out_dim, g)
    }

    /// L ∩ M by echelonizing [L | L ; M | 0].
    pub fn intersect(&self, o: &MatrixLattice) -> Result<MatrixLattice> {
        let z = self.field.zero();
        let mut g = vec![];
        for r in &self.rows {
            let mut w = r.clone();
            w.extend(r.iter().cloned());
            g.push(w);
        }
        for r in &o.rows {
            let mut w = r.clone();
            w.extend(std::iter::repeat(z.clone()).take(self.dim));
            g.push(w);
        }
        let (rows, piv) = echelon(&self.field, 2 * self.dim, g)?;
        let out = rows.into_iter().zip(piv).filter(|(_, (c, _))| *c >= self.dim).map(|(r, _)| r[self.dim..].to_vec()).collect();
        MatrixLattice::from_generators(&self.field, self.dim, out)
    }

    /// {x ∈ self : f(x) ∈ target}.
    pub fn preimage(&self, target: &MatrixLattice, f: impl Fn(&[Elem]) -> Vec<Elem>) -> Result<MatrixLattice> {
        let z = self.field.zero();
        let m = self.rows.len();
        let od = target.dim;
        let mut g = vec![];
        for (i, r) in self.rows.iter().enumerate() {
            let mut w = f(r);
            assert_eq!(w.len(), od);
            let mut e = vec![z.clone(); m];
            e[i] = self.field.one();
            w.extend(e);
            g.push(w);
        }
        for r in &target.rows {
            let mut w = r.clone();
            w.extend(std::iter::repeat(z.clone()).take(m));
            g.push(w);
        }
        let (rows, piv) = echelon(&self.field, od + m, g)?;
        let mut out = vec![];
        for (r, (c, _)) in rows.into_iter().zip(piv) {
            if c < od {
                continue;
            }
            let mut v = vec![z.clone(); self.dim];
            for (ci, x) in r[od..].iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (t, y) in v.iter_mut().zip(&self.rows[ci]) {
                    *t = t.add(&x.mul(y));
                }
            }
            out.push(v);
        }
        MatrixLattice::from_generators(&self.field, self.dim, out)
    }

    /// W ∩ self for a subspace W given by F-linearly independent rows, self
    /// of full rank.
    pub fn meet_subspace(&self, w: &[Vec<Elem>]) -> Result<MatrixLattice> {
        if w.is_empty() {
            return Ok(MatrixLattice::zero(&self.field, self.dim));
        }
        if !self.is_full_rank() {
            return Err(Error::HypothesisFailed("subspace meet needs a full-rank lattice".into()));
        }
        let z = self.field.zero();
        let lm = Mat::from_rows(self.rows.clone(), &z);
        let wm = Mat::from_rows(w.to_vec(), &z);
        let c = wm.mul(&lm.inverse()?);
        let r = w.len();
        // T = {t : tC integral} is dual to the span of the columns of C
        let span = MatrixLattice::from_generators(&self.field, r, (0..c.cols).map(|j| c.col(j)).collect())?;
        if !span.is_full_rank() {
            return Err(Error::PrecisionExhausted("subspace basis is not independent to precision".into()));
        }
        let rm = Mat::from_rows(span.rows.clone(), &z);
        let t = rm.inverse()?.transpose();
        let out = t.mul(&wm).to_rows();
        MatrixLattice::from_generators(&self.field, self.dim, out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dim": self.dim,
            "generators": self.rows.iter().map(|r| r.iter().map(|x| x.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Hermite echelon form over o_F: pivots of minimal valuation (ties to the
/// lowest row), normalized to π^k, with entries above reduced mod π^k.
fn echelon(field: &Field, dim: usize, gens: Vec<Vec<Elem>>) -> Result<(Vec<Vec<Elem>>, Vec<(usize, i64)>)> {
    let mut rows: Vec<Vec<Elem>> = gens.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    for r in &rows {
        assert_eq!(r.len(), dim, "generator length");
    }
    let mut piv = vec![];
    let mut top = 0;
    for c in 0..dim {
        if top == rows.len() {
            break;
        }
        let mut best: Option<(i64, usize)> = None;
        for (i, r) in rows.iter().enumerate().skip(top) {
            if let Some(v) = r[c].valuation() {
                if best.map_or(true, |(bv, _)| v < bv) {
                    best = Some((v, i));
                }
            }
        }
        let Some((k, i)) = best else { continue };
        rows.swap(top, i);
        let pk = field.pi_pow(k);
        let u = pk.div(&rows[top][c])?;
        let mut pr: Vec<Elem> = rows[top].iter().map(|x| x.mul(&u)).collect();
        pr[c] = pk.clone();
        for x in pr.iter_mut().take(c) {
            *x = field.zero();
        }
        let pinv = field.pi_pow(-k);
        for i2 in 0..rows.len() {
            if i2 == top {
                continue;
            }
            let x = rows[i2][c].clone();
            if x.is_zero() {
                if i2 > top {
                    rows[i2][c] = field.zero();
                }
                continue;
            }
            let keep = if i2 < top { x.rem_pi(k) } else { field.zero() };
            let q = x.sub(&keep).mul(&pinv);
            if !q.is_zero() {
                for t in c..dim {
                    let y = rows[i2][t].sub(&q.mul(&pr[t]));
                    rows[i2][t] = y;
                }
            }
            rows[i2][c] = keep;
        }
        rows[top] = pr;
        piv.push((c, k));
        top += 1;
    }
    rows.truncate(top);
    Ok((rows, piv))
}

/// A lattice sequence Λ_s = ⊕_j v_j π^{⌈(s − a_j)/e⌉} o_F.
#[derive(Clone, Debug)]
pub struct LatticeSeq {
    field: Field,
    basis: FMat,
    basis_inv: FMat,
    jumps: Vec<i64>,
    e: i64,
}

impl LatticeSeq {
    /// Columns of `basis` are the splitting vectors v_j.  Jumps are moved
    /// into [0, e) by rescaling the corresponding vectors.
    pub fn new(field: &Field, basis: FMat, jumps: Vec<i64>, e: i64) -> Result<LatticeSeq> {
        if e < 1 {
            return Err(Error::Schema("period must be at least 1".into()));
        }
        if !basis.is_square() || basis.rows != jumps.len() {
            return Err(Error::Schema("basis and jumps have inconsistent sizes".into()));
        }
        let mut b = basis;
        let mut a = jumps;
        for j in 0..a.len() {
            let k = a[j].div_euclid(e);
            if k != 0 {
                let s = field.pi_pow(-k);
                for i in 0..b.rows {
                    let y = b.get(i, j).mul(&s);
                    b.set(i, j, y);
                }
                a[j] -= k * e;
            }
        }
        let det = b.det()?;
        if det.is_zero() {
            return Err(Error::SingularBasis);
        }
        let binv = b.inverse()?;
        Ok(LatticeSeq { field: field.clone(), basis: b, basis_inv: binv, jumps: a, e })
    }

    pub fn standard(field: &Field, jumps: Vec<i64>, e: i64) -> Result<LatticeSeq> {
        let n = jumps.len();
        LatticeSeq::new(field, fmat::identity(field, n), jumps, e)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn dim(&self) -> usize {
        self.jumps.len()
    }
    pub fn period(&self) -> i64 {
        self.e
    }
    pub fn jumps(&self) -> &[i64] {
        &self.jumps
    }
    pub fn basis(&self) -> &FMat {
        &self.basis
    }
    pub fn basis_inv(&self) -> &FMat {
        &self.basis_inv
    }
    pub fn has_standard_basis(&self) -> bool {
        self.basis.eq_approx(&fmat::identity(&self.field, self.dim()))
    }

    /// Exponent of π on v_j in Λ_s.
    pub fn exponent(&self, j: usize, s: i64) -> i64 {
        ceil_div(s - self.jumps[j], self.e)
    }

    /// Λ_s as a lattice of column vectors (rows of the result).
    pub fn lattice(&self, s: i64) -> MatrixLattice {
        let n = self.dim();
        let gens = (0..n)
            .map(|j| {
                let c = self.field.pi_pow(self.exponent(j, s));
                self.basis.col(j).iter().map(|x| x.mul(&c)).collect()
            })
            .collect();
        MatrixLattice::from_generators(&self.field, n, gens).expect("lattice level")
    }

    /// Bound c with π^c E_kj spanning the (k,j) entry of a_i in split
    /// coordinates.
    pub fn entry_bound(&self, i: i64, k: usize, j: usize) -> i64 {
        (0..self.e).map(|s| self.exponent(k, s + i) - self.exponent(j, s)).max().unwrap()
    }

    /// Largest i with π^0 E_kj ∈ a_i: ν_Λ of the matrix unit in split
    /// coordinates.
    pub fn entry_shift(&self, k: usize, j: usize) -> i64 {
        let mut i = -2 * self.e;
        while self.entry_bound(i + 1, k, j) <= 0 {
            i += 1;
        }
        while self.entry_bound(i, k, j) > 0 {
            i -= 1;
        }
        i
    }

    pub fn to_split(&self, x: &FMat) -> FMat {
        self.basis_inv.mul(x).mul(&self.basis)
    }

    pub fn from_split(&self, x: &FMat) -> FMat {
        self.basis.mul(x).mul(&self.basis_inv)
    }

    /// ν_Λ(x) = sup{i : x ∈ a_i}; `None` stands for +∞.
    pub fn nu(&self, x: &FMat) -> Option<i64> {
        let y = self.to_split(x);
        self.nu_split(&y)
    }

    pub fn nu_split(&self, y: &FMat) -> Option<i64> {
        let n = self.dim();
        let mut best: Option<i64> = None;
        for k in 0..n {
            for j in 0..n {
                if let Some(v) = y.get(k, j).valuation() {
                    let t = self.e * v + self.entry_shift(k, j);
                    best = Some(best.map_or(t, |b| b.min(t)));
                }
            }
        }
        best
    }

    /// a_i(Λ) in split coordinates: the monomial lattice with entries
    /// π^{c_i(k,j)} o_F.
    pub fn filtration_split(&self, i: i64) -> MatrixLattice {
        let n = self.dim();
        let mut gens = vec![];
        for k in 0..n {
            for j in 0..n {
                let mut v = vec![self.field.zero(); n * n];
                v[k * n + j] = self.field.pi_pow(self.entry_bound(i, k, j));
                gens.push(v);
            }
        }
        MatrixLattice::from_generators(&self.field, n * n, gens).expect("monomial lattice")
    }

    /// a_i(Λ) in the ambient coordinates.
    pub fn filtration(&self, i: i64) -> MatrixLattice {
        if self.has_standard_basis() {
            return self.filtration_split(i);
        }
        let n = self.dim();
        let mut gens = vec![];
        for k in 0..n {
            for j in 0..n {
                let mut u = fmat::unit(&self.field, n, k, j);
                u.set(k, j, self.field.pi_pow(self.entry_bound(i, k, j)));
                gens.push(fmat::flatten(&self.from_split(&u)));
            }
        }
        MatrixLattice::from_generators(&self.field, n * n, gens).expect("filtration lattice")
    }

    pub fn contains_in_filtration(&self, x: &FMat, i: i64) -> bool {
        self.nu(x).map_or(true, |v| v >= i)
    }

    /// (Λ + k)_s = Λ_{s+k}.
    pub fn translate(&self, k: i64) -> LatticeSeq {
        let a = self.jumps.iter().map(|x| x - k).collect();
        LatticeSeq::new(&self.field, self.basis.clone(), a, self.e).expect("translate")
    }

    pub fn direct_sum(&self, o: &LatticeSeq) -> Result<LatticeSeq> {
        if self.e != o.e {
            return Err(Error::PeriodMismatch);
        }
        let (n, m) = (self.dim(), o.dim());
        let mut b = fmat::zeros(&self.field, n + m, n + m);
        for i in 0..n {
            for j in 0..n {
                b.set(i, j, self.basis.get(i, j).clone());
            }
        }
        for i in 0..m {
            for j in 0..m {
                b.set(n + i, n + j, o.basis.get(i, j).clone());
            }
        }
        let mut a = self.jumps.clone();
        a.extend(o.jumps.iter().cloned());
        LatticeSeq::new(&self.field, b, a, self.e)
    }

    /// Λ ⊕ (Λ − 1) ⊕ ⋯ ⊕ (Λ − (e − 1)), a lattice chain in V^e.
    pub fn dagger(&self) -> LatticeSeq {
        let mut acc = self.clone();
        for l in 1..self.e {
            acc = acc.direct_sum(&self.translate(-l)).expect("equal periods");
        }
        acc
    }

    /// dim_{κ_F} Λ_s/Λ_{s+1} for s = 0..e−1, optionally restricted to the
    /// image of an idempotent that is diagonal in the splitting basis.
    pub fn residual_dims(&self, block: Option<&FMat>) -> Result<Vec<usize>> {
        let n = self.dim();
        let mut sel = vec![true; n];
        if let Some(p) = block {
            let q = self.to_split(p);
            for k in 0..n {
                for j in 0..n {
                    let x = q.get(k, j);
                    if k != j && !x.is_zero() {
                        return Err(Error::BadBlock);
                    }
                }
                let d = q.get(k, k);
                if d.is_zero() {
                    sel[k] = false;
                } else if !d.sub(&self.field.one()).is_zero() {
                    return Err(Error::BadBlock);
                }
            }
        }
        let mut out = vec![0; self.e as usize];
        for j in 0..n {
            if sel[j] {
                out[self.jumps[j] as usize] += 1;
            }
        }
        Ok(out)
    }

    pub fn is_chain(&self) -> bool {
        self.residual_dims(None).unwrap().iter().all(|&d| d > 0)
    }

    /// Same lattice at every level.
    pub fn same_as(&self, o: &LatticeSeq) -> bool {
        self.e == o.e && self.dim() == o.dim() && (0..self.e).all(|s| self.lattice(s).same(&o.lattice(s)))
    }

    /// The dual sequence t ↦ (Λ_{−t})^# for the form with Gram matrix g
    /// (h(v,w) = ρ(v)ᵀ g w, duals taken with values in p_F), and the u with
    /// (Λ_s)^# = Λ_{u−s} for all s when it exists.
    pub fn dual(&self, g: &FMat) -> Result<(LatticeSeq, Option<i64>)> {
        let gm = g.mul(&self.basis);
        let dual_basis = fmat::rho(&gm.inverse()?.transpose());
        let a: Vec<i64> = self.jumps.iter().map(|x| -x - 1).collect();
        let d = LatticeSeq::new(&self.field, dual_basis, a, self.e)?;
        let mut u = None;
        let lo = -(2 * self.e) * (self.dim() as i64 + 2) - 4 * self.e;
        let det0 = det_val(&d.lattice(0));
        for cand in lo..=-lo {
            if det_val(&self.lattice(cand)) != det0 {
                continue;
            }
            if (0..self.e).all(|t| d.lattice(t).same(&self.lattice(cand + t))) {
                u = Some(cand);
                break;
            }
        }
        Ok((d, u))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "basis": (0..self.dim()).map(|j| self.basis.col(j).iter().map(|x| x.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "jumps": self.jumps,
            "period": self.e,
        })
    }

    /// Parse {"basis": [v_1, …, v_n], "jumps": […], "period": e}; the basis
    /// may be omitted for the standard basis.
    pub fn from_json(field: &Field, v: &Value) -> Result<LatticeSeq> {
        let jumps: Vec<i64> = v
            .get("jumps")
            .and_then(|j| j.as_array())
            .ok_or_else(|| Error::Schema("lattice needs a jumps array".into()))?
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| Error::Schema("jumps must be integers".into())))
            .collect::<Result<_>>()?;
        let e = v.get("period").and_then(|x| x.as_i64()).ok_or_else(|| Error::Schema("lattice needs an integer period".into()))?;
        let basis = match v.get("basis") {
            None | Some(Value::Null) => fmat::identity(field, jumps.len()),
            Some(b) => fmat::from_json(field, b)?.transpose(),
        };
        LatticeSeq::new(field, basis, jumps, e)
    }
}

fn det_val(l: &MatrixLattice) -> i64 {
    l.pivots().iter().map(|(_, k)| k).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> Field {
        Field::qp(3, 24).unwrap()
    }

    #[test]
    fn standard_chain_and_nu() {
        let f = q3();
        let l = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let pi = fmat::identity(&f, 2).scale(&f.pi());
        assert_eq!(l.nu(&pi), Some(1));
        assert_eq!(l.nu(&fmat::zeros(&f, 2, 2)), None);
        assert_eq!(l.residual_dims(None).unwrap(), vec![2]);
    }

    #[test]
    fn period_two_chain_levels() {
        let f = q3();
        let l = LatticeSeq::standard(&f, vec![0, 0, 0, 1], 2).unwrap();
        // Λ_1 = v1 p + v2 p + v3 p + v4 o
        let l1 = l.lattice(1);
        let ks: Vec<i64> = l1.pivots().iter().map(|p| p.1).collect();
        assert_eq!(ks, vec![1, 1, 1, 0]);
        assert_eq!(l.nu(&fmat::unit(&f, 4, 3, 0)), Some(1));
        assert_eq!(l.nu(&fmat::identity(&f, 4).scale(&f.pi())), Some(2));
        assert_eq!(l.residual_dims(None).unwrap(), vec![3, 1]);
    }

    #[test]
    fn hnf_sum_intersection() {
        let f = q3();
        let a = MatrixLattice::from_generators(&f, 2, vec![vec![f.int(3), f.int(1)], vec![f.int(0), f.int(9)]]).unwrap();
        let b = MatrixLattice::standard(&f, 2, 1);
        let s = a.sum(&b).unwrap();
        assert!(s.contains_lattice(&a) && s.contains_lattice(&b));
        let i = a.intersect(&b).unwrap();
        assert!(a.contains_lattice(&i) && b.contains_lattice(&i));
        assert!(i.contains(&[f.int(9), f.int(3)]));
        assert!(!i.contains(&[f.int(3), f.int(3)]));
        assert!(a.sum(&a).unwrap().same(&a));
    }

    #[test]
    fn filtration_product_closure() {
        let f = q3();
        let l = LatticeSeq::standard(&f, vec![0, 0, 0, 1], 2).unwrap();
        let a0 = l.filtration(0).matrices(4);
        let a1 = l.filtration(1).matrices(4);
        let t1 = l.filtration(1);
        for x in &a0 {
            for y in &a1 {
                assert!(t1.contains_matrix(&x.mul(y)));
            }
        }
    }

    #[test]
    fn dagger_is_chain() {
        let f = q3();
        let l = LatticeSeq::standard(&f, vec![0, 0], 2).unwrap();
        let d = l.dagger();
        assert_eq!(d.dim(), 4);
        assert!(d.is_chain());
    }

    #[test]
    fn identity_gram_dual() {
        let f = q3();
        let l = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let (_, u) = l.dual(&fmat::identity(&f, 2)).unwrap();
        // (Λ_0)^# = Λ_1
        assert_eq!(u, Some(1));
    }
}
