//! Splitting a stratum along the primary factors of φ_β, adapted bases for
//! the blocks, and minimal-element data.

use serde_json::{json, Value};

use crate::arith::factor::{ffpoly_product, poly_key, FfPoly};
use crate::arith::fmat::{self, FMat};
use crate::arith::hensel::{bezout_combine, hensel_factor};
use crate::arith::linalg::eval_matrix;
use crate::arith::{Elem, FfElem, Mat};
use crate::error::{Error, Result};
use crate::lattices::{LatticeSeq, MatrixLattice};
use crate::strata::graded::Graded;
use crate::strata::{ffpoly_string, stratum_invariants, Stratum};

#[derive(Clone, Debug)]
pub struct Block {
    pub idem: FMat,
    pub factor: Option<(FfPoly, u32)>,
    /// n × d: a basis of V^i adapted to Λ^i, as columns.
    pub coords: FMat,
    /// d × n: coordinates on V^i (zero on the other blocks).
    pub proj: FMat,
    /// [Λ^i, q_i, r, β_i] in the coordinates of `coords`.
    pub stratum: Stratum,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.coords.cols
    }

    /// dim Λ^i_s/Λ^i_{s+1}, s = 0 .. e − 1.
    pub fn profile(&self) -> Vec<usize> {
        self.stratum.lat.residual_dims(None).expect("block lattice")
    }

    /// An endomorphism of V^i (block coordinates) as one of V.
    pub fn embed(&self, x: &FMat) -> FMat {
        self.coords.mul(x).mul(&self.proj)
    }

    pub fn restrict(&self, x: &FMat) -> FMat {
        self.proj.mul(x).mul(&self.coords)
    }
}

#[derive(Clone, Debug)]
pub struct SplitStratum {
    pub idempotents: Vec<FMat>,
    /// Λ with a splitting basis adapted to V = ⊕ V^i.
    pub resplit: LatticeSeq,
    pub blocks: Vec<Block>,
}

impl SplitStratum {
    pub fn to_json(&self) -> Value {
        json!({
            "idempotents": self.idempotents.iter().map(fmat::to_json).collect::<Vec<_>>(),
            "blocks": self.blocks.iter().map(|b| json!({
                "dim": b.dim(),
                "factor": b.factor.as_ref().map(|(f, m)| json!({"factor": ffpoly_string(f), "multiplicity": m})),
                "profile": b.profile(),
                "q": b.stratum.q,
                "stratum": b.stratum.to_json(),
            })).collect::<Vec<_>>(),
            "lattice": self.resplit.to_json(),
        })
    }
}

fn independent_columns(m: &FMat) -> Result<Vec<usize>> {
    let (_, piv, _) = m.rref()?;
    Ok(piv)
}

/// Split Λ along a complete family of orthogonal idempotents in a_0 and
/// return the adapted basis, block by block.
pub fn resplit(lat: &LatticeSeq, idems: &[FMat]) -> Result<(LatticeSeq, Vec<(FMat, FMat, LatticeSeq)>)> {
    let f = lat.field();
    let n = lat.dim();
    let e = lat.period();
    let mut pcols: Vec<Vec<usize>> = vec![];
    let mut cols = vec![];
    for p in idems {
        let c = independent_columns(p)?;
        for &j in &c {
            cols.push(p.col(j));
        }
        pcols.push(c);
    }
    if cols.len() != n {
        return Err(Error::PrecisionExhausted("idempotent ranks do not add up".into()));
    }
    let t = Mat::from_cols(&cols, &f.zero());
    let tinv = t.inverse()?;
    let levels: Vec<MatrixLattice> = (0..e).map(|s| lat.lattice(s)).collect();
    let mut full_cols = vec![];
    let mut full_jumps = vec![];
    let mut blocks = vec![];
    let mut off = 0;
    for c in &pcols {
        let d = c.len();
        let rows: Vec<usize> = (off..off + d).collect();
        let proj = tinv.submatrix(&rows, &(0..n).collect::<Vec<_>>());
        let pm = t.submatrix(&(0..n).collect::<Vec<_>>(), &rows);
        let block_lat = |s: usize| -> Result<MatrixLattice> {
            let gens = levels[s].rows().iter().map(|v| proj.mul_vec(v).iter().map(|x| x.padded()).collect()).collect();
            MatrixLattice::from_generators(f, d, gens)
        };
        let l0 = block_lat(0)?;
        if l0.rank() != d {
            return Err(Error::PrecisionExhausted("block lattice lost rank".into()));
        }
        let r0 = Mat::from_rows(l0.rows().iter().map(|v| v.iter().map(|x| x.padded()).collect()).collect(), &f.zero());
        let r0inv = r0.inverse()?;
        let k = f.residue_field();
        let mut chosen: Vec<Vec<Elem>> = vec![];
        let mut chosen_res: Vec<Vec<FfElem>> = vec![];
        let mut jumps = vec![];
        for s in (0..e).rev() {
            let ls = block_lat(s as usize)?;
            for g0 in ls.rows() {
                let g: Vec<Elem> = g0.iter().map(|x| x.padded()).collect();
                let c = r0inv.transpose().mul_vec(&g);
                let res = c.iter().map(|x| x.residue()).collect::<Result<Vec<_>>>()?;
                let mut trial = chosen_res.clone();
                trial.push(res.clone());
                let rk = Mat::from_rows(trial, &k.zero()).rank()?;
                if rk > chosen_res.len() {
                    chosen_res.push(res);
                    chosen.push(g);
                    jumps.push(s);
                }
            }
        }
        if chosen.len() != d {
            return Err(Error::PrecisionExhausted("could not adapt a block basis".into()));
        }
        let w = Mat::from_cols(&chosen, &f.zero());
        for v in &chosen {
            full_cols.push(pm.mul_vec(v));
        }
        full_jumps.extend(jumps.iter().cloned());
        let bl = LatticeSeq::new(f, w, jumps, e)?;
        blocks.push((pm, proj, bl));
        off += d;
    }
    let full = LatticeSeq::new(f, Mat::from_cols(&full_cols, &f.zero()), full_jumps, e)?;
    if !full.same_as(lat) {
        return Err(Error::BadBlock);
    }
    Ok((full, blocks))
}

fn check_idempotents(idems: &[FMat], lat: &LatticeSeq, beta: &FMat) -> Result<()> {
    let f = lat.field();
    let n = lat.dim();
    let mut sum = fmat::zeros(f, n, n);
    for (i, p) in idems.iter().enumerate() {
        if !p.mul(p).eq_approx(p) {
            return Err(Error::NotApproxIdempotent);
        }
        if !p.mul(beta).eq_approx(&beta.mul(p)) {
            return Err(Error::HypothesisFailed("idempotent does not commute with beta".into()));
        }
        if !lat.contains_in_filtration(p, 0) {
            return Err(Error::HypothesisFailed("idempotent is not in a_0".into()));
        }
        for q in &idems[i + 1..] {
            if !p.mul(q).is_zero() {
                return Err(Error::HypothesisFailed("idempotents are not orthogonal".into()));
            }
        }
        sum = sum.add(p);
    }
    if !sum.eq_approx(&fmat::identity(f, n)) {
        return Err(Error::HypothesisFailed("idempotents do not sum to one".into()));
    }
    Ok(())
}

/// Build block strata for a validated idempotent family.
pub fn split_with_idempotents(d: &Stratum, idems: Vec<FMat>, factors: Vec<Option<(FfPoly, u32)>>) -> Result<SplitStratum> {
    check_idempotents(&idems, &d.lat, &d.beta)?;
    let (full, parts) = resplit(&d.lat, &idems)?;
    let mut blocks = vec![];
    for ((p, (pm, proj, bl)), fac) in idems.iter().zip(parts).zip(factors) {
        let bi = proj.mul(&d.beta).mul(&pm);
        let qi = match bl.nu(&bi) {
            None => d.r,
            Some(v) => (-v).max(d.r),
        };
        let herm = match &d.herm {
            Some(h) if h.adjoint(p)?.eq_approx(p) => {
                let g = fmat::star(&pm).mul(h.gram()).mul(&pm);
                Some(crate::forms::HermForm::new(d.field(), h.eps(), g)?)
            }
            _ => None,
        };
        let st = Stratum::new(bl, qi, d.r, bi, herm)?;
        blocks.push(Block { idem: p.clone(), factor: fac, coords: pm, proj, stratum: st });
    }
    Ok(SplitStratum { idempotents: idems, resplit: full, blocks })
}

/// Idempotents from Hensel lifts of the primary factorization of φ_β and
/// Bézout combinations, evaluated at y_β.
pub fn split_stratum(d: &Stratum) -> Result<SplitStratum> {
    let f = d.field();
    let n = d.dim();
    if d.r != d.q - 1 && !d.is_zero() {
        return Err(Error::WrongShape);
    }
    let one = fmat::identity(f, n);
    if d.is_zero() {
        return split_with_idempotents(d, vec![one], vec![None]);
    }
    let inv = stratum_invariants(d)?;
    if inv.factors.len() == 1 {
        return split_with_idempotents(d, vec![one], vec![Some(inv.factors[0].clone())]);
    }
    let k = f.residue_field();
    let ys = d.lat.to_split(&inv.y);
    let big_phi = ys.charpoly();
    let mut idems = vec![];
    for (i, (g, m)) in inv.factors.iter().enumerate() {
        let g0 = g.pow(*m);
        let rest: Vec<(FfPoly, u32)> = inv.factors.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()).collect();
        let g1 = ffpoly_product(&rest, &k);
        let (a, b) = hensel_factor(&big_phi, &g0, &g1, f)?;
        let (_, cb) = bezout_combine(&a, &b)?;
        let e_split = eval_matrix(&cb.mul(&b), &ys);
        idems.push(d.lat.from_split(&e_split));
    }
    let facs = inv.factors.iter().cloned().map(Some).collect();
    split_with_idempotents(d, idems, facs)
}

/// Data of a candidate simple block: e(E|F), f(E|F) and minimality.
#[derive(Clone, Debug)]
pub struct MinimalData {
    pub e_e: i64,
    pub f_e: usize,
    pub degree: usize,
    pub minimal: bool,
}

impl MinimalData {
    pub fn to_json(&self) -> Value {
        json!({ "e_E": self.e_e, "f_E": self.f_e, "degree": self.degree, "minimal": self.minimal })
    }
}

/// For primary φ_β = f̄^m: e_E = e/gcd(e, q), f_E = deg f̄; β is minimal when
/// [F[β]:F] = e_E f_E and κ_F[ȳ_β] is a field, i.e. ȳ_β acting on a_0/a_1
/// has minimal polynomial f̄.
pub fn minimal_invariants(d: &Stratum) -> Result<MinimalData> {
    let inv = stratum_invariants(d)?;
    if inv.factors.len() != 1 {
        return Err(Error::NotPrimary);
    }
    if d.is_zero() {
        return Ok(MinimalData { e_e: 1, f_e: 1, degree: 1, minimal: true });
    }
    let e_e = inv.e / inv.g;
    let fbar = &inv.factors[0].0;
    let f_e = fbar.degree().unwrap_or(1);
    let mu = d.beta.minpoly()?;
    let degree = mu.degree().unwrap_or(0);
    let gr0 = Graded::new(&d.lat, 0);
    let ys = d.lat.to_split(&inv.y);
    let ly = crate::strata::graded::graded_map(&gr0, &gr0, |x| ys.mul(x))?;
    let ymin = ly.minpoly()?;
    let field_like = poly_key(&ymin.monic()?) == poly_key(&fbar.monic()?);
    Ok(MinimalData { e_e, f_e, degree, minimal: field_like && degree as i64 == e_e * f_e as i64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strata::fixtures::*;

    #[test]
    fn gl_example_splits_into_coordinate_blocks() {
        let (s, _) = gl_pair();
        let sp = split_stratum(&s).unwrap();
        assert_eq!(sp.blocks.len(), 2);
        let f = s.field();
        let want = |a: &[i64]| fmat::diag(f, &a.iter().map(|&x| f.int(x)).collect::<Vec<_>>());
        let mut got: Vec<FMat> = sp.idempotents.clone();
        got.sort_by_key(|p| p.get(0, 0).is_zero());
        assert!(got[0].eq_approx(&want(&[1, 1, 0, 0])));
        assert!(got[1].eq_approx(&want(&[0, 0, 1, 1])));
        let mut profiles: Vec<Vec<usize>> = sp.blocks.iter().map(|b| b.profile()).collect();
        profiles.sort();
        assert_eq!(profiles, vec![vec![1, 1], vec![2, 0]]);
        for b in &sp.blocks {
            assert_eq!(b.stratum.q, 2);
        }
    }

    #[test]
    fn primary_and_zero_are_single_blocks() {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let b = fmat::from_ints(&f, &[&[0, 5], &[1, 0]]).scale(&f.pi_pow(-1));
        let s = Stratum::new(lat.clone(), 1, 0, b, None).unwrap();
        assert_eq!(split_stratum(&s).unwrap().blocks.len(), 1);
        let z = Stratum::new(lat, 1, 1, fmat::zeros(&f, 2, 2), None).unwrap();
        assert_eq!(split_stratum(&z).unwrap().blocks.len(), 1);
    }

    #[test]
    fn non_diagonal_splitting() {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 0, 0], 1).unwrap();
        let u = fmat::from_ints(&f, &[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]);
        let d = fmat::diag(&f, &[f.int(1), f.int(2), f.int(2)]);
        let b = u.mul(&d).mul(&u.inverse().unwrap()).scale(&f.pi_pow(-1));
        let s = Stratum::new(lat, 1, 0, b, None).unwrap();
        let sp = split_stratum(&s).unwrap();
        assert_eq!(sp.blocks.len(), 2);
        let dims: Vec<usize> = sp.blocks.iter().map(|b| b.dim()).collect();
        assert_eq!(dims.iter().sum::<usize>(), 3);
        for b in &sp.blocks {
            assert!(b.idem.mul(&s.beta).eq_approx(&s.beta.mul(&b.idem)));
        }
    }

    #[test]
    fn minimal_examples() {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let c = fmat::from_ints(&f, &[&[0, 5], &[1, 0]]);
        let s = Stratum::new(lat.clone(), 1, 0, c.scale(&f.pi_pow(-1)), None).unwrap();
        let m = minimal_invariants(&s).unwrap();
        assert_eq!((m.e_e, m.f_e, m.minimal), (1, 2, true));
        let b = fmat::identity(&f, 2).add(&c.scale(&f.int(3))).scale(&f.pi_pow(-1));
        let s = Stratum::new(lat, 1, 0, b, None).unwrap();
        assert!(!minimal_invariants(&s).unwrap().minimal);
        let chain = LatticeSeq::standard(&f, vec![0, 1], 2).unwrap();
        let pi_mat = fmat::from_ints(&f, &[&[0, 3], &[1, 0]]);
        let b = pi_mat.inverse().unwrap();
        let s = Stratum::new(chain, 1, 0, b, None).unwrap();
        let m = minimal_invariants(&s).unwrap();
        assert_eq!((m.e_e, m.f_e, m.minimal), (2, 1, true));
    }
}
