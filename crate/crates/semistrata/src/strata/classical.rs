//! Conjugation of skew strata over U(Λ) and exact conjugation over G.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::arith::fmat::{self, FMat};
use crate::arith::{FfElem, Field, FiniteField, Mat, Scalar};
use crate::cert::Certificate;
use crate::error::{Error, Result};
use crate::forms::HermForm;
use crate::lattices::LatticeSeq;
use crate::lifting::double_coset_fixed_point;
use crate::strata::conj::{conjugate_gl, equivalent_strata_align, verify_conjugator, MatchingResult};
use crate::strata::graded::RAlgebra;
use crate::strata::split::{split_stratum, Block, SplitStratum};
use crate::strata::Stratum;

type FfMat = Mat<FfElem>;

/// The residue field with the involution induced by ρ.
struct Residue {
    k: FiniteField,
    rho: Vec<FfElem>,
}

impl Residue {
    fn new(f: &Field) -> Result<Residue> {
        let k = f.residue_field();
        let rho = k.elements().map(|x| f.apply_rho(&f.lift(&x)).residue()).collect::<Result<Vec<_>>>()?;
        Ok(Residue { k, rho })
    }

    fn rho(&self, x: &FfElem) -> FfElem {
        self.rho[self.k.index_of(x) as usize].clone()
    }

    fn form(&self, m: &FfMat, v: &[FfElem], w: &[FfElem]) -> FfElem {
        let mw = m.mul_vec(w);
        v.iter().zip(&mw).fold(self.k.zero(), |acc, (a, b)| acc.add(&self.rho(a).mul(b)))
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> FfElem {
        self.k.element(rng.gen_range(0..self.k.size()))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Canon {
    Diag(Vec<FfElem>),
    Symplectic(usize),
}

fn axpy(x: &[FfElem], a: &FfElem, y: &[FfElem]) -> Vec<FfElem> {
    x.iter().zip(y).map(|(u, v)| u.sub(&a.mul(v))).collect()
}

const SEARCH: usize = 20_000;

/// P with P^* M P in canonical shape: (1, …, 1, δ) after scaling M into a
/// hermitian form, or a standard symplectic Gram matrix.
fn canonical_basis(r: &Residue, m: &FfMat, rng: &mut ChaCha8Rng) -> Result<(FfMat, Canon)> {
    let k = &r.k;
    let d = m.rows;
    let z = k.zero();
    let lambda = k.elements().skip(1).find(|l| {
        let lm = m.scale(l);
        lm.transpose().eq_approx(&lm.map(&z, |x| r.rho(x)))
    });
    let mut basis: Vec<Vec<FfElem>> = (0..d).map(|i| (0..d).map(|j| if i == j { k.one() } else { z.clone() }).collect()).collect();
    let mut out = vec![];
    let degenerate = || Error::HypothesisFailed("residual form is degenerate".into());
    let canon = match lambda {
        Some(l) => {
            let lm = m.scale(&l);
            let mut diag = vec![];
            while basis.len() >= 2 {
                let mut found = None;
                for _ in 0..SEARCH {
                    let mut v = vec![z.clone(); d];
                    for b in &basis {
                        v = axpy(&v, &r.random(rng).neg(), b);
                    }
                    if r.form(&lm, &v, &v).is_one() {
                        found = Some(v);
                        break;
                    }
                }
                let v = found.ok_or_else(|| Error::PrecisionExhausted("no unit vector in residual form".into()))?;
                let ls: Vec<FfElem> = basis.iter().map(|b| r.form(&lm, &v, b)).collect();
                let i0 = ls.iter().position(|x| !x.is_zero_ff()).ok_or_else(degenerate)?;
                let piv = basis[i0].clone();
                let inv0 = ls[i0].inv()?;
                basis = basis.iter().enumerate().filter(|(i, _)| *i != i0).map(|(i, b)| axpy(b, &ls[i].mul(&inv0), &piv)).collect();
                out.push(v);
                diag.push(k.one());
            }
            if let Some(v) = basis.pop() {
                let delta = r.form(&lm, &v, &v);
                if delta.is_zero_ff() {
                    return Err(degenerate());
                }
                let reach: Vec<(FfElem, FfElem)> = k.elements().skip(1).map(|a| (r.rho(&a).mul(&a).mul(&delta), a)).collect();
                let (t, a) = reach
                    .iter()
                    .find(|(t, _)| t.is_one())
                    .or_else(|| reach.iter().min_by_key(|(t, _)| k.index_of(t)))
                    .cloned()
                    .ok_or_else(degenerate)?;
                out.push(v.iter().map(|x| x.mul(&a)).collect());
                diag.push(t);
            }
            Canon::Diag(diag)
        }
        None => {
            let mut planes = 0;
            while !basis.is_empty() {
                let v = basis.remove(0);
                let j = basis.iter().position(|b| !r.form(m, &v, b).is_zero_ff()).ok_or_else(degenerate)?;
                let w0 = basis.remove(j);
                let s = r.form(m, &v, &w0).inv()?;
                let w: Vec<FfElem> = w0.iter().map(|x| x.mul(&s)).collect();
                let wv = r.form(m, &w, &v);
                basis = basis
                    .iter()
                    .map(|x| {
                        let b = r.form(m, &v, x);
                        let a = r.form(m, &w, x).div(&wv).unwrap();
                        axpy(&axpy(x, &a, &v), &b, &w)
                    })
                    .collect();
                out.push(v);
                out.push(w);
                planes += 1;
            }
            Canon::Symplectic(planes)
        }
    };
    Ok((Mat::from_cols(&out, &z), canon))
}

/// An isometry (F^d, h₁) → (F^d, h₂) carrying Λ₁ onto Λ₂, both self-dual.
pub fn lattice_isometry(h1: &HermForm, l1: &LatticeSeq, h2: &HermForm, l2: &LatticeSeq, seed: u64) -> Result<FMat> {
    let f = h1.field().clone();
    let d = h1.dim();
    let e = l1.period();
    if l2.period() != e || h2.dim() != d || h1.eps() != h2.eps() {
        return Err(Error::ContextMismatch);
    }
    let (_, u1) = l1.dual(h1.gram())?;
    let (_, u2) = l2.dual(h2.gram())?;
    let u = match (u1, u2) {
        (Some(a), Some(b)) if a == b => a,
        _ => return Err(Error::BlockFormsNotIsometric),
    };
    let class = |l: &LatticeSeq, s: i64| -> Vec<usize> { (0..d).filter(|&j| l.jumps()[j] == s).collect() };
    let r = Residue::new(&f)?;
    let z = r.k.zero();
    let g1 = fmat::star(l1.basis()).mul(h1.gram()).mul(l1.basis());
    let g2 = fmat::star(l2.basis()).mul(h2.gram()).mul(l2.basis());
    let pairing = |g: &FMat, a: &[usize], b: &[usize], m: i64| -> Result<FfMat> {
        let scale = f.pi_pow(-m);
        g.submatrix(a, b).try_map(&z, |x| x.mul(&scale).residue())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fbar: Vec<Option<FfMat>> = vec![None; e as usize];
    for s in 0..e {
        let (i1, i2) = (class(l1, s), class(l2, s));
        if i1.len() != i2.len() {
            return Err(Error::ConditionFails(format!("class {s} has dimensions {} and {}", i1.len(), i2.len())));
        }
        if i1.is_empty() || fbar[s as usize].is_some() {
            continue;
        }
        let t = (u - 1 - s).rem_euclid(e);
        let m = 1 + (s + t - u).div_euclid(e);
        let (j1, j2) = (class(l1, t), class(l2, t));
        let n1 = pairing(&g1, &i1, &j1, m)?;
        let n2 = pairing(&g2, &i2, &j2, m)?;
        if t == s {
            let (p1, c1) = canonical_basis(&r, &n1, &mut rng)?;
            let (p2, c2) = canonical_basis(&r, &n2, &mut rng)?;
            if c1 != c2 {
                return Err(Error::BlockFormsNotIsometric);
            }
            fbar[s as usize] = Some(p2.mul(&p1.inverse()?));
        } else {
            fbar[s as usize] = Some(Mat::identity(i1.len(), &z));
            fbar[t as usize] = Some(n2.inverse()?.mul(&n1));
        }
    }
    let mut lifted = fmat::zeros(&f, d, d);
    for s in 0..e {
        let (i1, i2) = (class(l1, s), class(l2, s));
        if let Some(b) = &fbar[s as usize] {
            for (a, &row) in i2.iter().enumerate() {
                for (c, &col) in i1.iter().enumerate() {
                    lifted.set(row, col, f.lift(b.get(a, c)));
                }
            }
        }
    }
    let fm = l2.basis().mul(&lifted).mul(l1.basis_inv());
    double_coset_fixed_point(&fm, l1, 1, h1, h2).map_err(|e| match e {
        Error::CosetNotInvariant => Error::BlockFormsNotIsometric,
        other => other,
    })
}

fn sigma_partner(h: &HermForm, sp: &SplitStratum, i: usize) -> Result<usize> {
    let s = h.adjoint(&sp.idempotents[i])?;
    sp.idempotents
        .iter()
        .position(|e| e.eq_approx(&s))
        .ok_or_else(|| Error::HypothesisFailed("splitting is not stable under the involution".into()))
}

fn is_scalar_block(b: &Block) -> bool {
    let m = &b.stratum.beta;
    let c = m.get(0, 0).clone();
    b.stratum.is_zero() || m.eq_approx(&Mat::scalar(m.rows, &c))
}

const R_CAP: u64 = 20_000;

/// c in the residual commutant with σ(w c) w c ≡ 1 modulo a_1.
fn residual_correction(w: &FMat, b: &Block, h1: &HermForm, h2: &HermForm) -> Result<FMat> {
    let st = &b.stratum;
    let f = st.field().clone();
    let lat = &st.lat;
    let alg = RAlgebra::new(lat, &st.beta_split(), st.q)?;
    let k = f.residue_field();
    let total = k.size().checked_pow(alg.dim() as u32).filter(|&t| t <= R_CAP);
    let total = total.ok_or_else(|| Error::UnsupportedContext("residual commutant too large to search".into()))?;
    let one = fmat::identity(&f, st.dim());
    for idx in 0..total {
        let mut c = fmat::zeros(&f, st.dim(), st.dim());
        let mut t = idx;
        for bm in &alg.basis {
            let x = k.element(t % k.size());
            t /= k.size();
            c = c.add(&bm.scale(&f.lift(&x)));
        }
        let c = lat.from_split(&c);
        let ci = match c.inverse() {
            Ok(x) => x,
            Err(_) => continue,
        };
        if !lat.contains_in_filtration(&ci, 0) {
            continue;
        }
        let wc = w.mul(&c);
        let y = h1.adjoint_to(h2, &wc)?.mul(&wc);
        if lat.contains_in_filtration(&y.sub(&one), 1) {
            return Ok(wc);
        }
    }
    Err(Error::BlockFormsNotIsometric)
}

/// u ∈ U(Λ) with u β u⁻¹ ≡ β′ modulo a_{−r}.
pub fn conjugate_classical(d: &Stratum, d2: &Stratum, m: &MatchingResult, seed: u64) -> Result<Certificate> {
    let h = d.herm.as_ref().ok_or_else(|| Error::UnsupportedContext("first stratum carries no form".into()))?;
    let h2 = d2.herm.as_ref().ok_or_else(|| Error::UnsupportedContext("second stratum carries no form".into()))?;
    if !h.gram().eq_approx(h2.gram()) || h.eps() != h2.eps() {
        return Err(Error::ContextMismatch);
    }
    if !d.lat.same_as(&d2.lat) || d.q != d2.q || d.r != d2.r {
        return Err(Error::HypothesisFailed("strata must share Λ, q and r".into()));
    }
    if !m.condition {
        return Err(Error::ConditionFails(m.profile_report()));
    }
    let f = d.field().clone();
    let n = d.dim();
    let (s1, s2) = (&m.split, &m.split2);
    for (i, b) in s1.blocks.iter().enumerate() {
        if let (Some(a), Some(c)) = (&b.stratum.herm, &s2.blocks[m.zeta[i]].stratum.herm) {
            if !a.is_isometric(c)? {
                return Err(Error::BlockFormsNotIsometric);
            }
        }
    }
    let x = conjugate_gl(d, d2, m, seed)?.g;
    let xi = x.inverse()?;
    let moved: Vec<FMat> = s1.idempotents.iter().map(|e| x.mul(e).mul(&xi)).collect();
    let (g, tau) = equivalent_strata_align(d2, d2, &moved, &s2.idempotents)?;
    if tau != m.zeta {
        return Err(Error::PrecisionExhausted("idempotent alignment disagrees with the matching".into()));
    }
    let x1 = g.inverse()?.mul(&x);
    let mut u = fmat::zeros(&f, n, n);
    let mut done = vec![false; s1.blocks.len()];
    for i in 0..s1.blocks.len() {
        if done[i] {
            continue;
        }
        let j = m.zeta[i];
        let (bi, bj) = (&s1.blocks[i], &s2.blocks[j]);
        let pi = sigma_partner(h, s1, i)?;
        let pj = sigma_partner(h, s2, j)?;
        let wi = bj.proj.mul(&x1).mul(&bi.coords);
        if pi == i {
            if pj != j {
                return Err(Error::BlockFormsNotIsometric);
            }
            let (hi, hj) = (bi.stratum.herm.as_ref().unwrap(), bj.stratum.herm.as_ref().unwrap());
            let w = if is_scalar_block(bi) && is_scalar_block(bj) {
                lattice_isometry(hi, &bi.stratum.lat, hj, &bj.stratum.lat, seed)?
            } else {
                let wc = residual_correction(&wi, bi, hi, hj)?;
                double_coset_fixed_point(&wc, &bi.stratum.lat, 1, hi, hj)?
            };
            u = u.add(&bj.coords.mul(&w).mul(&bi.proj));
            done[i] = true;
        } else {
            if m.zeta[pi] != pj {
                return Err(Error::NoConjugator("matching does not respect the involution".into()));
            }
            let (bpi, bpj) = (&s1.blocks[pi], &s2.blocks[pj]);
            let mm = fmat::star(&bi.coords).mul(h.gram()).mul(&bpi.coords);
            let mm2 = fmat::star(&bj.coords).mul(h.gram()).mul(&bpj.coords);
            let wp = mm2.inverse()?.mul(&fmat::star(&wi).inverse()?).mul(&mm);
            u = u.add(&bj.coords.mul(&wi).mul(&bi.proj)).add(&bpj.coords.mul(&wp).mul(&bpi.proj));
            done[i] = true;
            done[pi] = true;
        }
    }
    let c = verify_conjugator(&u, d, d2, Some(h))?;
    if !c.ok() {
        return Err(Error::PrecisionExhausted(format!("conjugator failed checks {:?}", c.failed())));
    }
    Ok(c)
}

/// g ∈ G with g β g⁻¹ = β′, for splittings into scalar blocks.
pub fn skolem_noether_classical(d: &Stratum, d2: &Stratum, cert: Option<&Certificate>) -> Result<Certificate> {
    let h = d.herm.as_ref().ok_or_else(|| Error::UnsupportedContext("first stratum carries no form".into()))?;
    match d2.herm.as_ref() {
        Some(h2) if h2.gram().eq_approx(h.gram()) => {}
        _ => return Err(Error::ContextMismatch),
    }
    if let Some(c) = cert {
        if !c.ok() || !h.is_isometry(&c.g) {
            return Err(Error::NoConjugator("the supplied certificate does not intertwine over G".into()));
        }
    }
    if !d.beta.charpoly().sub(&d2.beta.charpoly()).is_zero() {
        return Err(Error::NoConjugator("characteristic polynomials differ".into()));
    }
    let f = d.field().clone();
    let n = d.dim();
    let s1 = split_stratum(d)?;
    let s2 = split_stratum(d2)?;
    let scalar = |b: &Block| {
        let m = &b.stratum.beta;
        let c = m.get(0, 0).clone();
        m.eq_approx(&Mat::scalar(m.rows, &c)).then_some(c)
    };
    let c1 = s1.blocks.iter().map(scalar).collect::<Option<Vec<_>>>();
    let c2 = s2.blocks.iter().map(scalar).collect::<Option<Vec<_>>>();
    let (c1, c2) = match (c1, c2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::UnsupportedContext("a block is not scalar".into())),
    };
    let mut u = fmat::zeros(&f, n, n);
    let mut done = vec![false; s1.blocks.len()];
    for i in 0..s1.blocks.len() {
        if done[i] {
            continue;
        }
        let j = c2.iter().position(|c| c.eq_approx(&c1[i])).ok_or_else(|| Error::NoConjugator("eigenvalues differ".into()))?;
        let (bi, bj) = (&s1.blocks[i], &s2.blocks[j]);
        if bi.dim() != bj.dim() {
            return Err(Error::NoConjugator("eigenspace dimensions differ".into()));
        }
        let pi = sigma_partner(h, &s1, i)?;
        let pj = sigma_partner(h, &s2, j)?;
        if pi == i {
            if pj != j {
                return Err(Error::NoConjugator("eigenspaces are paired differently".into()));
            }
            let (hi, hj) = (bi.stratum.herm.as_ref().unwrap(), bj.stratum.herm.as_ref().unwrap());
            let t = hi.isometry_to(hj).map_err(|_| Error::NoConjugator("eigenspace forms are not isometric".into()))?;
            u = u.add(&bj.coords.mul(&t).mul(&bi.proj));
            done[i] = true;
        } else {
            let (bpi, bpj) = (&s1.blocks[pi], &s2.blocks[pj]);
            let mm = fmat::star(&bi.coords).mul(h.gram()).mul(&bpi.coords);
            let mm2 = fmat::star(&bj.coords).mul(h.gram()).mul(&bpj.coords);
            let wp = mm2.inverse()?.mul(&mm);
            u = u.add(&bj.coords.mul(&bi.proj)).add(&bpj.coords.mul(&wp).mul(&bpi.proj));
            done[i] = true;
            done[pi] = true;
        }
    }
    let mut c = Certificate::new(u.clone());
    c.push("isometry", h.is_isometry(&u), json!(null));
    let ok = u.inverse().map(|ui| u.mul(&d.beta).mul(&ui).eq_approx(&d2.beta)).unwrap_or(false);
    c.push("exact_conjugation", ok, json!(null));
    if !c.ok() {
        return Err(Error::PrecisionExhausted(format!("conjugator failed checks {:?}", c.failed())));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{FieldSpec, StepKind};
    use crate::lifting::cayley;
    use crate::strata::conj::{fmt_profile, match_minimal, verify_intertwiner};
    use crate::strata::fixtures::*;

    fn random_unitary(h: &HermForm, lat: &LatticeSeq, seed: i64) -> FMat {
        let f = h.field();
        let n = h.dim();
        let mut v = fmat::zeros(f, n, n);
        for i in 0..n {
            for j in 0..n {
                v.set(i, j, f.int((seed * 7 + (i * 5 + j * 3) as i64 * seed) % 11 - 5).mul(&f.pi_pow(lat.period())));
            }
        }
        let sk = v.sub(&h.adjoint(&v).unwrap()).scale(&f.rational(1, 2).unwrap());
        cayley(h, lat, &sk).unwrap()
    }

    #[test]
    fn skew_example_condition_fails() {
        let (s, t) = skew_pair();
        let g = fmat::from_ints(s.field(), &[&[0, 1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 0]]);
        let c = verify_intertwiner(&g, &s, &t, s.herm.as_ref()).unwrap();
        assert!(c.ok(), "{:?}", c.failed());
        let m = match_minimal(&s, &t, 5).unwrap();
        assert!(!m.condition);
        let mut ps: Vec<_> = m.profiles.iter().map(|(a, b)| format!("{} vs {}", fmt_profile(a), fmt_profile(b))).collect();
        ps.sort();
        assert_eq!(ps, vec!["(0,1,1,0) vs (1,0,0,1)", "(1,0,0,1) vs (0,1,1,0)"]);
        assert!(matches!(conjugate_classical(&s, &t, &m, 5), Err(Error::ConditionFails(_))));
        let sn = skolem_noether_classical(&s, &t, Some(&c)).unwrap();
        assert!(sn.ok());
    }

    #[test]
    fn unitary_scalar_roundtrip() {
        let (s, _) = skew_pair();
        let h = s.herm.clone().unwrap();
        let f = s.field().clone();
        let t0 = fmat::diag(&f, &[f.int(2), f.int(1), f.int(1).rho().inv().unwrap(), f.int(2).inv().unwrap()]);
        assert!(h.is_isometry(&t0));
        for seed in 1..4 {
            let u0 = t0.mul(&random_unitary(&h, &s.lat, seed));
            let t = s.with_beta(u0.mul(&s.beta).mul(&u0.inverse().unwrap())).unwrap();
            let m = match_minimal(&s, &t, seed as u64).unwrap();
            let c = conjugate_classical(&s, &t, &m, seed as u64).unwrap();
            assert!(c.ok());
            assert!(h.is_isometry(&c.g));
        }
    }

    #[test]
    fn symplectic_paired_roundtrip() {
        let f = q3();
        let h = HermForm::new(&f, -1, fmat::from_ints(&f, &[&[0, 0, 1, 0], &[0, 0, 0, 1], &[-1, 0, 0, 0], &[0, -1, 0, 0]])).unwrap();
        let lat = LatticeSeq::standard(&f, vec![0, 0, 0, 0], 1).unwrap();
        let pi = f.pi_pow(-1);
        let b = fmat::diag(&f, &[pi.clone(), pi.clone(), pi.neg(), pi.neg()]);
        let s = Stratum::new(lat.clone(), 1, 0, b, Some(h.clone())).unwrap();
        let a = fmat::from_ints(&f, &[&[1, 1, 0, 0], &[1, 2, 0, 0], &[0, 0, 2, -1], &[0, 0, -1, 1]]);
        let n = fmat::from_ints(&f, &[&[1, 0, 1, 2], &[0, 1, 2, 1], &[0, 0, 1, 0], &[0, 0, 0, 1]]);
        let u0 = a.mul(&n).mul(&random_unitary(&h, &lat, 2));
        assert!(h.is_isometry(&u0));
        let t = s.with_beta(u0.mul(&s.beta).mul(&u0.inverse().unwrap())).unwrap();
        let m = match_minimal(&s, &t, 9).unwrap();
        let c = conjugate_classical(&s, &t, &m, 9).unwrap();
        assert!(c.ok());
        let sn = skolem_noether_classical(&s, &t, None).unwrap();
        assert!(sn.ok());
    }

    #[test]
    fn orthogonal_non_scalar_roundtrip() {
        let f = q3();
        let h = HermForm::new(&f, 1, fmat::identity(&f, 2)).unwrap();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let b = fmat::from_ints(&f, &[&[0, 1], &[-1, 0]]).scale(&f.pi_pow(-1));
        let s = Stratum::new(lat.clone(), 1, 0, b, Some(h.clone())).unwrap();
        let sw = fmat::from_ints(&f, &[&[0, 1], &[1, 0]]);
        for u0 in [sw.clone(), sw.mul(&random_unitary(&h, &lat, 3))] {
            let t = s.with_beta(u0.mul(&s.beta).mul(&u0.inverse().unwrap())).unwrap();
            let m = match_minimal(&s, &t, 1).unwrap();
            let c = conjugate_classical(&s, &t, &m, 1).unwrap();
            assert!(c.ok());
        }
    }

    #[test]
    fn residual_canonical_forms() {
        let f = Field::new(&FieldSpec::qp(5).step(StepKind::Unramified, &[-2, 0, 1]).conjugate(None), Some(12)).unwrap();
        let r = Residue::new(&f).unwrap();
        let k = &r.k;
        let m = Mat::diag(&[k.from_int(2), k.from_int(3), k.from_int(1)], &k.zero());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (p, c) = canonical_basis(&r, &m, &mut rng).unwrap();
        assert_eq!(c, Canon::Diag(vec![k.one(), k.one(), k.one()]));
        let pm = p.map(&k.zero(), |x| r.rho(x)).transpose().mul(&m).mul(&p);
        assert!(pm.eq_approx(&Mat::identity(3, &k.zero())));
        let q = Field::qp(5, 12).unwrap();
        let r = Residue::new(&q).unwrap();
        let k = &r.k;
        let m = Mat::diag(&[k.from_int(2), k.from_int(1)], &k.zero());
        let (_, c) = canonical_basis(&r, &m, &mut rng).unwrap();
        assert_eq!(c, Canon::Diag(vec![k.one(), k.from_int(2)]));
        let alt = Mat::from_rows(vec![vec![k.zero(), k.one()], vec![k.from_int(-1), k.zero()]], &k.zero());
        assert_eq!(canonical_basis(&r, &alt, &mut rng).unwrap().1, Canon::Symplectic(1));
    }
}
