//! Lifting through residue quotients: Witt bases, isometries, double coset
//! fixed points, Cayley transforms and idempotents.

use serde_json::json;

use crate::arith::fmat::{self, FMat};
use crate::arith::{Elem, Field, Mat};
use crate::cert::Certificate;
use crate::error::{Error, Result};
use crate::forms::HermForm;
use crate::lattices::LatticeSeq;

/// Iteration budget for contractions: ⌈log₂ digits⌉ + 4, digits counted in
/// units of the finest valuation in play.
pub fn budget(field: &Field, period: i64) -> usize {
    let digits = (field.prec() as u64) * (field.e() as u64) * (period.max(1) as u64);
    (64 - (digits.max(2) - 1).leading_zeros()) as usize + 4
}

fn ident(f: &Field, n: usize) -> FMat {
    fmat::identity(f, n)
}

/// z with z² y = 1 and z ≡ 1, for y ≡ 1 modulo a_1 (Newton, p odd).
pub fn inv_sqrt_unipotent(y: &FMat, iters: usize) -> Result<FMat> {
    let f = y.get(0, 0).field().clone();
    let n = y.rows;
    let one = ident(&f, n);
    let half = f.rational(1, 2)?;
    let three = one.scale(&f.int(3));
    let mut z = one.clone();
    for _ in 0..iters {
        if y.mul(&z).mul(&z).eq_approx(&one) {
            return Ok(z);
        }
        z = z.mul(&three.sub(&y.mul(&z).mul(&z))).scale(&half);
    }
    if y.mul(&z).mul(&z).eq_approx(&one) {
        return Ok(z);
    }
    Err(Error::NonConvergence("inverse square root".into()))
}

/// Cayley transform (1 + v/2)(1 − v/2)⁻¹ of a skew v ∈ a_1(Λ).
pub fn cayley(h: &HermForm, lat: &LatticeSeq, v: &FMat) -> Result<FMat> {
    let f = h.field();
    let n = h.dim();
    if !h.adjoint(v)?.eq_approx(&v.neg()) {
        return Err(Error::NotSkew);
    }
    if !lat.contains_in_filtration(v, 1) {
        return Err(Error::HypothesisFailed("element does not lie in a_1".into()));
    }
    let one = ident(f, n);
    let hv = v.scale(&f.rational(1, 2)?);
    let g = one.add(&hv).mul(&one.sub(&hv).inverse()?);
    if !h.is_isometry(&g) || !lat.contains_in_filtration(&g.sub(&one), 1) {
        return Err(Error::PrecisionExhausted("Cayley transform failed its checks".into()));
    }
    Ok(g)
}

#[derive(Clone, Debug)]
pub struct IdempotentLift {
    pub value: FMat,
    /// ν(α_k² − α_k) after k steps; `None` means exact to precision
    pub depths: Vec<Option<i64>>,
}

impl IdempotentLift {
    /// α_k² − α_k ∈ k_{2^k r} at every step.
    pub fn doubling_holds(&self, r: i64) -> bool {
        self.depths.iter().enumerate().all(|(k, d)| d.map_or(true, |d| d >= r << k))
    }
}

/// Lift α with α² − α ∈ k_r (r ≥ 1) to an idempotent by e ↦ 3e² − 2e³.
/// `nu` is the filtration valuation; `sigma` an optional involution whose
/// fixed points are kept fixed.
pub fn lift_idempotent(
    alpha: &FMat,
    r: i64,
    nu: &dyn Fn(&FMat) -> Option<i64>,
    sigma: Option<&dyn Fn(&FMat) -> Result<FMat>>,
    iters: usize,
) -> Result<IdempotentLift> {
    if r < 1 {
        return Err(Error::NotApproxIdempotent);
    }
    let f = alpha.get(0, 0).field().clone();
    let d0 = alpha.mul(alpha).sub(alpha);
    if nu(&d0).map_or(false, |v| v < r) {
        return Err(Error::NotApproxIdempotent);
    }
    let symmetric = match sigma {
        Some(s) => s(alpha)?.eq_approx(alpha),
        None => false,
    };
    let two = f.int(2);
    let three = f.int(3);
    let mut e = alpha.clone();
    let mut depths = vec![nu(&d0)];
    // entries below this valuation are noise at working precision
    let cap = f.prec() as i64 * f.e() + fmat::min_val(alpha).unwrap_or(0).min(0);
    let negligible = |m: &FMat| fmat::min_val(m).map_or(true, |v| v >= cap);
    for _ in 0..iters {
        let d = e.mul(&e).sub(&e);
        if negligible(&d) {
            break;
        }
        let e2 = e.mul(&e);
        e = e2.scale(&three).sub(&e2.mul(&e).scale(&two));
        depths.push(nu(&e.mul(&e).sub(&e)));
    }
    if !negligible(&e.mul(&e).sub(&e)) {
        return Err(Error::NonConvergence("idempotent lifting".into()));
    }
    let e = e.map(&f.zero(), |x| if x.valuation().map_or(true, |v| v >= cap) { f.zero() } else { x.clone() });
    if nu(&e.sub(alpha)).map_or(false, |v| v < r) {
        return Err(Error::PrecisionExhausted("lift left the residue class".into()));
    }
    if symmetric {
        let s = sigma.unwrap();
        if !s(&e)?.eq_approx(&e) {
            return Err(Error::PrecisionExhausted("symmetry lost while lifting".into()));
        }
    }
    Ok(IdempotentLift { value: e, depths })
}

fn same_levels(lat: &LatticeSeq, other: &LatticeSeq, f: &FMat) -> Result<bool> {
    let n = lat.dim();
    for s in 0..lat.period() {
        let img = lat.lattice(s).image(n, |v| f.mul_vec(v))?;
        if !img.same(&other.lattice(s)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Defect witness: (f − g)(Λ_s) ⊆ Λ'_{s+1} for one period of s.
fn defects_ok(lat: &LatticeSeq, other: &LatticeSeq, d: &FMat) -> Result<bool> {
    let n = lat.dim();
    for s in 0..lat.period() {
        let img = lat.lattice(s).image(n, |v| d.mul_vec(v))?;
        if !other.lattice(s + 1).contains_lattice(&img) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Data for lifting a residual isometry f: (V, h, Λ) → (V', h', Λ').
#[derive(Clone, Debug)]
pub struct ResidualIsometryData {
    pub h: HermForm,
    pub lat: LatticeSeq,
    pub h2: HermForm,
    pub lat2: LatticeSeq,
    pub f: FMat,
}

/// Independent re-check of a lift certificate.
pub fn verify_lift(h: &HermForm, lat: &LatticeSeq, h2: &HermForm, lat2: &LatticeSeq, f: &FMat, g: &FMat) -> Result<Certificate> {
    let mut c = Certificate::new(g.clone());
    c.push("isometry", h.is_isometry_to(h2, g), json!({ "gram": fmat::to_json(&h2.transport(g)) }));
    c.push("maps_lattice", same_levels(lat, lat2, g)?, json!({ "levels": lat.period() }));
    let d = f.sub(g);
    c.push("defects", defects_ok(lat, lat2, &d)?, json!({ "f_minus_g": fmat::to_json(&d) }));
    Ok(c)
}

/// An isometry g: (V, h) → (V', h') with g(Λ) = Λ' and (f − g)(Λ_s) ⊆
/// Λ'_{s+1}, assuming f(Λ_s) = Λ'_s and σ_{h,h'}(f) f ≡ 1 mod a_1(Λ).
pub fn lift_isometry(d: &ResidualIsometryData) -> Result<Certificate> {
    let (h, lat, h2, lat2, f) = (&d.h, &d.lat, &d.h2, &d.lat2, &d.f);
    if h.eps() != h2.eps() || h.field() != h2.field() {
        return Err(Error::ContextMismatch);
    }
    if !same_levels(lat, lat2, f)? {
        return Err(Error::HypothesisFailed("f does not map Λ to Λ'".into()));
    }
    let g = unit_fixed_point(h, h2, lat, f, 1)?;
    let c = verify_lift(h, lat, h2, lat2, f, &g)?;
    if !c.ok() {
        return Err(Error::PrecisionExhausted(format!("lift failed checks {:?}", c.failed())));
    }
    Ok(c)
}

/// g = f·y^{−1/2} with y = σ_{h,h'}(f) f ∈ Ũⁿ(Λ).
fn unit_fixed_point(h: &HermForm, h2: &HermForm, lat: &LatticeSeq, f: &FMat, n: i64) -> Result<FMat> {
    let fld = h.field();
    let y = h.adjoint_to(h2, f)?.mul(f);
    let one = ident(fld, h.dim());
    if !lat.contains_in_filtration(&y.sub(&one), n) {
        return Err(Error::HypothesisFailed("residual Gram matrices disagree".into()));
    }
    let z = inv_sqrt_unipotent(&y, budget(fld, lat.period()))?;
    Ok(f.mul(&z))
}

/// A fixed point φ = σ_{h,h'}(φ)⁻¹ in the double coset Ũⁿ(fΛ) f Ũⁿ(Λ).
pub fn double_coset_fixed_point(f: &FMat, lat: &LatticeSeq, n: i64, h: &HermForm, h2: &HermForm) -> Result<FMat> {
    if n < 1 {
        return Err(Error::HypothesisFailed("n must be at least 1".into()));
    }
    let y = h.adjoint_to(h2, f)?.mul(f);
    let one = ident(h.field(), h.dim());
    if !lat.contains_in_filtration(&y.sub(&one), n) {
        return Err(Error::CosetNotInvariant);
    }
    let phi = unit_fixed_point(h, h2, lat, f, n)?;
    if !h.is_isometry_to(h2, &phi) || !lat.contains_in_filtration(&f.inverse()?.mul(&phi).sub(&one), n) {
        return Err(Error::PrecisionExhausted("fixed point failed its checks".into()));
    }
    Ok(phi)
}

/// u ∈ Ũˢ(Λ) with h_{a₂}(u v, u w) = h_{a₁}(v, w), i.e. σ(u) a₂ u = a₁.
pub fn twist_isometry(h: &HermForm, lat: &LatticeSeq, a1: &FMat, a2: &FMat, s: i64) -> Result<FMat> {
    let f = h.field();
    let n = h.dim();
    if s < 1 {
        return Err(Error::HypothesisFailed("s must be positive".into()));
    }
    let s1 = h.symmetry_sign(a1)?;
    let s2 = h.symmetry_sign(a2)?;
    if s1.is_none() || s1 != s2 {
        return Err(Error::NotSelfAdjoint);
    }
    let y = a2.inverse()?.mul(a1);
    let one = ident(f, n);
    if !lat.contains_in_filtration(&y.sub(&one), s) {
        return Err(Error::HypothesisFailed("a₂⁻¹a₁ does not lie in Ũˢ(Λ)".into()));
    }
    let z = inv_sqrt_unipotent(&y, budget(f, lat.period()))?;
    let u = y.mul(&z);
    let ok = fmat::star(&u).mul(&h.gram().mul(a2)).mul(&u).eq_approx(&h.gram().mul(a1)) && lat.contains_in_filtration(&u.sub(&one), s);
    if !ok {
        return Err(Error::PrecisionExhausted("twist isometry failed its checks".into()));
    }
    Ok(u)
}

/// Case tags for lifting residual Witt bases in one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WittCase {
    /// period 1 and Λ₀^# = Λ₁
    Shifted,
    /// period 1 and Λ₀^# = Λ₀, via the form h·π⁻¹
    SelfDual,
    /// period 2 and Λ₀^# = Λ₀, anisotropic dimension zero
    PeriodTwo,
}

/// Lifts of a residual Witt basis: hyperbolic pairs and anisotropic vectors.
#[derive(Clone, Debug)]
pub struct ResidualWitt {
    pub pairs: Vec<(Vec<Elem>, Vec<Elem>)>,
    pub tail: Vec<Vec<Elem>>,
}

#[derive(Clone, Debug)]
pub struct WittLift {
    /// columns: x₁, y₁, x₂, y₂, …, then the tail
    pub basis: FMat,
    pub planes: usize,
    pub tail: usize,
    /// the form in which the basis is a Witt basis (h or h·π⁻¹)
    pub form: HermForm,
    pub iterations: usize,
}

fn hv(h: &HermForm, x: &[Elem], y: &[Elem]) -> Elem {
    h.eval(x, y)
}

fn axpy(x: &[Elem], a: &Elem, y: &[Elem]) -> Vec<Elem> {
    x.iter().zip(y).map(|(u, v)| u.sub(&v.mul(a))).collect()
}

/// Refine pairs (x, y) with h(x, y) a unit of the pairing to exact isotropy
/// and mutual orthogonality, projecting the remaining vectors.  With
/// `normalize`, x is rescaled by ρ(h(x,y))⁻¹ so that h(x, y) = 1.
pub fn refine_witt(
    h: &HermForm,
    vecs: &[Vec<Elem>],
    pairs: &[(usize, usize)],
    singles: &[usize],
    normalize: bool,
    iters: usize,
) -> Result<(Vec<Vec<Elem>>, usize)> {
    let f = h.field();
    let eps = f.int(h.eps() as i64);
    let half = f.rational(1, 2)?;
    let mut v = vecs.to_vec();
    let mut used = 0usize;
    let mut done: Vec<usize> = vec![];
    for &(i, j) in pairs {
        let mut x = v[i].clone();
        let mut y = v[j].clone();
        let mut k = 0;
        loop {
            let hxx = hv(h, &x, &x);
            if hxx.is_zero() {
                break;
            }
            if k == iters {
                return Err(Error::NonConvergence("isotropy refinement".into()));
            }
            let a = hv(h, &x, &y);
            x = axpy(&x, &a.inv()?.mul(&hxx).mul(&half), &y);
            k += 1;
        }
        used = used.max(k);
        let a = hv(h, &x, &y);
        if a.is_zero() {
            return Err(Error::HypothesisFailed("pair has degenerate pairing".into()));
        }
        if normalize {
            let t = a.rho().inv()?;
            x = x.iter().map(|c| c.mul(&t)).collect();
        }
        let a = hv(h, &x, &y);
        let hyy = hv(h, &y, &y);
        let d = eps.mul(&a.rho().inv()?).mul(&hyy).mul(&half);
        y = axpy(&y, &d, &x);
        // project everything not yet fixed
        let ai = a.inv()?;
        let rai = a.rho().inv()?;
        for (k, w) in v.iter_mut().enumerate() {
            if k == i || k == j || done.contains(&k) {
                continue;
            }
            let beta = ai.mul(&hv(h, &x, w));
            let alpha = eps.mul(&rai).mul(&hv(h, &y, w));
            *w = axpy(&axpy(w, &alpha, &x), &beta, &y);
        }
        v[i] = x;
        v[j] = y;
        done.push(i);
        done.push(j);
    }
    for &i in singles {
        let b = v[i].clone();
        let hb = hv(h, &b, &b);
        if hb.is_zero() {
            return Err(Error::HypothesisFailed("anisotropic vector is isotropic".into()));
        }
        let hi = hb.inv()?;
        for (k, w) in v.iter_mut().enumerate() {
            if k == i || done.contains(&k) {
                continue;
            }
            let c = hi.mul(&hv(h, &b, w));
            *w = axpy(w, &c, &b);
        }
        done.push(i);
    }
    Ok((v, used))
}

/// Level of a vector: the largest s ≤ bound with v ∈ Λ_s.
fn level(lat: &LatticeSeq, v: &[Elem]) -> Option<i64> {
    if v.iter().all(|x| x.is_zero()) {
        return None;
    }
    let mut s = -64 * lat.period();
    while lat.lattice(s + 1).contains(v) {
        s += 1;
        if s > 64 * lat.period() {
            return None;
        }
    }
    Some(s)
}

/// Lift a residual Witt basis of one block to a Witt basis of (V, h).
pub fn lift_witt_basis_block(h: &HermForm, lat: &LatticeSeq, case: WittCase, data: &ResidualWitt) -> Result<WittLift> {
    let f = h.field();
    let (_, u) = lat.dual(h.gram())?;
    let e = lat.period();
    let ok = match case {
        WittCase::Shifted => e == 1 && u == Some(1),
        WittCase::SelfDual => e == 1 && u == Some(0),
        WittCase::PeriodTwo => e == 2 && u == Some(0) && data.tail.is_empty(),
    };
    if !ok {
        return Err(Error::CaseHypothesisFailed(format!("{case:?}")));
    }
    let form = match case {
        WittCase::SelfDual => {
            let pi = f.pi();
            let sign = if pi.rho().sub(&pi).is_zero() { 1 } else { -1 };
            HermForm::new(f, h.eps() * sign, h.gram().scale(&pi.inv()?))?
        }
        _ => h.clone(),
    };
    let mut vecs = vec![];
    let mut pairs = vec![];
    for (x, y) in &data.pairs {
        pairs.push((vecs.len(), vecs.len() + 1));
        vecs.push(x.clone());
        vecs.push(y.clone());
    }
    if case == WittCase::PeriodTwo {
        // replace the y's by the dual basis of the x's inside their span
        let m = data.pairs.len();
        let xs: Vec<&Vec<Elem>> = data.pairs.iter().map(|p| &p.0).collect();
        let ys: Vec<&Vec<Elem>> = data.pairs.iter().map(|p| &p.1).collect();
        let mut pm = fmat::zeros(f, m, m);
        for i in 0..m {
            for j in 0..m {
                pm.set(i, j, form.eval(xs[i], ys[j]));
            }
        }
        let c = pm.inverse().map_err(|_| Error::CaseHypothesisFailed("residual pairing is degenerate".into()))?;
        for j in 0..m {
            let n = h.dim();
            let mut y = vec![f.zero(); n];
            for k in 0..m {
                let w = c.get(k, j);
                for r in 0..n {
                    y[r] = y[r].add(&ys[k][r].mul(w));
                }
            }
            vecs[2 * j + 1] = y;
        }
    }
    let mut singles = vec![];
    for t in &data.tail {
        singles.push(vecs.len());
        vecs.push(t.clone());
    }
    if vecs.len() != h.dim() {
        return Err(Error::HypothesisFailed("residual basis has the wrong size".into()));
    }
    let input = vecs.clone();
    let (out, iterations) = refine_witt(&form, &vecs, &pairs, &singles, true, budget(f, e))?;
    // the output reduces to the input levelwise
    for (a, b) in input.iter().zip(&out) {
        if let Some(s) = level(lat, a) {
            let d: Vec<Elem> = a.iter().zip(b).map(|(x, y)| x.sub(y)).collect();
            if !lat.lattice(s + 1).contains(&d) {
                return Err(Error::HypothesisFailed("input is not a residual Witt basis".into()));
            }
        }
    }
    let basis = Mat::from_cols(&out, &f.zero());
    Ok(WittLift { basis, planes: pairs.len(), tail: singles.len(), form, iterations })
}

/// Conclusions (a)–(c) for a layered lift.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LayeredChecks {
    pub splits_lattice: bool,
    pub residual_agreement: bool,
    pub witt_up_to_scaling: bool,
}

/// Lift a lattice-adapted basis of a self-dual Λ to a Witt basis which
/// still splits Λ.  Pairing partners are matched through the residual
/// pairings Λ_s/Λ_{s+1} × Λ_{u−1−s}/Λ_{u−s}.
pub fn lift_witt_basis_general(h: &HermForm, lat: &LatticeSeq, input: &FMat) -> Result<(WittLift, LayeredChecks)> {
    let f = h.field();
    let n = h.dim();
    let e = lat.period();
    let (_, u) = lat.dual(h.gram())?;
    let u = u.ok_or_else(|| Error::HypothesisFailed("Λ is not self-dual".into()))?;
    let vecs: Vec<Vec<Elem>> = (0..n).map(|j| input.col(j)).collect();
    let lv: Vec<i64> = vecs.iter().map(|v| level(lat, v).unwrap_or(0)).collect();
    // the split given by the input must be Λ itself
    let input_lat = LatticeSeq::new(f, input.clone(), lv.clone(), e)?;
    if !input_lat.same_as(lat) {
        return Err(Error::HypothesisFailed("input basis does not split Λ".into()));
    }
    // excess over the forced valuation of h(Λ_s, Λ_t) ⊆ p^{⌈(s+t−u+1)/e⌉}
    let excess = |i: usize, j: usize| -> Option<i64> {
        let v = h.eval(&vecs[i], &vecs[j]).valuation()?;
        Some(v - crate::lattices::ceil_div(lv[i] + lv[j] - u + 1, e))
    };
    let paired = |i: usize, j: usize| (lv[i] + lv[j] - u + 1).rem_euclid(e) == 0 && excess(i, j) == Some(0);
    let mut free: Vec<usize> = (0..n).collect();
    let mut pairs = vec![];
    let mut singles = vec![];
    while let Some(&i) = free.first() {
        if paired(i, i) {
            singles.push(i);
            free.remove(0);
            continue;
        }
        let Some(pos) = free.iter().skip(1).position(|&j| paired(i, j)) else {
            return Err(Error::HypothesisFailed("no residual pairing partner".into()));
        };
        let j = free[pos + 1];
        pairs.push((i, j));
        free.retain(|&k| k != i && k != j);
    }
    // singles first so that pairs see anisotropic-orthogonal vectors
    let (out, iterations) = refine_singles_then_pairs(h, &vecs, &pairs, &singles, budget(f, e))?;
    let mut order = vec![];
    for &(i, j) in &pairs {
        order.push(i);
        order.push(j);
    }
    order.extend(singles.iter().cloned());
    let cols: Vec<Vec<Elem>> = order.iter().map(|&k| out[k].clone()).collect();
    let basis = Mat::from_cols(&cols, &f.zero());
    let lv2: Vec<i64> = order.iter().map(|&k| lv[k]).collect();
    let splits = LatticeSeq::new(f, basis.clone(), lv2, e).map(|l| l.same_as(lat)).unwrap_or(false);
    let residual = order.iter().all(|&k| {
        let d: Vec<Elem> = vecs[k].iter().zip(&out[k]).map(|(a, b)| a.sub(b)).collect();
        lat.lattice(lv[k] + 1).contains(&d)
    });
    let g = h.transport(&basis);
    let mut witt = true;
    for a in 0..n {
        for b in 0..n {
            let partner = a < 2 * pairs.len() && b < 2 * pairs.len() && a / 2 == b / 2 && a != b;
            let diag = a == b && a >= 2 * pairs.len();
            if !partner && !diag && !g.get(a, b).is_zero() {
                witt = false;
            }
        }
    }
    let checks = LayeredChecks { splits_lattice: splits, residual_agreement: residual, witt_up_to_scaling: witt };
    let planes = pairs.len();
    let tail = singles.len();
    Ok((WittLift { basis, planes, tail, form: h.clone(), iterations }, checks))
}

fn refine_singles_then_pairs(h: &HermForm, vecs: &[Vec<Elem>], pairs: &[(usize, usize)], singles: &[usize], iters: usize) -> Result<(Vec<Vec<Elem>>, usize)> {
    let (v, _) = refine_witt(h, vecs, &[], singles, false, iters)?;
    let mut v = v;
    // re-project pair vectors off the singles is already done; now pairs
    let (w, k) = refine_witt(h, &v, pairs, &[], false, iters)?;
    v = w;
    Ok((v, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{FieldSpec, StepKind};

    fn q3() -> Field {
        Field::qp(3, 24).unwrap()
    }

    #[test]
    fn idempotent_scalar_and_matrix() {
        let f = q3();
        let a = fmat::from_ints(&f, &[&[4]]);
        let nu = |x: &FMat| fmat::min_val(x);
        let l = lift_idempotent(&a, 1, &nu, None, budget(&f, 1)).unwrap();
        assert!(l.value.eq_approx(&fmat::from_ints(&f, &[&[1]])));
        assert!(l.doubling_holds(1));
        let a = fmat::from_ints(&f, &[&[4, 0], &[0, 0]]);
        let sig = |x: &FMat| Ok(x.transpose());
        let l = lift_idempotent(&a, 1, &nu, Some(&sig), budget(&f, 1)).unwrap();
        assert!(l.value.eq_approx(&fmat::from_ints(&f, &[&[1, 0], &[0, 0]])));
        let bad = fmat::from_ints(&f, &[&[2]]);
        assert_eq!(lift_idempotent(&bad, 1, &nu, None, 8).unwrap_err(), Error::NotApproxIdempotent);
    }

    #[test]
    fn cayley_inverse_pair() {
        let f = q3();
        let h = HermForm::new(&f, 1, fmat::identity(&f, 2)).unwrap();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let v = fmat::from_ints(&f, &[&[0, 3], &[-3, 0]]);
        let g = cayley(&h, &lat, &v).unwrap();
        let gi = cayley(&h, &lat, &v.neg()).unwrap();
        assert!(g.mul(&gi).eq_approx(&fmat::identity(&f, 2)));
        assert!(cayley(&h, &lat, &fmat::zeros(&f, 2, 2)).unwrap().eq_approx(&fmat::identity(&f, 2)));
        let sym = fmat::from_ints(&f, &[&[3, 0], &[0, 0]]);
        assert_eq!(cayley(&h, &lat, &sym).unwrap_err(), Error::NotSkew);
    }

    #[test]
    fn lift_isometry_roundtrip() {
        let f = q3();
        let g0 = fmat::from_ints(&f, &[&[1, 1], &[0, 1]]);
        let h = HermForm::new(&f, 1, fmat::from_ints(&f, &[&[1, 0], &[0, 2]])).unwrap();
        let h2 = HermForm::new(&f, 1, fmat::star(&g0.inverse().unwrap()).mul(h.gram()).mul(&g0.inverse().unwrap())).unwrap();
        assert!(h.is_isometry_to(&h2, &g0));
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let lat2 = lat.clone();
        let pert = fmat::identity(&f, 2).add(&fmat::from_ints(&f, &[&[3, 9], &[-6, 3]]));
        let fmap = g0.mul(&pert);
        let d = ResidualIsometryData { h: h.clone(), lat: lat.clone(), h2: h2.clone(), lat2, f: fmap };
        let c = lift_isometry(&d).unwrap();
        assert!(c.ok());
        let bad = ResidualIsometryData { f: g0.mul(&fmat::from_ints(&f, &[&[1, 1], &[0, 1]])), ..d };
        assert!(matches!(lift_isometry(&bad).unwrap_err(), Error::HypothesisFailed(_)));
    }

    #[test]
    fn twist_isometry_recovers() {
        let f = q3();
        let h = HermForm::new(&f, 1, fmat::identity(&f, 2)).unwrap();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let a1 = fmat::from_ints(&f, &[&[1, 0], &[0, 2]]);
        let a2 = a1.mul(&fmat::identity(&f, 2).add(&fmat::from_ints(&f, &[&[3, 0], &[0, 9]])));
        let u = twist_isometry(&h, &lat, &a1, &a2, 1).unwrap();
        assert!(fmat::star(&u).mul(&a2).mul(&u).eq_approx(&a1));
        let far = a1.scale(&f.int(2));
        assert!(twist_isometry(&h, &lat, &a1, &far, 1).is_err());
    }

    #[test]
    fn witt_block_case_one_refinement() {
        let f = q3();
        let h = HermForm::new(&f, 1, fmat::from_ints(&f, &[&[0, 1], &[1, 0]])).unwrap();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let x = vec![f.one(), f.int(3)];
        let y = vec![f.int(9), f.one()];
        let w = lift_witt_basis_block(&h, &lat, WittCase::Shifted, &ResidualWitt { pairs: vec![(x, y)], tail: vec![] }).unwrap();
        let g = h.transport(&w.basis);
        assert!(g.eq_approx(&fmat::from_ints(&f, &[&[0, 1], &[1, 0]])));
        assert!(w.iterations > 0);
        assert!(matches!(lift_witt_basis_block(&h, &lat, WittCase::SelfDual, &ResidualWitt { pairs: vec![], tail: vec![] }), Err(Error::CaseHypothesisFailed(_))));
    }

    #[test]
    fn witt_block_period_two() {
        let f = q3();
        // hyperbolic plane with Λ_0 = o ⊕ p, Λ_1 = p ⊕ p: self-dual with u = 0
        let h = HermForm::new(&f, 1, fmat::from_ints(&f, &[&[0, 1], &[1, 0]])).unwrap();
        let lat = LatticeSeq::new(&f, fmat::from_ints(&f, &[&[1, 0], &[0, 3]]), vec![0, 1], 2).unwrap();
        assert_eq!(lat.dual(h.gram()).unwrap().1, Some(0));
        let x = vec![f.one(), f.int(3)];
        let y = vec![f.int(3), f.one()];
        let w = lift_witt_basis_block(&h, &lat, WittCase::PeriodTwo, &ResidualWitt { pairs: vec![(x, y)], tail: vec![] }).unwrap();
        let x = w.basis.col(0);
        let y = w.basis.col(1);
        assert!(h.eval(&x, &x).is_zero());
        assert!(lat.lattice(-1).contains(&y) && !lat.lattice(0).contains(&y));
    }

    #[test]
    fn layered_symplectic_period_two() {
        let f = q3();
        let j = fmat::from_ints(&f, &[&[0, 1, 0, 0], &[-1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, -1, 0]]);
        let h = HermForm::new(&f, -1, j).unwrap();
        let lat = LatticeSeq::standard(&f, vec![0, 1, 0, 1], 2).unwrap();
        let p = fmat::from_ints(&f, &[&[1, 0, 0, 0], &[3, 1, 0, 0], &[0, 0, 1, 0], &[0, 3, 3, 1]]);
        let (w, c) = lift_witt_basis_general(&h, &lat, &p).unwrap();
        assert_eq!(w.planes, 2);
        assert!(c.splits_lattice && c.residual_agreement && c.witt_up_to_scaling, "{c:?}");
    }

    #[test]
    fn skew_hermitian_cayley() {
        let spec = FieldSpec::qp(3).step(StepKind::Eisenstein, &[-3, 0, 1]).conjugate(None);
        let f = Field::new(&spec, Some(20)).unwrap();
        let one = f.one();
        let mut g = fmat::zeros(&f, 2, 2);
        g.set(0, 1, one.clone());
        g.set(1, 0, one.neg());
        let h = HermForm::new(&f, -1, g).unwrap();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        // skew for σ: x with σ(x) = −x
        let pi = f.pi();
        let x = fmat::diag(&f, &[pi.clone(), pi.rho()]);
        let v = x.sub(&h.adjoint(&x).unwrap());
        let c = cayley(&h, &lat, &v).unwrap();
        assert!(h.is_isometry(&c));
    }
}
