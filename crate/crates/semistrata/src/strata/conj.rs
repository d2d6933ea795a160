//! Intertwining certificates, matching of minimal semisimple strata and
//! conjugation over Ũ(Λ).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::arith::factor::poly_key;
use crate::arith::fmat::{self, FMat};
use crate::arith::{Elem, Field, Mat};
use crate::cert::Certificate;
use crate::error::{Error, Result};
use crate::forms::HermForm;
use crate::lattices::{LatticeSeq, MatrixLattice};
use crate::lifting::cayley;
use crate::strata::centralizer::{a_beta, tame_corestriction};
use crate::strata::split::{minimal_invariants, split_stratum, SplitStratum};
use crate::strata::{stratum_invariants, Stratum};

fn val_json(v: Option<i64>) -> Value {
    v.map_or(Value::Null, |x| json!(x))
}

fn conjugate_lattice(l: &MatrixLattice, n: usize, g: &FMat, gi: &FMat) -> Result<MatrixLattice> {
    let f = l.field().clone();
    l.image(n * n, |v| fmat::flatten(&g.mul(&fmat::unflatten(&f, n, v)).mul(gi)))
}

/// Decide g β g⁻¹ − β′ ∈ g a_{−r} g⁻¹ + a′_{−r′}; with a form, also g ∈ G.
pub fn verify_intertwiner(g: &FMat, d: &Stratum, d2: &Stratum, herm: Option<&HermForm>) -> Result<Certificate> {
    let n = d.dim();
    let mut c = Certificate::new(g.clone());
    if d2.dim() != n || g.rows != n || !g.is_square() {
        return Err(Error::ContextMismatch);
    }
    let gi = match g.inverse() {
        Ok(x) => x,
        Err(_) => {
            c.push("invertible", false, Value::Null);
            return Ok(c);
        }
    };
    c.push("invertible", true, Value::Null);
    let x = g.mul(&d.beta).mul(&gi).sub(&d2.beta);
    let target = conjugate_lattice(&d.lat.filtration(-d.r), n, g, &gi)?.sum(&d2.lat.filtration(-d2.r))?;
    let meets = target.contains_matrix(&x);
    c.push(
        "coset_meets",
        meets,
        json!({"nu_difference": val_json(d2.lat.nu(&x)), "r": d.r, "r_prime": d2.r}),
    );
    if let Some(h) = herm {
        c.push("isometry", h.is_isometry(g), Value::Null);
    }
    Ok(c)
}

/// u Λ = Λ, u β u⁻¹ ≡ β′ modulo a_{−r}; with a form, also u ∈ G.
pub fn verify_conjugator(u: &FMat, d: &Stratum, d2: &Stratum, herm: Option<&HermForm>) -> Result<Certificate> {
    let mut c = verify_intertwiner(u, d, d2, herm)?;
    if !c.ok() {
        return Ok(c);
    }
    let ui = u.inverse()?;
    let nu_u = d.lat.nu(u);
    let nu_ui = d.lat.nu(&ui);
    let unit = nu_u.map_or(false, |v| v >= 0) && nu_ui.map_or(false, |v| v >= 0);
    c.push("unit_of_a0", unit, json!({"nu_u": val_json(nu_u), "nu_u_inv": val_json(nu_ui)}));
    let same = d.lat.same_as(&d2.lat) && d.q == d2.q && d.r == d2.r;
    let diff = u.mul(&d.beta).mul(&ui).sub(&d2.beta);
    let eq = same && d.lat.contains_in_filtration(&diff, -d.r);
    c.push("equivalent", eq, json!({"nu_difference": val_json(d.lat.nu(&diff)), "r": d.r}));
    Ok(c)
}

/// Re-run the checks named in a serialized certificate.
pub fn reverify(g: &FMat, names: &[String], d: &Stratum, d2: &Stratum) -> Result<Certificate> {
    let herm = if names.iter().any(|s| s == "isometry") { d.herm.as_ref() } else { None };
    if names.iter().any(|s| s == "unit_of_a0" || s == "equivalent") {
        verify_conjugator(g, d, d2, herm)
    } else {
        verify_intertwiner(g, d, d2, herm)
    }
}

#[derive(Clone, Debug)]
pub struct MatchingResult {
    pub zeta: Vec<usize>,
    pub dims: Vec<(usize, usize)>,
    pub profiles: Vec<(Vec<usize>, Vec<usize>)>,
    pub condition: bool,
    pub intertwiner: Option<Certificate>,
    pub split: SplitStratum,
    pub split2: SplitStratum,
}

impl MatchingResult {
    pub fn profile_report(&self) -> String {
        self.profiles
            .iter()
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (a, b))| format!("block {i}: {} vs {}", fmt_profile(a), fmt_profile(b)))
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "zeta": self.zeta,
            "dims": self.dims,
            "profiles": self.profiles.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
            "condition": self.condition,
            "intertwiner": self.intertwiner.as_ref().map(|c| c.to_json()),
            "intertwiner_ok": self.intertwiner.as_ref().map(|c| c.ok()),
        })
    }
}

pub fn fmt_profile(p: &[usize]) -> String {
    format!("({})", p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

fn random_combination(f: &Field, rows: &[Vec<Elem>], rng: &mut ChaCha8Rng) -> Vec<Elem> {
    let p = f.p() as i64;
    let len = rows.first().map_or(0, |r| r.len());
    let mut out = vec![f.zero(); len];
    for r in rows {
        let c = f.int(rng.gen_range(0..p));
        for (o, x) in out.iter_mut().zip(r) {
            *o = o.add(&x.padded().mul(&c));
        }
    }
    out
}

/// The F-linear solutions of x β = β′ x.
fn exact_intertwiners(b: &FMat, b2: &FMat) -> Result<Vec<FMat>> {
    let f = b.get(0, 0).field().clone();
    let n = b.rows;
    let cols: Vec<Vec<Elem>> = (0..n * n)
        .map(|c| {
            let u = fmat::unit(&f, n, c / n, c % n);
            fmat::flatten(&u.mul(b).sub(&b2.mul(&u)))
        })
        .collect();
    let k = Mat::from_cols(&cols, &f.zero()).kernel()?;
    Ok((0..k.cols).map(|c| fmat::unflatten(&f, n, &k.col(c))).collect())
}

/// {x ∈ a_0 : x β − β′ x ∈ a_{−r}}.
fn residual_solutions(d: &Stratum, d2: &Stratum) -> Result<MatrixLattice> {
    let f = d.field().clone();
    let n = d.dim();
    d.lat.filtration(0).preimage(&d.lat.filtration(-d.r), |v| {
        let x = fmat::unflatten(&f, n, v);
        fmat::flatten(&x.mul(&d.beta).sub(&d2.beta.mul(&x)))
    })
}

const TRIES: usize = 64;

pub fn match_minimal(d: &Stratum, d2: &Stratum, seed: u64) -> Result<MatchingResult> {
    if d.period() != d2.period() || d.dim() != d2.dim() {
        return Err(Error::ContextMismatch);
    }
    let (z1, z2) = (d.is_zero(), d2.is_zero());
    if z1 != z2 {
        return Err(Error::NotIntertwining("a zero stratum against a fundamental one at the same level".into()));
    }
    let a1 = stratum_invariants(d)?;
    let a2 = stratum_invariants(d2)?;
    if !z1 && (a1.level != a2.level) {
        return Err(Error::NotIntertwining(format!("levels {}/{} and {}/{}", a1.level.0, a1.level.1, a2.level.0, a2.level.1)));
    }
    if !z1 && !a1.phi.sub(&a2.phi).is_zero() {
        return Err(Error::NotIntertwining("characteristic polynomials differ".into()));
    }
    let s1 = split_stratum(d)?;
    let s2 = split_stratum(d2)?;
    for b in s1.blocks.iter().chain(s2.blocks.iter()) {
        if !b.stratum.is_zero() && b.stratum.r == b.stratum.q - 1 && !minimal_invariants(&b.stratum)?.minimal {
            return Err(Error::HypothesisFailed("a block is not minimal".into()));
        }
    }
    if s1.blocks.len() != s2.blocks.len() {
        return Err(Error::NotIntertwining("different numbers of blocks".into()));
    }
    let key = |b: &crate::strata::split::Block| b.factor.as_ref().map(|(f, m)| (poly_key(f), *m));
    let mut zeta = vec![];
    for b in &s1.blocks {
        let j = s2
            .blocks
            .iter()
            .position(|c| key(c) == key(b))
            .ok_or_else(|| Error::NotIntertwining("primary factors differ".into()))?;
        zeta.push(j);
    }
    let dims: Vec<(usize, usize)> = zeta.iter().enumerate().map(|(i, &j)| (s1.blocks[i].dim(), s2.blocks[j].dim())).collect();
    if dims.iter().any(|(a, b)| a != b) {
        return Err(Error::NotIntertwining("matched blocks have different dimensions".into()));
    }
    let profiles: Vec<(Vec<usize>, Vec<usize>)> =
        zeta.iter().enumerate().map(|(i, &j)| (s1.blocks[i].profile(), s2.blocks[j].profile())).collect();
    let condition = profiles.iter().all(|(a, b)| a == b);
    let intertwiner = find_intertwiner(d, d2, seed)?;
    Ok(MatchingResult { zeta, dims, profiles, condition, intertwiner, split: s1, split2: s2 })
}

fn find_intertwiner(d: &Stratum, d2: &Stratum, seed: u64) -> Result<Option<Certificate>> {
    let f = d.field().clone();
    let herm = d.herm.as_ref();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exact: Vec<Vec<Elem>> = exact_intertwiners(&d.beta, &d2.beta)?.iter().map(fmat::flatten).collect();
    let mut pools = vec![];
    if !exact.is_empty() {
        pools.push(exact);
    }
    if d.lat.same_as(&d2.lat) {
        pools.push(residual_solutions(d, d2)?.rows().to_vec());
    }
    for pool in pools {
        for _ in 0..TRIES {
            let g = fmat::unflatten(&f, d.dim(), &random_combination(&f, &pool, &mut rng));
            if g.det()?.is_zero() {
                continue;
            }
            let c = verify_intertwiner(&g, d, d2, herm)?;
            if c.ok() {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

/// u ∈ Ũ(Λ) with u β u⁻¹ ≡ β′ modulo a_{−r}.
pub fn conjugate_gl(d: &Stratum, d2: &Stratum, m: &MatchingResult, seed: u64) -> Result<Certificate> {
    if !d.lat.same_as(&d2.lat) || d.q != d2.q || d.r != d2.r {
        return Err(Error::HypothesisFailed("strata must share Λ, q and r".into()));
    }
    if !m.condition {
        return Err(Error::ConditionFails(m.profile_report()));
    }
    let f = d.field().clone();
    let n = d.dim();
    let one = fmat::identity(&f, n);
    if d.lat.contains_in_filtration(&d.beta.sub(&d2.beta), -d.r) {
        return verify_conjugator(&one, d, d2, None);
    }
    let s = residual_solutions(d, d2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..TRIES {
        let u = fmat::unflatten(&f, n, &random_combination(&f, s.rows(), &mut rng));
        let ui = match u.inverse() {
            Ok(x) => x,
            Err(_) => continue,
        };
        if d.lat.nu(&ui).map_or(true, |v| v < 0) {
            continue;
        }
        let c = verify_conjugator(&u, d, d2, None)?;
        if c.ok() {
            return Ok(c);
        }
    }
    Err(Error::PrecisionExhausted("no unit found among the residual solutions".into()))
}

/// (1 + w′, 1 + v) with (1 + w′)(β + a′)(1 + w′)⁻¹ ≡ (1 + v)(β + a)(1 + v)⁻¹
/// modulo a_{1−r}; w′ = 0.
pub fn solve_adjustment(beta: &FMat, lat: &LatticeSeq, a: &FMat, a2: &FMat, r: i64, herm: Option<&HermForm>) -> Result<(FMat, FMat)> {
    let f = lat.field().clone();
    let n = lat.dim();
    let one = fmat::identity(&f, n);
    let d = a.sub(a2);
    if d.is_zero() {
        return Ok((one.clone(), one));
    }
    let s = tame_corestriction(beta, &[lat.clone()], herm)?;
    let sd = s.apply(&d);
    if !lat.contains_in_filtration(&sd, 1 - r) {
        return Err(Error::HypothesisFailed("tame corestrictions differ".into()));
    }
    let rhs = fmat::flatten(&d.sub(&sd));
    let cols: Vec<Vec<Elem>> = (0..n * n).map(|c| fmat::flatten(&a_beta(beta, &fmat::unit(&f, n, c / n, c % n)))).collect();
    let m = Mat::from_cols(&cols, &f.zero());
    let v = fmat::unflatten(&f, n, &m.solve(&rhs)?.ok_or_else(|| Error::HypothesisFailed("no a_β preimage".into()))?);
    let g = match herm {
        None => one.add(&v),
        Some(h) => {
            let sk = v.sub(&h.adjoint(&v)?).scale(&f.rational(1, 2)?);
            cayley(h, lat, &sk)?
        }
    };
    let lhs = g.mul(&beta.add(a)).mul(&g.inverse()?);
    if !lat.contains_in_filtration(&lhs.sub(&beta.add(a2)), 1 - r) {
        return Err(Error::HypothesisFailed("congruence fails after adjustment".into()));
    }
    Ok((one, g))
}

/// g ∈ 1 + a_1 with g 1′^{τ(i)} g⁻¹ = 1^i.
pub fn equivalent_strata_align(d: &Stratum, d2: &Stratum, idems: &[FMat], idems2: &[FMat]) -> Result<(FMat, Vec<usize>)> {
    if !d.equivalent(d2) {
        return Err(Error::NotEquivalent("strata are not equivalent".into()));
    }
    if idems.len() != idems2.len() {
        return Err(Error::NotEquivalent("idempotent families have different sizes".into()));
    }
    let f = d.field().clone();
    let n = d.dim();
    let mut tau = vec![];
    for e in idems {
        let j = idems2
            .iter()
            .position(|e2| d.lat.contains_in_filtration(&e.sub(e2), 1))
            .ok_or_else(|| Error::NotEquivalent("idempotents do not match modulo a_1".into()))?;
        tau.push(j);
    }
    let mut g = fmat::zeros(&f, n, n);
    for (i, e) in idems.iter().enumerate() {
        g = g.add(&e.mul(&idems2[tau[i]]));
    }
    let gi = g.inverse()?;
    let ok = d.lat.contains_in_filtration(&g.sub(&fmat::identity(&f, n)), 1)
        && idems.iter().enumerate().all(|(i, e)| g.mul(&idems2[tau[i]]).mul(&gi).eq_approx(e));
    if !ok {
        return Err(Error::PrecisionExhausted("alignment failed its checks".into()));
    }
    Ok((g, tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strata::fixtures::*;

    fn swap(f: &Field) -> FMat {
        fmat::from_ints(f, &[&[0, 0, 1, 0], &[0, 0, 0, 1], &[1, 0, 0, 0], &[0, 1, 0, 0]])
    }

    #[test]
    fn gl_example_intertwines_by_block_swap() {
        let (s, t) = gl_pair();
        let g = swap(s.field());
        assert!(g.mul(&s.beta).mul(&g.inverse().unwrap()).eq_approx(&t.beta));
        assert!(verify_intertwiner(&g, &s, &t, None).unwrap().ok());
        let one = fmat::identity(s.field(), 4);
        assert!(!verify_intertwiner(&one, &s, &t, None).unwrap().ok());
        assert!(verify_intertwiner(&one, &s, &s, None).unwrap().ok());
    }

    #[test]
    fn gl_example_matching_fails_condition() {
        let (s, t) = gl_pair();
        let m = match_minimal(&s, &t, 1).unwrap();
        assert!(!m.condition);
        assert!(m.intertwiner.as_ref().unwrap().ok());
        let mut ps: Vec<_> = m.profiles.iter().map(|(a, b)| (fmt_profile(a), fmt_profile(b))).collect();
        ps.sort();
        assert_eq!(ps, vec![("(1,1)".to_string(), "(2,0)".to_string()), ("(2,0)".to_string(), "(1,1)".to_string())]);
        match conjugate_gl(&s, &t, &m, 1) {
            Err(Error::ConditionFails(msg)) => assert!(msg.contains("(2,0) vs (1,1)")),
            other => panic!("{other:?}"),
        }
        let same = match_minimal(&s, &s, 1).unwrap();
        assert_eq!(same.zeta, vec![0, 1]);
        assert!(same.condition);
    }

    #[test]
    fn distinct_phi_refused() {
        let (s, _) = gl_pair();
        let f = s.field().clone();
        let pi = f.pi_pow(-1);
        let b = fmat::diag(&f, &[pi.clone(), pi.clone(), pi.clone(), pi.neg()]);
        let t = s.with_beta(b).unwrap();
        assert!(matches!(match_minimal(&s, &t, 0), Err(Error::NotIntertwining(_))));
        assert!(!verify_intertwiner(&fmat::identity(&f, 4), &s, &t, None).unwrap().ok());
    }

    #[test]
    fn conjugate_roundtrip() {
        let (s, _) = gl_pair();
        let f = s.field().clone();
        let u0 = fmat::from_ints(&f, &[&[1, 1, 0, 0], &[2, 1, 0, 3], &[0, 0, 1, 0], &[0, 0, 1, 1]]);
        let t = s.with_beta(u0.mul(&s.beta).mul(&u0.inverse().unwrap())).unwrap();
        let m = match_minimal(&s, &t, 3).unwrap();
        assert!(m.condition);
        let c = conjugate_gl(&s, &t, &m, 3).unwrap();
        assert!(c.ok(), "{:?}", c.failed());
        let names: Vec<String> = c.checks.iter().map(|x| x.name.clone()).collect();
        assert!(reverify(&c.g, &names, &s, &t).unwrap().ok());
        let id = conjugate_gl(&s, &s, &match_minimal(&s, &s, 0).unwrap(), 0).unwrap();
        assert!(id.g.eq_approx(&fmat::identity(&f, 4)));
    }

    #[test]
    fn adjustment() {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let beta = fmat::from_ints(&f, &[&[0, 5], &[1, 0]]).scale(&f.pi_pow(-1));
        let z = fmat::zeros(&f, 2, 2);
        let (w, v) = solve_adjustment(&beta, &lat, &z, &z, 0, None).unwrap();
        assert!(w.eq_approx(&fmat::identity(&f, 2)) && v.eq_approx(&w));
        let x = fmat::from_ints(&f, &[&[0, 3], &[6, 3]]);
        let a2 = a_beta(&beta, &x);
        let (_, v) = solve_adjustment(&beta, &lat, &z, &a2, 0, None).unwrap();
        assert!(lat.contains_in_filtration(&v.sub(&fmat::identity(&f, 2)), 1));
    }

    #[test]
    fn align_perturbed_idempotents() {
        let (s, _) = gl_pair();
        let f = s.field().clone();
        let sp = split_stratum(&s).unwrap();
        let mut x = fmat::zeros(&f, 4, 4);
        x.set(0, 2, f.int(3));
        x.set(3, 1, f.int(1));
        assert!(s.lat.contains_in_filtration(&x, 1));
        let g0 = fmat::identity(&f, 4).add(&x);
        let g0i = g0.inverse().unwrap();
        let moved: Vec<FMat> = sp.idempotents.iter().rev().map(|e| g0.mul(e).mul(&g0i)).collect();
        let (g, tau) = equivalent_strata_align(&s, &s, &sp.idempotents, &moved).unwrap();
        assert_eq!(tau, vec![1, 0]);
        assert!(s.lat.contains_in_filtration(&g.sub(&fmat::identity(&f, 4)), 1));
        let (g, _) = equivalent_strata_align(&s, &s, &sp.idempotents, &sp.idempotents).unwrap();
        assert!(g.eq_approx(&fmat::identity(&f, 4)));
        assert!(matches!(
            equivalent_strata_align(&s, &s, &sp.idempotents, &sp.idempotents[..1]),
            Err(Error::NotEquivalent(_))
        ));
    }
}
