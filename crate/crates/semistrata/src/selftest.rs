//! The acceptance corpus, shared by `semistrata selftest` and the
//! integration tests.  Every instance is seeded.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::fmat::{self, FMat};
use crate::arith::{Elem, Field, FieldSpec, StepKind};
use crate::cert::Certificate;
use crate::error::{Error, Result};
use crate::forms::{HermForm, Lambda};
use crate::lattices::{LatticeSeq, MatrixLattice};
use crate::lifting::{budget, cayley, lift_idempotent, lift_isometry, twist_isometry, ResidualIsometryData};
use crate::strata::centralizer::{critical_exponent, descr_checks, tame_corestriction};
use crate::strata::classical::conjugate_classical;
use crate::strata::conj::{conjugate_gl, match_minimal, reverify, verify_intertwiner};
use crate::strata::examples::{gl_pair, gl_swap, skew_pair, skew_swap};
use crate::strata::graded::{analyze_fundamental, Graded, Verdict};
use crate::strata::split::split_stratum;
use crate::strata::{is_fundamental, Stratum};
use crate::witt::{trace_form, verify_trace_theorem, TraceMap, TraceSpec, WittTable};

pub const DEFAULT_PRECISION: u32 = 24;
pub const STABILITY_PRECISION: u32 = 48;
/// Largest tolerated share of PrecisionExhausted outcomes at the default
/// precision.
pub const MAX_EXHAUSTED_RATE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    pub fn parse(s: &str) -> Result<Profile> {
        match s {
            "quick" => Ok(Profile::Quick),
            "full" => Ok(Profile::Full),
            _ => Err(Error::Schema(format!("unknown selftest profile {s:?}"))),
        }
    }

    fn pick(self, quick: usize, full: usize) -> usize {
        match self {
            Profile::Quick => quick,
            Profile::Full => full,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    /// verdict of the checks alone
    pub ok: bool,
    /// `ok` and within the time limit
    pub pass: bool,
    pub detail: String,
    /// per-instance verdicts, compared across precisions
    pub verdicts: Vec<String>,
    pub seconds: f64,
    pub limit_seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {} ({}): {} [{:.1}s / {:.0}s]",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds,
            self.limit_seconds
        )
    }
}

type Found = (bool, String, Vec<String>);

pub const CRITERIA: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

pub fn run(profile: Profile, prec: u32) -> Vec<Outcome> {
    CRITERIA.iter().map(|&k| criterion(k, profile, prec)).collect()
}

pub fn criterion(id: u8, profile: Profile, prec: u32) -> Outcome {
    let t = Instant::now();
    let (name, limit, res): (&'static str, f64, Result<Found>) = match id {
        1 => ("witt structure", 10.0, witt_structure(prec)),
        2 => ("trace example", 5.0, trace_example(prec)),
        3 => ("maximal anisotropic element", 120.0, trace_theorem(prec)),
        4 => ("counterexamples", 20.0, counterexamples(prec)),
        5 => ("intertwining implies conjugacy", 600.0, roundtrips(profile, prec)),
        6 => ("fundamental criteria", 300.0, fundamental_cross_check(profile, prec)),
        7 => ("lifting", 120.0, lifting_suite(profile, prec)),
        8 => ("filtrations", 300.0, filtrations(profile, prec)),
        _ => ("unknown", 0.0, Err(Error::Schema(format!("no criterion {id}")))),
    };
    let seconds = t.elapsed().as_secs_f64();
    let (ok, detail, verdicts) = match res {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}"), vec![]),
    };
    let pass = ok && seconds <= limit;
    Outcome { id, name, ok, pass, detail, verdicts, seconds, limit_seconds: limit }
}

fn field(spec: FieldSpec, prec: u32) -> Result<Field> {
    Field::new(&spec, Some(prec))
}

fn quad(p: u64, ramified: bool, conj: bool) -> FieldSpec {
    let s = if ramified {
        FieldSpec::qp(p).step(StepKind::Eisenstein, &[-(p as i64), 0, 1])
    } else {
        FieldSpec::qp(p).step(StepKind::Unramified, &[-2, 0, 1])
    };
    if conj {
        s.conjugate(None)
    } else {
        s
    }
}

// ---------------------------------------------------------------- 1 to 3

/// Expected group from the residue field alone: −1 is a square iff
/// q ≡ 1 mod 4.
fn expected_witt(q: u64, rho: bool, eps: i32) -> (usize, &'static str) {
    let minus_one_square = q % 4 == 1;
    match (rho, eps, minus_one_square) {
        (false, -1, _) => (1, "trivial"),
        (true, _, true) => (4, "C2xC2"),
        (true, _, false) => (4, "C4"),
        (false, _, true) => (16, "C2xC2xC2xC2"),
        (false, _, false) => (16, "C4xC4"),
    }
}

fn witt_structure(prec: u32) -> Result<Found> {
    let mut ok = true;
    let mut verdicts = vec![];
    for p in [3u64, 5] {
        let cases = [
            (format!("Q{p}"), FieldSpec::qp(p), false, 1),
            (format!("Q{p}(sqrt2)/Q{p}"), quad(p, false, true), true, 2),
            (format!("Q{p}(sqrt{p})/Q{p}"), quad(p, true, true), true, 1),
        ];
        for (label, spec, rho, f_deg) in cases {
            let f = field(spec, prec)?;
            for eps in [1, -1] {
                let t = WittTable::new(&f, eps)?;
                let want = expected_witt(p.pow(f_deg), rho, eps);
                let got = (t.order(), t.structure());
                ok &= got.0 == want.0 && got.1 == want.1;
                verdicts.push(format!("{label} eps={eps}: {} {} exp {}", got.0, got.1, t.exponent()));
            }
        }
    }
    Ok((ok, format!("{} contexts", verdicts.len()), verdicts))
}

fn trace_example(prec: u32) -> Result<Found> {
    let spec = FieldSpec::qp(3).step(StepKind::Unramified, &[-5, 0, 1]).step(StepKind::Eisenstein, &[-3, 0, 1]).conjugate(Some(0));
    let e = field(spec, prec)?;
    let ts = TraceSpec::new(&e, 1, Lambda::Trace)?;
    let f = ts.f.clone();
    let w = WittTable::new(&f, 1)?;
    let h = HermForm::new(&e, 1, fmat::diag(&e, &[e.generator(1)]))?;
    let t = trace_form(&ts, &h)?;
    let h1 = HermForm::new(&e, 1, fmat::identity(&e, 1))?;
    let t1 = trace_form(&ts, &h1)?;
    let g_ok = t.gram().eq_approx(&fmat::from_ints(&f, &[&[0, 6], &[6, 0]]));
    let g1_ok = t1.gram().eq_approx(&fmat::from_ints(&f, &[&[2, 0], &[0, 6]]));
    let c = w.class_of(&t)?;
    let c1 = w.class_of(&t1)?;
    let ok = g_ok && g1_ok && c == 0 && c1 != 0;
    let verdicts = vec![format!("grams {g_ok} {g1_ok}"), format!("classes {c} {c1}")];
    Ok((ok, format!("Tr<(sqrt3)> = 0: {}, Tr<(1)> != 0: {}", c == 0, c1 != 0), verdicts))
}

fn trace_theorem(prec: u32) -> Result<Found> {
    let mut ok = true;
    let mut verdicts = vec![];
    let mut n = 0;
    for p in [3u64, 5] {
        for ram in [false, true] {
            for conj in [false, true] {
                let e = field(quad(p, ram, conj), prec)?;
                for eps in [1, -1] {
                    let r = verify_trace_theorem(&TraceSpec::new(&e, 0, Lambda::Trace)?, eps)?;
                    ok &= r.passed();
                    n += 1;
                    verdicts.push(format!("p={p} ram={ram} conj={conj} eps={eps}: {}", r.passed()));
                }
            }
        }
    }
    let cubic = field(FieldSpec::qp(5).step(StepKind::Eisenstein, &[-5, 0, 0, 1]), prec)?;
    let r = verify_trace_theorem(&TraceSpec::new(&cubic, 0, Lambda::Trace)?, 1)?;
    let inj = r.passed() && r.injective == Some(true);
    verdicts.push(format!("cubic injective: {inj}"));
    let e = field(quad(3, true, false), prec)?;
    let m = TraceMap::new(&TraceSpec::new(&e, 0, Lambda::Trace)?, 1)?;
    let k = m.kernel().len();
    verdicts.push(format!("quadratic kernel: {k}"));
    ok &= inj && k == 4;
    Ok((ok, format!("{n} specs, cubic injective {inj}, kernel size {k}"), verdicts))
}

// ---------------------------------------------------------------- 4

fn counterexamples(prec: u32) -> Result<Found> {
    let (s, t) = gl_pair(prec)?;
    let c = verify_intertwiner(&gl_swap(s.field()), &s, &t, None)?;
    let m = match_minimal(&s, &t, 1)?;
    let gl_msg = match conjugate_gl(&s, &t, &m, 1) {
        Err(Error::ConditionFails(msg)) => msg,
        Err(e) => format!("unexpected {e}"),
        Ok(_) => "conjugated".into(),
    };
    let gl_ok = c.ok() && !m.condition && gl_msg.contains("(2,0) vs (1,1)");

    let (s, t) = skew_pair(prec)?;
    let c2 = verify_intertwiner(&skew_swap(s.field()), &s, &t, s.herm.as_ref())?;
    let m2 = match_minimal(&s, &t, 1)?;
    let sk_msg = match conjugate_classical(&s, &t, &m2, 1) {
        Err(Error::ConditionFails(msg)) => msg,
        Err(e) => format!("unexpected {e}"),
        Ok(_) => "conjugated".into(),
    };
    let sk_ok = c2.ok() && !m2.condition && sk_msg.contains("(1,0,0,1) vs (0,1,1,0)");
    let verdicts = vec![format!("gl: {} / {gl_msg}", c.ok()), format!("skew: {} / {sk_msg}", c2.ok())];
    Ok((gl_ok && sk_ok, format!("general linear refused with [{gl_msg}]; skew refused with [{sk_msg}]"), verdicts))
}

// ---------------------------------------------------------------- generators

fn random_in(l: &MatrixLattice, n: usize, rng: &mut ChaCha8Rng) -> FMat {
    let f = l.field().clone();
    let p = f.p() as i64;
    let mut out = vec![f.zero(); n * n];
    for r in l.rows() {
        let c = f.int(rng.gen_range(-(p - 1)..p));
        for (o, x) in out.iter_mut().zip(r) {
            *o = o.add(&x.padded().mul(&c));
        }
    }
    fmat::unflatten(&f, n, &out)
}

fn is_unit_of(lat: &LatticeSeq, u: &FMat) -> bool {
    match u.inverse() {
        Ok(ui) => lat.contains_in_filtration(u, 0) && lat.contains_in_filtration(&ui, 0),
        Err(_) => false,
    }
}

fn random_unit(lat: &LatticeSeq, rng: &mut ChaCha8Rng) -> Result<FMat> {
    let a0 = lat.filtration(0);
    for _ in 0..200 {
        let u = random_in(&a0, lat.dim(), rng);
        if is_unit_of(lat, &u) {
            return Ok(u);
        }
    }
    Err(Error::Undecided("no random unit found".into()))
}

/// Cayley transform of the skew part of a random element of a_1.
pub fn random_u1(h: &HermForm, lat: &LatticeSeq, rng: &mut ChaCha8Rng) -> Result<FMat> {
    let f = h.field();
    let v = random_in(&lat.filtration(1), lat.dim(), rng);
    let sk = v.sub(&h.adjoint(&v)?).scale(&f.rational(1, 2)?);
    cayley(h, lat, &sk)
}

/// (1 + v)(1 − v)⁻¹ for the skew part v of a random element of a_0, when
/// 1 − v is a unit of a_0.
fn random_cayley0(h: &HermForm, lat: &LatticeSeq, rng: &mut ChaCha8Rng) -> Result<Option<FMat>> {
    let f = h.field();
    let one = fmat::identity(f, lat.dim());
    let v = random_in(&lat.filtration(0), lat.dim(), rng);
    let sk = v.sub(&h.adjoint(&v)?).scale(&f.rational(1, 2)?);
    let den = one.sub(&sk);
    if !is_unit_of(lat, &den) {
        return Ok(None);
    }
    let g = one.add(&sk).mul(&den.inverse()?);
    Ok(if h.is_isometry(&g) && is_unit_of(lat, &g) { Some(g) } else { None })
}

fn perm(f: &Field, p: &[usize]) -> FMat {
    let n = p.len();
    let mut m = fmat::zeros(f, n, n);
    for (j, &i) in p.iter().enumerate() {
        m.set(i, j, f.one());
    }
    m
}

/// A family of skew strata together with isometries of (h, Λ) that move
/// the residual picture.
struct SkewCase {
    s: Stratum,
    residual: Vec<FMat>,
}

impl SkewCase {
    fn new(s: Stratum, cands: Vec<FMat>) -> SkewCase {
        let h = s.herm.clone().unwrap();
        let residual = cands.into_iter().filter(|g| h.is_isometry(g) && is_unit_of(&s.lat, g)).collect();
        SkewCase { s, residual }
    }

    fn conjugate(&self, rng: &mut ChaCha8Rng) -> Result<(Stratum, FMat)> {
        let h = self.s.herm.as_ref().unwrap();
        let mut u = random_u1(h, &self.s.lat, rng)?;
        if let Some(g) = random_cayley0(h, &self.s.lat, rng)? {
            u = g.mul(&u);
        }
        for _ in 0..2 {
            if let Some(r) = self.residual.choose(rng) {
                u = r.mul(&u);
            }
        }
        let t = self.s.with_beta(u.mul(&self.s.beta).mul(&u.inverse()?))?;
        Ok((t, u))
    }
}

fn distinct_units(p: i64, k: usize, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let mut all: Vec<i64> = (1..p).collect();
    all.shuffle(rng);
    all.truncate(k);
    all
}

/// Partition of n coordinates into at most `k` consecutive nonempty runs.
fn runs(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let k = k.min(n).max(1);
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    cuts.truncate(k - 1);
    cuts.sort_unstable();
    let mut out = vec![];
    let mut last = 0;
    for c in cuts.into_iter().chain(std::iter::once(n)) {
        out.push(c - last);
        last = c;
    }
    out
}

/// A minimal semisimple stratum in GL_n built from scalar blocks and at most
/// one unramified quadratic block, on a period-1 lattice or a period-2 chain.
fn gl_case(f: &Field, n: usize, rng: &mut ChaCha8Rng) -> Result<Stratum> {
    let p = f.p() as i64;
    let chain = n >= 2 && rng.gen_bool(0.4);
    let (jumps, e) = if chain {
        let k = rng.gen_range(1..n);
        ((0..n).map(|i| if i < k { 0 } else { 1 }).collect::<Vec<i64>>(), 2)
    } else {
        (vec![0; n], 1)
    };
    let lat = LatticeSeq::standard(f, jumps.clone(), e)?;
    let pi = f.pi_pow(-1);
    let max_blocks = if p == 3 { 2 } else { 3 };
    let sizes = runs(n, rng.gen_range(2..=max_blocks), rng);
    let cs = distinct_units(p, sizes.len(), rng);
    let mut b = fmat::zeros(f, n, n);
    let mut at = 0;
    let mut used_quadratic = false;
    for (sz, c) in sizes.iter().zip(cs) {
        let quadratic = *sz == 2 && !used_quadratic && jumps[at] == jumps[at + 1] && rng.gen_bool(0.5);
        if quadratic {
            used_quadratic = true;
            b.set(at, at + 1, f.int(2).mul(&pi));
            b.set(at + 1, at, pi.clone());
        } else {
            for i in at..at + sz {
                b.set(i, i, f.int(c).mul(&pi));
            }
        }
        at += sz;
    }
    let q = -lat.nu(&b).ok_or_else(|| Error::Undecided("zero element".into()))?;
    Stratum::new(lat, q, q - 1, b, None)
}

/// Skew strata for a hermitian form over a quadratic extension with
/// conjugation; diagonal scalar blocks.
fn unitary_case(f: &Field, n: usize, rng: &mut ChaCha8Rng) -> Result<SkewCase> {
    let p = f.p() as i64;
    let lat = LatticeSeq::standard(f, vec![0; n], 1)?;
    let h = HermForm::new(f, 1, fmat::identity(f, n))?;
    let ramified = f.e() == 2;
    let unit = if ramified { f.one() } else { f.generator(0) };
    let scale = unit.mul(&f.pi_pow(-1));
    let sizes = runs(n, rng.gen_range(2..=3.min((p - 1) as usize)), rng);
    let cs = distinct_units(p, sizes.len(), rng);
    let mut d = vec![];
    for (sz, c) in sizes.iter().zip(cs) {
        for _ in 0..*sz {
            d.push(f.int(c).mul(&scale));
        }
    }
    let b = fmat::diag(f, &d);
    let q = -lat.nu(&b).unwrap();
    let s = Stratum::new(lat, q, q - 1, b, Some(h))?;
    let x = f.one().add(&f.generator(0));
    let zeta = x.div(&x.rho())?;
    let mut cands = vec![];
    for _ in 0..4 {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        cands.push(perm(f, &idx));
        let signs: Vec<Elem> = (0..n)
            .map(|_| match rng.gen_range(0..3) {
                0 => f.one(),
                1 => f.one().neg(),
                _ => zeta.clone(),
            })
            .collect();
        cands.push(fmat::diag(f, &signs));
    }
    Ok(SkewCase::new(s, cands))
}

/// The skew counterexample's stratum, moved around inside U(Λ).
fn skew_example_case(prec: u32) -> Result<SkewCase> {
    let (s, _) = skew_pair(prec)?;
    let f = s.field().clone();
    let t0 = fmat::diag(&f, &[f.int(2), f.one(), f.one(), f.int(2).inv()?]);
    let t1 = fmat::diag(&f, &[f.one().neg(), f.one(), f.one(), f.one().neg()]);
    Ok(SkewCase::new(s, vec![t0, t1]))
}

/// ε-hermitian hyperbolic form on F^{2k} with β = diag(c, −c)·π⁻¹, zero
/// blocks allowed.
fn paired_case(f: &Field, k: usize, eps: i32, rng: &mut ChaCha8Rng) -> Result<SkewCase> {
    let n = 2 * k;
    let mut g = fmat::zeros(f, n, n);
    for i in 0..k {
        g.set(i, k + i, f.one());
        g.set(k + i, i, f.int(eps as i64));
    }
    let h = HermForm::new(f, eps, g)?;
    let lat = LatticeSeq::standard(f, vec![0; n], 1)?;
    let p = f.p() as i64;
    let c = rng.gen_range(1..=(p - 1) / 2);
    let zeros = if k > 1 { rng.gen_range(0..k) } else { 0 };
    let mut d = vec![f.zero(); n];
    for i in zeros..k {
        d[i] = f.int(c).mul(&f.pi_pow(-1));
        d[k + i] = d[i].neg();
    }
    let b = fmat::diag(f, &d);
    let s = Stratum::new(lat, 1, 0, b, Some(h))?;
    let mut cands = vec![];
    for _ in 0..4 {
        let mut a = fmat::identity(f, k);
        for i in 0..k {
            for j in i + 1..k {
                a.set(i, j, f.int(rng.gen_range(-2..=2)));
            }
        }
        let mut idx: Vec<usize> = (0..k).collect();
        idx.shuffle(rng);
        let a = perm(f, &idx).mul(&a);
        let ait = a.inverse()?.transpose();
        let mut m = fmat::zeros(f, n, n);
        let mut sm = fmat::identity(f, n);
        for i in 0..k {
            for j in 0..k {
                m.set(i, j, a.get(i, j).clone());
                m.set(k + i, k + j, ait.get(i, j).clone());
                if i <= j {
                    let x = f.int(rng.gen_range(-2..=2));
                    let (xij, xji) = if eps == -1 { (x.clone(), x) } else if i == j { (f.zero(), f.zero()) } else { (x.clone(), x.neg()) };
                    sm.set(i, k + j, xij);
                    sm.set(j, k + i, xji);
                }
            }
        }
        cands.push(m);
        cands.push(sm);
    }
    Ok(SkewCase::new(s, cands))
}

/// Orthogonal strata with a non-scalar residual block of dimension two,
/// optionally next to a hyperbolic pair.
fn orthogonal_case(p: u64, prec: u32, with_pair: bool) -> Result<SkewCase> {
    let f = Field::qp(p as u32, prec)?;
    let (h0, b0) = if p == 3 {
        (fmat::identity(&f, 2), fmat::from_ints(&f, &[&[0, 1], &[-1, 0]]))
    } else {
        (fmat::diag(&f, &[f.one(), f.int(2)]), fmat::from_ints(&f, &[&[0, 2], &[-1, 0]]))
    };
    let pi = f.pi_pow(-1);
    let n = if with_pair { 4 } else { 2 };
    let mut g = fmat::zeros(&f, n, n);
    let mut b = fmat::zeros(&f, n, n);
    for i in 0..2 {
        for j in 0..2 {
            g.set(i, j, h0.get(i, j).clone());
            b.set(i, j, b0.get(i, j).mul(&pi));
        }
    }
    if with_pair {
        g.set(2, 3, f.one());
        g.set(3, 2, f.one());
        b.set(2, 2, pi.clone());
        b.set(3, 3, pi.neg());
    }
    let h = HermForm::new(&f, 1, g)?;
    let lat = LatticeSeq::standard(&f, vec![0; n], 1)?;
    let s = Stratum::new(lat, 1, 0, b, Some(h))?;
    let mut cands = vec![];
    let signs = [[1, 1], [1, -1], [-1, 1], [-1, -1]];
    for sg in signs {
        let mut m = fmat::identity(&f, n);
        m.set(0, 0, f.int(sg[0]));
        m.set(1, 1, f.int(sg[1]));
        cands.push(m.clone());
        if p == 3 {
            let mut sw = m.clone();
            sw.set(0, 0, f.zero());
            sw.set(1, 1, f.zero());
            sw.set(0, 1, f.int(sg[0]));
            sw.set(1, 0, f.int(sg[1]));
            cands.push(sw);
        }
    }
    if with_pair {
        let mut m = fmat::identity(&f, n);
        m.set(2, 2, f.int(2));
        m.set(3, 3, f.int(2).inv()?);
        cands.push(m);
    }
    Ok(SkewCase::new(s, cands))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    Gl,
    Unitary,
    SkewExample,
    Paired,
    Orthogonal,
}

fn family_plan(profile: Profile) -> Vec<(Family, usize)> {
    vec![
        (Family::Gl, profile.pick(10, 80)),
        (Family::Unitary, profile.pick(6, 44)),
        (Family::SkewExample, profile.pick(2, 6)),
        (Family::Paired, profile.pick(6, 40)),
        (Family::Orthogonal, profile.pick(6, 30)),
    ]
}

/// Instance `idx` of a family: a stratum and a conjugate of it by a known
/// element of Ũ(Λ) (resp. U(Λ)).
fn instance(fam: Family, idx: usize, prec: u32, fields: &mut HashMap<String, Field>) -> Result<(Stratum, Stratum)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0000 + 97 * idx as u64 + fam as u64);
    let p: u64 = if rng.gen_bool(0.5) { 3 } else { 5 };
    let mut get = |key: String, spec: FieldSpec| -> Result<Field> {
        if let Some(f) = fields.get(&key) {
            return Ok(f.clone());
        }
        let f = field(spec, prec)?;
        fields.insert(key, f.clone());
        Ok(f)
    };
    match fam {
        Family::Gl => {
            let f = get(format!("Q{p}"), FieldSpec::qp(p))?;
            let n = rng.gen_range(2..=6);
            let s = gl_case(&f, n, &mut rng)?;
            let u = random_unit(&s.lat, &mut rng)?;
            let t = s.with_beta(u.mul(&s.beta).mul(&u.inverse()?))?;
            Ok((s, t))
        }
        Family::Unitary => {
            let ram = rng.gen_bool(0.5);
            let f = get(format!("Q{p} quad {ram}"), quad(p, ram, true))?;
            let n = rng.gen_range(2..=4);
            let c = unitary_case(&f, n, &mut rng)?;
            let (t, _) = c.conjugate(&mut rng)?;
            Ok((c.s, t))
        }
        Family::SkewExample => {
            let c = skew_example_case(prec)?;
            let (t, _) = c.conjugate(&mut rng)?;
            Ok((c.s, t))
        }
        Family::Paired => {
            let f = get(format!("Q{p}"), FieldSpec::qp(p))?;
            let k = rng.gen_range(1..=3);
            let eps = if rng.gen_bool(0.5) { 1 } else { -1 };
            let c = paired_case(&f, k, eps, &mut rng)?;
            let (t, _) = c.conjugate(&mut rng)?;
            Ok((c.s, t))
        }
        Family::Orthogonal => {
            let c = orthogonal_case(p, prec, rng.gen_bool(0.4))?;
            let (t, _) = c.conjugate(&mut rng)?;
            Ok((c.s, t))
        }
    }
}

/// Recover a conjugator for an instance and re-check it from its
/// serialized form.
/// A seeded general linear pair (Δ, uΔu⁻¹) from the roundtrip generator.
pub fn generated_pair(idx: usize, prec: u32) -> Result<(Stratum, Stratum)> {
    instance(Family::Gl, idx, prec, &mut HashMap::new())
}

pub fn recover(s: &Stratum, t: &Stratum, seed: u64) -> Result<Certificate> {
    let m = match_minimal(s, t, seed)?;
    let c = match &s.herm {
        Some(_) => conjugate_classical(s, t, &m, seed)?,
        None => conjugate_gl(s, t, &m, seed)?,
    };
    let json = c.to_json();
    let g = Certificate::g_from_json(s.field(), &json)?;
    let names: Vec<String> = c.checks.iter().map(|x| x.name.clone()).collect();
    let again = reverify(&g, &names, s, t)?;
    let in_group = is_unit_of(&s.lat, &g) && s.herm.as_ref().map_or(true, |h| h.is_isometry(&g));
    if !c.ok() || !again.ok() || !in_group {
        return Err(Error::Rejected(format!("recovered element fails {:?}", again.failed())));
    }
    Ok(c)
}

fn roundtrips(profile: Profile, prec: u32) -> Result<Found> {
    let mut fields = HashMap::new();
    let mut verdicts = vec![];
    let (mut total, mut ok, mut exhausted, mut bad, mut moved) = (0usize, 0usize, 0usize, 0usize, 0usize);
    let mut first_bad = None;
    for (fam, count) in family_plan(profile) {
        for idx in 0..count {
            let (s, t) = instance(fam, idx, prec, &mut fields)?;
            total += 1;
            moved += !s.equivalent(&t) as usize;
            let v = match recover(&s, &t, idx as u64) {
                Ok(_) => {
                    ok += 1;
                    "recovered".to_string()
                }
                Err(Error::PrecisionExhausted(_)) => {
                    exhausted += 1;
                    "exhausted".to_string()
                }
                Err(e) => {
                    bad += 1;
                    first_bad.get_or_insert(format!("{fam:?} #{idx}: {e}"));
                    format!("failed: {e}")
                }
            };
            let tag = if s.equivalent(&t) { "equivalent" } else { "moved" };
            verdicts.push(format!("{fam:?} #{idx} dim {} {tag}: {v}", s.dim()));
        }
    }
    let rate = exhausted as f64 / total as f64;
    let limit = if prec >= STABILITY_PRECISION { 0.0 } else { MAX_EXHAUSTED_RATE };
    let pass = total >= 1 && bad == 0 && rate <= limit;
    let mut detail = format!("{ok}/{total} recovered ({moved} not already equivalent), {exhausted} precision-exhausted ({:.1}%, limit {:.0}%)", 100.0 * rate, 100.0 * limit);
    if let Some(b) = first_bad {
        detail.push_str(&format!("; first failure {b}"));
    }
    Ok((pass, detail, verdicts))
}

// ---------------------------------------------------------------- 6

/// Graded nilpotency of sampled coset elements: y^N ∈ a_{1−Nq} with
/// N = n·e.  Samples that disagree make the oracle undecided.
pub fn nilpotent_coset(s: &Stratum, rng: &mut ChaCha8Rng, samples: usize) -> Result<bool> {
    let nn = (s.dim() as i64 * s.period()) as u32;
    let cos = s.lat.filtration(1 - s.q);
    let mut verdict = None;
    for k in 0..samples {
        let y = if k == 0 { s.beta.clone() } else { s.beta.add(&random_in(&cos, s.dim(), rng)) };
        let nil = s.lat.contains_in_filtration(&y.pow(nn), 1 - nn as i64 * s.q);
        if verdict.map_or(false, |v| v != nil) {
            return Err(Error::Undecided("coset samples disagree".into()));
        }
        verdict = Some(nil);
    }
    Ok(verdict.unwrap())
}

struct Grid {
    lat: LatticeSeq,
    label: &'static str,
}

fn grids(f: &Field) -> Result<Vec<Grid>> {
    Ok(vec![
        Grid { lat: LatticeSeq::standard(f, vec![0], 1)?, label: "o" },
        Grid { lat: LatticeSeq::standard(f, vec![0, 0], 1)?, label: "o+o" },
        Grid { lat: LatticeSeq::standard(f, vec![0, 1], 2)?, label: "chain(0,1)" },
    ])
}

fn fundamental_cross_check(profile: Profile, prec: u32) -> Result<Found> {
    let f = Field::qp(3, prec)?;
    let height: i64 = profile.pick(2, 9) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0usize;
    let mut disagree = vec![];
    let mut classes: HashMap<(usize, i64, Vec<u64>), (bool, bool)> = HashMap::new();
    let mut verdicts = vec![];
    for (gi, g) in grids(&f)?.iter().enumerate() {
        let n = g.lat.dim();
        let vals: Vec<i64> = (-height..=height).collect();
        let total = vals.len().pow((n * n) as u32);
        for k in 1..=2i64 {
            for code in 0..total {
                let mut c = code;
                let mut m = fmat::zeros(&f, n, n);
                for i in 0..n * n {
                    m.set(i / n, i % n, f.int(vals[c % vals.len()]));
                    c /= vals.len();
                }
                let b = m.scale(&f.pi_pow(-k));
                let q = match g.lat.nu(&b) {
                    Some(v) if (1..=2).contains(&-v) => -v,
                    _ => continue,
                };
                let s = Stratum::new(g.lat.clone(), q, q - 1, b, None)?;
                let phi = is_fundamental(&s)?;
                let gr = Graded::new(&g.lat, -q);
                let key: Vec<u64> = gr.coords(&s.lat.to_split(&s.beta))?.iter().map(|x| gr.residue_field().index_of(x)).collect();
                let entry = match classes.get(&(gi, q, key.clone())) {
                    Some(e) => *e,
                    None => {
                        let brute = !nilpotent_coset(&s, &mut rng, 3)?;
                        let e = (phi, brute);
                        classes.insert((gi, q, key), e);
                        e
                    }
                };
                checked += 1;
                if phi != entry.1 || phi != entry.0 {
                    disagree.push(format!("{} q={q} M={}", g.label, fmat::display(&m)));
                }
            }
        }
    }
    verdicts.push(format!("grid: {checked} strata, {} classes, {} disagreements", classes.len(), disagree.len()));
    let (corpus_ok, corpus_total, corpus_verdicts) = corpus_check(&f, prec)?;
    verdicts.extend(corpus_verdicts);
    let pass = disagree.is_empty() && corpus_ok == corpus_total && checked > 0;
    let mut detail = format!(
        "{checked} strata (height <= {height}) in {} classes agree: {}; analyze_fundamental agrees on {corpus_ok}/{corpus_total}",
        classes.len(),
        disagree.is_empty()
    );
    if let Some(d) = disagree.first() {
        detail.push_str(&format!("; first disagreement {d}"));
    }
    Ok((pass, detail, verdicts))
}

/// Fixed corpus: (grid index, k, entries) with β = 3^{−k} M.
const CORPUS: [(usize, i64, [i64; 4]); 30] = [
    (1, 1, [0, 2, 1, 0]),
    (1, 1, [1, 1, 0, 1]),
    (1, 1, [1, 0, 0, 2]),
    (1, 1, [1, 0, 0, 1]),
    (1, 1, [0, 1, 0, 0]),
    (1, 2, [0, 2, 1, 0]),
    (1, 2, [1, 3, 0, 2]),
    (1, 2, [1, 0, 0, 4]),
    (1, 2, [0, 3, 1, 0]),
    (1, 2, [2, 1, 1, 2]),
    (1, 1, [1, 2, 2, 1]),
    (1, 1, [0, 1, 1, 0]),
    (1, 1, [2, 1, 2, 2]),
    (1, 2, [1, 1, 0, 1]),
    (1, 2, [3, 1, 0, 3]),
    (2, 1, [0, 3, 1, 0]),
    (2, 1, [0, 6, 1, 0]),
    (2, 1, [1, 0, 0, 2]),
    (2, 1, [1, 0, 0, 1]),
    (2, 1, [1, 3, 0, 1]),
    (2, 1, [0, 0, 1, 0]),
    (2, 1, [1, 0, 1, 2]),
    (2, 1, [2, 0, 0, 1]),
    (2, 2, [3, 0, 0, 6]),
    (2, 1, [1, 3, 1, 1]),
    (2, 1, [2, 3, 1, 1]),
    (2, 1, [0, 3, 2, 0]),
    (2, 1, [3, 3, 1, 3]),
    (0, 1, [1, 0, 0, 0]),
    (0, 2, [2, 0, 0, 0]),
];

fn corpus_check(f: &Field, _prec: u32) -> Result<(usize, usize, Vec<String>)> {
    let gs = grids(f)?;
    let mut ok = 0;
    let mut total = 0;
    let mut verdicts = vec![];
    for (gi, k, e) in CORPUS {
        let g = &gs[gi];
        let n = g.lat.dim();
        let m = if n == 1 { fmat::from_ints(f, &[&[e[0]]]) } else { fmat::from_ints(f, &[&[e[0], e[1]], &[e[2], e[3]]]) };
        let b = m.scale(&f.pi_pow(-k));
        let q = -g.lat.nu(&b).ok_or_else(|| Error::Schema("zero corpus entry".into()))?;
        let s = Stratum::new(g.lat.clone(), q, q - 1, b, None)?;
        let a = analyze_fundamental(&s)?;
        let want = exhaustive_verdict(&s)?;
        total += 1;
        if a.verdict == want {
            ok += 1;
        }
        verdicts.push(format!("{} q={q} {:?}: {} / {}", g.label, e, a.verdict.as_str(), want.as_str()));
    }
    Ok((ok, total, verdicts))
}

/// Digit-truncated elements of β + a_{1−q}: the leading term of β plus
/// every lift of a_{1−q}/a_{2−q}.
fn coset_reps(s: &Stratum) -> Result<Vec<FMat>> {
    let top = Graded::new(&s.lat, -s.q);
    let lead = s.lat.from_split(&top.lift(&top.coords(&s.lat.to_split(&s.beta))?));
    let gr = Graded::new(&s.lat, 1 - s.q);
    let k = gr.residue_field();
    let d = gr.dim();
    let size = k.size();
    let total = size.pow(d as u32);
    Ok((0..total)
        .map(|mut code| {
            let c: Vec<_> = (0..d)
                .map(|_| {
                    let x = k.element(code % size);
                    code /= size;
                    x
                })
                .collect();
            lead.add(&s.lat.from_split(&gr.lift(&c)))
        })
        .collect())
}

/// Brute-force verdict over all coset representatives, for dim ≤ 2.
pub fn exhaustive_verdict(s: &Stratum) -> Result<Verdict> {
    let reps = coset_reps(s)?;
    let mut semisimple = false;
    for y in &reps {
        if is_simple_rep(s, y)? {
            return Ok(Verdict::Simple);
        }
        if !semisimple && is_split_rep(s, y)? {
            semisimple = true;
        }
    }
    Ok(if semisimple { Verdict::Semisimple } else { Verdict::Neither })
}

fn normalizes(s: &Stratum, y: &FMat, q: i64) -> Result<bool> {
    let n = s.dim();
    for t in 0..s.period() {
        let img = s.lat.lattice(t).image(n, |v| y.mul_vec(v))?;
        if !img.same(&s.lat.lattice(t - q)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// y generates a field E with ν_E(y) prime to e(E/F), its normalized
/// residue generates k_E, and Λ is an o_E-lattice sequence.
fn is_simple_rep(s: &Stratum, y: &FMat) -> Result<bool> {
    let f = s.field();
    let n = s.dim();
    if s.lat.nu(y) != Some(-s.q) || !normalizes(s, y, s.q)? {
        return Ok(false);
    }
    if n == 1 {
        return Ok(true);
    }
    let (t, d) = (y.trace(), y.det()?);
    if y.sub(&fmat::identity(f, n).scale(&t.mul(&f.rational(1, 2)?))).is_zero() {
        return Ok(true);
    }
    let disc = t.mul(&t).sub(&d.mul(&f.int(4)));
    if disc.is_zero() || disc.is_square()? {
        return Ok(false);
    }
    // E = F(√disc): ramified iff ν(disc) odd
    let vd = disc.valuation().unwrap();
    let vdet = d.valuation().unwrap();
    if vd % 2 != 0 {
        // ν_E(y) = ν_F(det y) must be odd
        return Ok(vdet % 2 != 0);
    }
    // unramified: ν_E(y) = ν_F(det)/2; y·π^{-ν} must have residue outside k_F
    if vdet % 2 != 0 {
        return Ok(false);
    }
    let u = y.scale(&f.pi_pow(-vdet / 2));
    let ut = u.trace();
    let ud = u.det()?;
    let rd = ut.mul(&ut).sub(&ud.mul(&f.int(4)));
    Ok(rd.valuation() == Some(0))
}

/// y has two eigenvalues in F with distinct classes at level q, and Λ
/// splits along the eigenlines.
fn is_split_rep(s: &Stratum, y: &FMat) -> Result<bool> {
    let f = s.field();
    if s.dim() != 2 {
        return Ok(false);
    }
    let (t, d) = (y.trace(), y.det()?);
    let disc = t.mul(&t).sub(&d.mul(&f.int(4)));
    let r = match disc.sqrt()? {
        Some(r) if !disc.is_zero() => r,
        _ => return Ok(false),
    };
    let half = f.rational(1, 2)?;
    let l1 = t.add(&r).mul(&half);
    let l2 = t.sub(&r).mul(&half);
    let e = s.period();
    let nu = |x: &Elem| x.valuation().map(|v| v * e);
    if nu(&l1.sub(&l2)).map_or(true, |v| v != -s.q) {
        return Ok(false);
    }
    let one = fmat::identity(f, 2);
    let mut lines = vec![];
    for l in [&l1, &l2] {
        let k = y.sub(&one.scale(l)).kernel()?;
        if k.cols != 1 {
            return Ok(false);
        }
        lines.push(k.col(0));
    }
    for tt in 0..e {
        let lt = s.lat.lattice(tt);
        let a = lt.meet_subspace(&lines[..1])?;
        let b = lt.meet_subspace(&lines[1..])?;
        if !a.sum(&b)?.same(&lt) {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------- 7

fn lifting_suite(profile: Profile, prec: u32) -> Result<Found> {
    let n_each = profile.pick(10, 50);
    let mut verdicts = vec![];
    let (mut lifts, mut twists, mut idems, mut cays) = (0, 0, 0, 0);
    let f3 = Field::qp(3, prec)?;
    let f5 = Field::qp(5, prec)?;
    let fu = field(quad(3, true, true), prec)?;
    for idx in 0..n_each {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7000 + idx as u64);
        let f = [&f3, &f5, &fu][idx % 3];
        let n = rng.gen_range(1..=4);
        let eps = if f.has_rho() || rng.gen_bool(0.5) { 1 } else { -1 };
        let (h, lat) = if eps == -1 && n % 2 == 0 {
            let k = n / 2;
            let mut g = fmat::zeros(f, n, n);
            for i in 0..k {
                g.set(i, k + i, f.one());
                g.set(k + i, i, f.one().neg());
            }
            (HermForm::new(f, -1, g)?, LatticeSeq::standard(f, vec![0; n], 1)?)
        } else {
            let d: Vec<Elem> = (0..n).map(|_| f.int(rng.gen_range(1..f.p() as i64))).collect();
            (HermForm::new(f, 1, fmat::diag(f, &d))?, LatticeSeq::standard(f, vec![0; n], 1)?)
        };
        // lift_isometry: h2 = transport of h by g0⁻¹, f = g0 (1 + x), x ∈ a_1
        let g0 = random_unit(&lat, &mut rng)?;
        let g0i = g0.inverse()?;
        let h2 = HermForm::new(f, h.eps(), fmat::star(&g0i).mul(h.gram()).mul(&g0i))?;
        let x = random_in(&lat.filtration(1), n, &mut rng);
        let fm = g0.mul(&fmat::identity(f, n).add(&x));
        let d = ResidualIsometryData { h: h.clone(), lat: lat.clone(), h2: h2.clone(), lat2: lat.clone(), f: fm };
        let lift_ok = match lift_isometry(&d) {
            Ok(c) => c.ok() && h.is_isometry_to(&h2, &c.g),
            Err(_) => false,
        };
        lifts += lift_ok as usize;
        // twist_isometry: a1 = y σ(y), a2 = z a1 σ(z) with z ∈ 1 + a_s
        let sl = rng.gen_range(1..=2);
        let y = random_unit(&lat, &mut rng)?;
        let a1 = y.mul(&h.adjoint(&y)?);
        let z = fmat::identity(f, n).add(&random_in(&lat.filtration(sl), n, &mut rng));
        let a2 = z.mul(&a1).mul(&h.adjoint(&z)?);
        let twist_ok = match twist_isometry(&h, &lat, &a1, &a2, sl) {
            Ok(u) => {
                fmat::star(&u).mul(&h.gram().mul(&a2)).mul(&u).eq_approx(&h.gram().mul(&a1))
                    && lat.contains_in_filtration(&u.sub(&fmat::identity(f, n)), sl)
            }
            Err(_) => false,
        };
        twists += twist_ok as usize;
        // lift_idempotent: α = u e u⁻¹ + noise in a_r
        let r = rng.gen_range(1..=2);
        let k = rng.gen_range(0..=n);
        let e0 = fmat::diag(f, &(0..n).map(|i| if i < k { f.one() } else { f.zero() }).collect::<Vec<_>>());
        let alpha = g0.mul(&e0).mul(&g0i).add(&random_in(&lat.filtration(r), n, &mut rng));
        let nu = |m: &FMat| lat.nu(m);
        let idem_ok = match lift_idempotent(&alpha, r, &nu, None, budget(f, 1)) {
            Ok(l) => l.doubling_holds(r) && l.value.mul(&l.value).sub(&l.value).is_zero(),
            Err(_) => false,
        };
        idems += idem_ok as usize;
        // cayley: Gram preserved and membership in U¹
        let cay_ok = match random_u1(&h, &lat, &mut rng) {
            Ok(c) => h.is_isometry(&c) && lat.contains_in_filtration(&c.sub(&fmat::identity(f, n)), 1),
            Err(_) => false,
        };
        cays += cay_ok as usize;
        verdicts.push(format!("#{idx}: lift {lift_ok} twist {twist_ok} idempotent {idem_ok} cayley {cay_ok}"));
    }
    let pass = [lifts, twists, idems, cays].iter().all(|&c| c == n_each);
    Ok((
        pass,
        format!("lift {lifts}/{n_each}, twist {twists}/{n_each}, idempotent {idems}/{n_each}, cayley {cays}/{n_each}"),
        verdicts,
    ))
}

// ---------------------------------------------------------------- 8

fn filtrations(profile: Profile, prec: u32) -> Result<Found> {
    let count = profile.pick(10, 56);
    let mut fields = HashMap::new();
    let mut verdicts = vec![];
    let mut good = 0;
    let fams = [Family::Gl, Family::Gl, Family::Unitary, Family::Paired];
    let mut idx = 0;
    let mut sampled = 0;
    while sampled < count {
        let fam = fams[idx % fams.len()];
        idx += 1;
        let (s, _) = instance(fam, 1000 + idx, prec, &mut fields)?;
        if s.dim() > 4 {
            continue;
        }
        sampled += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(0x8000 + idx as u64);
        let r = filtration_checks(&s, &mut rng);
        let v = match &r {
            Ok(c) => c.clone(),
            Err(e) => format!("error: {e}"),
        };
        if r.as_ref().map_or(false, |c| c == "ok") {
            good += 1;
        }
        verdicts.push(format!("{fam:?} #{idx} dim {}: {v}", s.dim()));
    }
    Ok((good == count, format!("{good}/{count} sampled strata satisfy all containments"), verdicts))
}

fn filtration_checks(s: &Stratum, rng: &mut ChaCha8Rng) -> Result<String> {
    let f = s.field().clone();
    let n = s.dim();
    let c = critical_exponent(&s.beta, &s.lat)?;
    let sp = split_stratum(s)?;
    let mut bad = vec![];
    for sh in [0, 1, -c.k0 - 1] {
        let (i, ii) = descr_checks(&c, &sp.idempotents, sh)?;
        if !(i && ii) {
            bad.push(format!("descr s={sh}"));
        }
    }
    let tc = tame_corestriction(&s.beta, &[s.lat.clone()], s.herm.as_ref())?;
    if !tc.exactness()? {
        bad.push("exactness".into());
    }
    if !tc.defining_property(&s.lat)? {
        bad.push("corestriction".into());
    }
    let m = c.m(-(c.k0 + s.r))?;
    let b0 = c.b(0)?;
    let one = fmat::identity(&f, n);
    for _ in 0..2 {
        let mut b = one.clone();
        for _ in 0..20 {
            let cand = random_in(&b0, n, rng);
            if cand.inverse().is_ok() {
                b = cand;
                break;
            }
        }
        let g = one.add(&random_in(&m, n, rng)).mul(&b).mul(&one.add(&random_in(&m, n, rng)));
        if !verify_intertwiner(&g, s, s, None)?.ok() {
            bad.push("intertwining".into());
        }
    }
    Ok(if bad.is_empty() { "ok".into() } else { bad.join(",") })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles() {
        assert_eq!(Profile::parse("quick").unwrap(), Profile::Quick);
        assert!(matches!(Profile::parse("slow"), Err(Error::Schema(_))));
    }

    #[test]
    fn expected_groups() {
        assert_eq!(expected_witt(3, false, 1), (16, "C4xC4"));
        assert_eq!(expected_witt(9, true, -1), (4, "C2xC2"));
        assert_eq!(expected_witt(5, false, -1), (1, "trivial"));
    }

    #[test]
    fn generators_are_valid() {
        let mut fields = HashMap::new();
        for fam in [Family::Gl, Family::Unitary, Family::SkewExample, Family::Paired, Family::Orthogonal] {
            for idx in 0..3 {
                let (s, t) = instance(fam, idx, 24, &mut fields).unwrap();
                assert!(s.dim() <= 6 && s.lat.same_as(&t.lat), "{fam:?}");
            }
        }
    }

    #[test]
    fn exhaustive_search_small_cases() {
        let f = Field::qp(3, 24).unwrap();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let mk = |m: &[&[i64]]| Stratum::new(lat.clone(), 1, 0, fmat::from_ints(&f, m).scale(&f.pi_pow(-1)), None).unwrap();
        assert_eq!(exhaustive_verdict(&mk(&[&[0, 2], &[1, 0]])).unwrap(), Verdict::Simple);
        assert_eq!(exhaustive_verdict(&mk(&[&[1, 0], &[0, 2]])).unwrap(), Verdict::Semisimple);
        assert_eq!(exhaustive_verdict(&mk(&[&[1, 1], &[0, 1]])).unwrap(), Verdict::Neither);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(nilpotent_coset(&mk(&[&[0, 1], &[0, 0]]), &mut rng, 3).unwrap());
        assert!(!nilpotent_coset(&mk(&[&[1, 0], &[0, 2]]), &mut rng, 3).unwrap());
    }
}
