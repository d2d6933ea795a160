//! Towers of tame prime-degree extensions of Q_p.
//!
//! An element of a tower with steps F_0 = Q_p ⊂ F_1 ⊂ ... ⊂ F_n is stored by
//! its coordinates in the product power basis, with the top step outermost:
//! flat index `a * d_{n-1} + i` stands for θ_n^a · b_i where b_i runs over
//! the basis of F_{n-1}.  Because every unramified step has an integral
//! generator with independent residues and every Eisenstein step adds a
//! uniformizer, the valuation of an element is the minimum over the
//! coordinates of `e * v_p(c_k) + w_k` with fixed weights `w_k`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arith::factor::is_irreducible;
use crate::arith::finite::{FfElem, FiniteField};
use crate::arith::linalg::Mat;
use crate::arith::padic::{parse_rational, Qp, INF};
use crate::arith::poly::Poly;
use crate::arith::scalar::Scalar;
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Unramified,
    Eisenstein,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSpec {
    pub kind: StepKind,
    /// Coefficients low degree first; each is an integer, a rational string,
    /// or an array of coordinates in the previous field.
    pub poly: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InvolutionSpec {
    Named(String),
    Step { conjugate_step: usize },
}

impl Default for InvolutionSpec {
    fn default() -> Self {
        InvolutionSpec::Named("trivial".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    #[serde(default)]
    pub steps: Vec<StepSpec>,
    #[serde(default)]
    pub involution: InvolutionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
}

impl FieldSpec {
    pub fn qp(p: u64) -> FieldSpec {
        FieldSpec { p, steps: vec![], involution: InvolutionSpec::default(), precision: None }
    }

    pub fn step(mut self, kind: StepKind, poly: &[i64]) -> FieldSpec {
        self.steps.push(StepSpec { kind, poly: poly.iter().map(|&c| Value::from(c)).collect() });
        self
    }

    pub fn conjugate(mut self, step: Option<usize>) -> FieldSpec {
        self.involution = match step {
            None => InvolutionSpec::Named("conjugate".into()),
            Some(k) => InvolutionSpec::Step { conjugate_step: k },
        };
        self
    }

    fn conj_step(&self) -> Result<Option<usize>> {
        match &self.involution {
            InvolutionSpec::Named(s) if s == "trivial" => Ok(None),
            InvolutionSpec::Named(s) if s == "conjugate" => {
                if self.steps.is_empty() {
                    return Err(Error::BadInvolution("Q_p has no non-trivial involution".into()));
                }
                Ok(Some(self.steps.len() - 1))
            }
            InvolutionSpec::Named(s) => Err(Error::Schema(format!("unknown involution {s:?}"))),
            InvolutionSpec::Step { conjugate_step } => {
                if *conjugate_step >= self.steps.len() {
                    return Err(Error::BadInvolution(format!("no step {conjugate_step}")));
                }
                Ok(Some(*conjugate_step))
            }
        }
    }
}

#[derive(Clone)]
pub struct FieldInner {
    pub p: u32,
    pub prec: u32,
    pub spec: FieldSpec,
    pub kinds: Vec<StepKind>,
    pub degs: Vec<usize>,
    pub d: usize,
    pub e: i64,
    pub f: usize,
    pub weights: Vec<i64>,
    table: Vec<Vec<Vec<(usize, Qp)>>>,
    rho: Option<Vec<Vec<Qp>>>,
    pub rho_step: Option<usize>,
    /// F/F_0 ramified (only meaningful with a non-trivial involution)
    pub rho_ramified: bool,
    pi: Vec<Qp>,
    residue: FiniteField,
    res_idx: Vec<usize>,
    parent: Option<Field>,
    gens: Vec<Vec<Qp>>,
}

#[derive(Clone)]
pub struct Field(pub Arc<FieldInner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field(p={}, d={}, e={}, f={}, rho={:?})", self.0.p, self.0.d, self.0.e, self.0.f, self.0.rho_step)
    }
}

impl PartialEq for Field {
    fn eq(&self, o: &Field) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || (self.0.spec.steps == o.0.spec.steps && self.0.p == o.0.p && self.0.rho_step == o.0.rho_step && self.0.prec == o.0.prec)
    }
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..n).take_while(|k| k * k <= n).all(|k| n % k != 0)
}

impl Field {
    /// Q_p at the given precision.
    pub fn qp(p: u32, prec: u32) -> Result<Field> {
        Field::new(&FieldSpec::qp(p as u64), Some(prec))
    }

    pub fn new(spec: &FieldSpec, prec_override: Option<u32>) -> Result<Field> {
        let p64 = spec.p;
        if p64 % 2 == 0 || p64 < 3 || !is_prime(p64 as usize) {
            if p64 == 2 {
                return Err(Error::EvenPrime(p64));
            }
            if p64 % 2 == 0 {
                return Err(Error::EvenPrime(p64));
            }
            return Err(Error::Schema(format!("{p64} is not a prime")));
        }
        let p = p64 as u32;
        let prec = prec_override.or(spec.precision).unwrap_or(DEFAULT_PRECISION);
        if prec < 4 {
            return Err(Error::Schema("precision must be at least 4 digits".into()));
        }
        let conj = spec.conj_step()?;
        let one = Qp::one(p, prec);
        let base = FieldInner {
            p,
            prec,
            spec: FieldSpec { p: p64, steps: vec![], involution: InvolutionSpec::default(), precision: Some(prec) },
            kinds: vec![],
            degs: vec![],
            d: 1,
            e: 1,
            f: 1,
            weights: vec![0],
            table: vec![vec![vec![(0, one.clone())]]],
            rho: None,
            rho_step: None,
            rho_ramified: false,
            pi: vec![Qp::from_i64(p, p as i64, prec)],
            residue: FiniteField::prime(p),
            res_idx: vec![0],
            parent: None,
            gens: vec![],
        };
        let mut field = Field(Arc::new(base));
        for (k, step) in spec.steps.iter().enumerate() {
            field = field.extend(step, conj == Some(k), &spec.involution)?;
        }
        Ok(field)
    }

    fn parse_coeff(&self, v: &Value) -> Result<Elem> {
        let p = self.0.p;
        let prec = self.0.prec;
        let scalar = |v: &Value| -> Result<Qp> {
            match v {
                Value::Number(n) => {
                    let s = n.to_string();
                    parse_rational(p, &s, prec)
                }
                Value::String(s) => {
                    if s.contains(':') || s.contains('@') {
                        Qp::decode(p, s)
                    } else {
                        parse_rational(p, s, prec)
                    }
                }
                _ => Err(Error::Schema(format!("bad scalar {v}"))),
            }
        };
        match v {
            Value::Array(xs) => {
                if xs.len() != self.0.d {
                    return Err(Error::Schema(format!("coordinate vector of length {} for a field of degree {}", xs.len(), self.0.d)));
                }
                let c = xs.iter().map(scalar).collect::<Result<Vec<_>>>()?;
                Ok(self.from_coords(c))
            }
            _ => Ok(self.from_qp(scalar(v)?)),
        }
    }

    fn extend(&self, step: &StepSpec, conj_here: bool, inv_spec: &InvolutionSpec) -> Result<Field> {
        let prev = self;
        let pi = &prev.0;
        let p = pi.p;
        let prec = pi.prec;
        let coeffs: Vec<Elem> = step.poly.iter().map(|v| prev.parse_coeff(v)).collect::<Result<_>>()?;
        if coeffs.len() < 2 {
            return Err(Error::TagMismatch("defining polynomial must have degree at least 1".into()));
        }
        let m = coeffs.len() - 1;
        if !coeffs[m].sub(&prev.one()).is_zero() {
            return Err(Error::TagMismatch("defining polynomial must be monic".into()));
        }
        if !is_prime(m) {
            return Err(Error::TagMismatch(format!("step degree {m} is not prime")));
        }
        match step.kind {
            StepKind::Unramified => {
                for c in &coeffs {
                    if let Some(v) = c.valuation() {
                        if v < 0 {
                            return Err(Error::TagMismatch("unramified polynomial is not integral".into()));
                        }
                    }
                }
                let k = prev.residue_field();
                let z = k.zero();
                let red = Poly::new(coeffs.iter().map(|c| c.residue()).collect::<Result<Vec<_>>>()?, &z);
                if red.degree() != Some(m) || !is_irreducible(&red)? {
                    return Err(Error::TagMismatch("reduction of the unramified polynomial is not irreducible".into()));
                }
            }
            StepKind::Eisenstein => {
                if m as u32 % p == 0 {
                    return Err(Error::WildExtension);
                }
                for c in &coeffs[..m] {
                    if c.valuation().map_or(false, |v| v < 1) {
                        return Err(Error::TagMismatch("Eisenstein polynomial has a unit coefficient".into()));
                    }
                }
                if coeffs[0].valuation() != Some(1) {
                    return Err(Error::TagMismatch("constant term of an Eisenstein polynomial must have valuation 1".into()));
                }
            }
        }
        let dp = pi.d;
        let d = dp * m;
        let zero_prev = prev.zero();
        // theta^s in the basis 1..theta^{m-1}, for s <= 2m-2
        let mut pows: Vec<Vec<Elem>> = vec![];
        for s in 0..m {
            let mut v = vec![zero_prev.clone(); m];
            v[s] = prev.one();
            pows.push(v);
        }
        for s in m..(2 * m - 1).max(m) {
            let old = &pows[s - 1];
            let top = old[m - 1].clone();
            let mut v = vec![zero_prev.clone(); m];
            for t in 1..m {
                v[t] = old[t - 1].clone();
            }
            for t in 0..m {
                v[t] = v[t].sub(&top.mul(&coeffs[t]));
            }
            pows.push(v);
        }
        let mut table = vec![vec![vec![]; d]; d];
        for a in 0..m {
            for i in 0..dp {
                for b in 0..m {
                    for j in 0..dp {
                        let x = prev.basis_product(i, j);
                        let mut acc: Vec<Qp> = vec![Qp::zero(p); d];
                        for t in 0..m {
                            let y = pows[a + b][t].mul(&x);
                            for (kk, q) in y.c.iter().enumerate() {
                                acc[t * dp + kk] = q.clone();
                            }
                        }
                        table[a * dp + i][b * dp + j] = acc.into_iter().enumerate().filter(|(_, q)| !q.is_exact_zero()).collect();
                    }
                }
            }
        }
        let (e, f, weights) = match step.kind {
            StepKind::Unramified => {
                let w: Vec<i64> = (0..d).map(|k| pi.weights[k % dp]).collect();
                (pi.e, pi.f * m, w)
            }
            StepKind::Eisenstein => {
                let w: Vec<i64> = (0..d).map(|k| (m as i64) * pi.weights[k % dp] + (k / dp) as i64).collect();
                (pi.e * m as i64, pi.f, w)
            }
        };
        let res_idx: Vec<usize> = (0..d).filter(|&k| weights[k] == 0).collect();
        let fr = res_idx.len();
        let mut rtable = vec![vec![vec![0u32; fr]; fr]; fr];
        for (ri, &i) in res_idx.iter().enumerate() {
            for (rj, &j) in res_idx.iter().enumerate() {
                for (k, q) in &table[i][j] {
                    if let Some(rk) = res_idx.iter().position(|&x| x == *k) {
                        rtable[ri][rj][rk] = q.residue()?;
                    }
                }
            }
        }
        let mut rone = vec![0; fr];
        rone[0] = 1;
        let residue = FiniteField::from_table(p, rtable, rone);
        let mut gens: Vec<Vec<Qp>> = pi.gens.iter().map(|g| pad(g, d, p)).collect();
        let mut theta = vec![Qp::zero(p); d];
        theta[dp] = Qp::one(p, prec);
        gens.push(theta.clone());
        let pi_coords = match step.kind {
            StepKind::Eisenstein => theta.clone(),
            StepKind::Unramified => pad(&pi.pi, d, p),
        };
        let mut kinds = pi.kinds.clone();
        kinds.push(step.kind);
        let mut degs = pi.degs.clone();
        degs.push(m);
        let mut spec = pi.spec.clone();
        spec.steps.push(step.clone());
        let step_index = pi.kinds.len();
        let rho_step = if conj_here { Some(step_index) } else { pi.rho_step };
        if rho_step.is_some() {
            spec.involution = match inv_spec {
                InvolutionSpec::Named(_) if rho_step == Some(step_index) => InvolutionSpec::Step { conjugate_step: step_index },
                _ => InvolutionSpec::Step { conjugate_step: rho_step.unwrap() },
            };
        }
        let inner = FieldInner {
            p,
            prec,
            spec,
            kinds,
            degs,
            d,
            e,
            f,
            weights,
            table,
            rho: None,
            rho_step,
            rho_ramified: false,
            pi: pi_coords,
            residue,
            res_idx,
            parent: Some(prev.clone()),
            gens,
        };
        let mut field = Field(Arc::new(inner));
        // involution
        let rho: Option<Vec<Vec<Qp>>> = if conj_here {
            if m != 2 {
                return Err(Error::BadInvolution("conjugation needs a quadratic step".into()));
            }
            if pi.rho.is_some() {
                return Err(Error::BadInvolution("only one conjugated step is supported".into()));
            }
            // rho(theta) = -c_1 - theta
            let th = field.from_coords(theta.clone());
            let rt = field.embed(&coeffs[1]).neg().sub(&th);
            let mut images = vec![];
            for a in 0..m {
                let ra = rt.pow(a as i64)?;
                for i in 0..dp {
                    let bi = field.basis(i);
                    images.push(ra.mul(&bi).c);
                }
            }
            Some(images)
        } else if let Some(prho) = &pi.rho {
            for c in &coeffs {
                if !prev.apply_rho(c).sub(c).is_zero() {
                    return Err(Error::BadInvolution("a later defining polynomial is not fixed by the involution".into()));
                }
            }
            let mut images = vec![];
            for a in 0..m {
                for i in 0..dp {
                    let mut v = vec![Qp::zero(p); d];
                    for (k, q) in prho[i].iter().enumerate() {
                        v[a * dp + k] = q.clone();
                    }
                    images.push(v);
                }
            }
            Some(images)
        } else {
            None
        };
        if let Some(rho) = rho {
            field = field.rebuild(|i| i.rho = Some(rho));
            // validate: involutive and multiplicative on the basis
            for i in 0..d {
                let bi = field.basis(i);
                if !field.apply_rho(&field.apply_rho(&bi)).sub(&bi).is_zero() {
                    return Err(Error::BadInvolution("rho is not an involution".into()));
                }
                for j in 0..d {
                    let bj = field.basis(j);
                    let lhs = field.apply_rho(&bi.mul(&bj));
                    let rhs = field.apply_rho(&bi).mul(&field.apply_rho(&bj));
                    if !lhs.sub(&rhs).is_zero() {
                        return Err(Error::BadInvolution("rho is not multiplicative".into()));
                    }
                }
            }
            // a symmetric or skew uniformizer
            let pe = field.from_coords(field.0.pi.clone());
            let rp = field.apply_rho(&pe);
            let ok = rp.sub(&pe).is_zero() || rp.add(&pe).is_zero();
            if !ok {
                let cands = [pe.sub(&rp), pe.add(&rp)];
                let c = cands
                    .into_iter()
                    .find(|c| c.valuation() == Some(1))
                    .ok_or_else(|| Error::BadInvolution("no symmetric or skew uniformizer".into()))?;
                field = field.rebuild(|i| i.pi = c.c);
            }
            let k = field.0.rho_step.unwrap();
            let g = field.from_coords(field.0.gens[k].clone());
            let s = g.sub(&field.apply_rho(&g));
            let vs = s.valuation().ok_or_else(|| Error::BadInvolution("involution is trivial on its step".into()))?;
            field = field.rebuild(|i| i.rho_ramified = vs % 2 != 0);
        }
        Ok(field)
    }

    fn rebuild(&self, edit: impl FnOnce(&mut FieldInner)) -> Field {
        let mut inner = (*self.0).clone();
        edit(&mut inner);
        Field(Arc::new(inner))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }
    pub fn prec(&self) -> u32 {
        self.0.prec
    }
    pub fn degree(&self) -> usize {
        self.0.d
    }
    pub fn e(&self) -> i64 {
        self.0.e
    }
    pub fn f(&self) -> usize {
        self.0.f
    }
    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }
    pub fn has_rho(&self) -> bool {
        self.0.rho.is_some()
    }
    pub fn num_steps(&self) -> usize {
        self.0.kinds.len()
    }

    /// Same tower at another precision.
    pub fn with_precision(&self, prec: u32) -> Result<Field> {
        Field::new(&self.0.spec, Some(prec))
    }

    /// The subtower made of the first k steps.
    pub fn prefix(&self, k: usize) -> Field {
        let mut f = self.clone();
        while f.num_steps() > k {
            f = f.0.parent.clone().expect("prefix exists");
        }
        f
    }

    pub fn residue_field(&self) -> FiniteField {
        self.0.residue.clone()
    }

    /// Size of the residue field.
    pub fn q(&self) -> u64 {
        self.0.residue.size()
    }

    pub fn zero(&self) -> Elem {
        Elem { f: self.clone(), c: vec![Qp::zero(self.0.p); self.0.d] }
    }

    pub fn one(&self) -> Elem {
        self.from_qp(Qp::one(self.0.p, self.0.prec))
    }

    pub fn int(&self, n: i64) -> Elem {
        self.from_qp(Qp::from_i64(self.0.p, n, self.0.prec))
    }

    pub fn rational(&self, a: i64, b: i64) -> Result<Elem> {
        Ok(self.from_qp(Qp::from_rational(self.0.p, a, b, self.0.prec)?))
    }

    pub fn from_qp(&self, x: Qp) -> Elem {
        let mut c = vec![Qp::zero(self.0.p); self.0.d];
        c[0] = x;
        self.from_coords(c)
    }

    pub fn from_coords(&self, c: Vec<Qp>) -> Elem {
        assert_eq!(c.len(), self.0.d);
        let mut x = Elem { f: self.clone(), c };
        x.normalize();
        x
    }

    pub fn basis(&self, i: usize) -> Elem {
        let mut c = vec![Qp::zero(self.0.p); self.0.d];
        c[i] = Qp::one(self.0.p, self.0.prec);
        Elem { f: self.clone(), c }
    }

    /// Generator of step k (the image of X in F_{k}[X]/(P_k)).
    pub fn generator(&self, k: usize) -> Elem {
        self.from_coords(self.0.gens[k].clone())
    }

    /// The distinguished uniformizer (symmetric or skew under ρ).
    pub fn pi(&self) -> Elem {
        self.from_coords(self.0.pi.clone())
    }

    /// π^k for any integer k.
    pub fn pi_pow(&self, k: i64) -> Elem {
        self.pi().pow(k).expect("the uniformizer is invertible")
    }

    fn basis_product(&self, i: usize, j: usize) -> Elem {
        let mut c = vec![Qp::zero(self.0.p); self.0.d];
        for (k, q) in &self.0.table[i][j] {
            c[*k] = q.clone();
        }
        Elem { f: self.clone(), c }
    }

    /// Embed an element of a prefix of this tower.
    pub fn embed(&self, x: &Elem) -> Elem {
        if x.f == *self {
            return x.clone();
        }
        assert!(x.f.degree() <= self.degree(), "embedding from a larger field");
        self.from_coords(pad(&x.c, self.0.d, self.0.p))
    }

    pub fn apply_rho(&self, x: &Elem) -> Elem {
        match &self.0.rho {
            None => x.clone(),
            Some(rho) => {
                let d = self.0.d;
                let mut out = vec![Qp::zero(self.0.p); d];
                for (j, cj) in x.c.iter().enumerate() {
                    if cj.is_exact_zero() {
                        continue;
                    }
                    for k in 0..d {
                        if rho[j][k].is_exact_zero() {
                            continue;
                        }
                        out[k] = out[k].add(&cj.mul(&rho[j][k]));
                    }
                }
                self.from_coords(out)
            }
        }
    }

    /// Lift of a residue class using integer digits on the unit monomials.
    pub fn lift(&self, r: &FfElem) -> Elem {
        let mut c = vec![Qp::zero(self.0.p); self.0.d];
        for (ri, &k) in self.0.res_idx.iter().enumerate() {
            c[k] = Qp::from_i64(self.0.p, r.c[ri] as i64, self.0.prec);
        }
        self.from_coords(c)
    }

    /// A unit whose residue is a non-square; symmetric when ρ is non-trivial.
    pub fn nonsquare_unit(&self) -> Elem {
        let r = self.0.residue.nonsquare();
        let x = self.lift(&r);
        if !self.has_rho() {
            return x;
        }
        // symmetrize candidates until the residue stays a non-square
        for t in self.0.residue.elements() {
            if t.is_zero_ff() {
                continue;
            }
            let y = self.lift(&t);
            let s = y.add(&self.apply_rho(&y));
            if let Ok(rs) = s.residue() {
                if !rs.is_zero_ff() && !rs.is_square() {
                    return s;
                }
            }
        }
        x
    }

    /// Some element s with ρ(s) = −s of minimal valuation (0 or 1).
    pub fn skew_element(&self) -> Option<Elem> {
        let k = self.0.rho_step?;
        let g = self.generator(k);
        let s = g.sub(&self.apply_rho(&g));
        let v = s.valuation()?;
        // make valuation 0 or 1 using symmetric powers of the uniformizer
        let pi = self.pi();
        let sym_pi = if self.apply_rho(&pi).sub(&pi).is_zero() { pi.clone() } else { pi.mul(&pi) };
        let step = sym_pi.valuation().unwrap();
        let mut s = s;
        let mut v = v;
        while v >= step {
            s = s.div(&sym_pi).ok()?;
            v -= step;
        }
        Some(s)
    }

    /// Hilbert symbol (a, b) over this field (tame formula, odd p).
    pub fn hilbert(&self, a: &Elem, b: &Elem) -> Result<i32> {
        let pi = self.pi();
        let al = a.valuation().ok_or(Error::DivisionByZero)?;
        let be = b.valuation().ok_or(Error::DivisionByZero)?;
        let ua = a.div(&pi.pow(al)?)?.residue()?;
        let ub = b.div(&pi.pow(be)?)?.residue()?;
        let q = self.q();
        let chi_m1 = if ((q - 1) / 2) % 2 == 0 { 1 } else { -1 };
        let mut s = 1;
        if (al * be) % 2 != 0 {
            s *= chi_m1;
        }
        if be % 2 != 0 {
            s *= ua.chi();
        }
        if al % 2 != 0 {
            s *= ub.chi();
        }
        Ok(s)
    }

    /// Square class label of a non-zero element: (valuation parity, residue
    /// of the unit part is a non-square).
    pub fn square_class(&self, a: &Elem) -> Result<(bool, bool)> {
        let v = a.valuation().ok_or(Error::DivisionByZero)?;
        let u = a.div(&self.pi().pow(v)?)?.residue()?;
        Ok((v.rem_euclid(2) == 1, !u.is_square()))
    }

    /// For a ρ-symmetric a: is a a norm from this field down to the fixed
    /// field?  Tame formula; requires a non-trivial involution.
    pub fn is_norm(&self, a: &Elem) -> Result<bool> {
        if !self.has_rho() {
            return Err(Error::UnsupportedContext("norm test needs a non-trivial involution".into()));
        }
        let v = a.valuation().ok_or(Error::DivisionByZero)?;
        if !self.0.rho_ramified {
            return Ok(v % 2 == 0);
        }
        // ramified: F = F_0(π), π skew; F_0 has uniformizer d = π²
        let pi = self.pi();
        let dd = pi.mul(&pi);
        if v % 2 != 0 {
            return Err(Error::HypothesisFailed("element is not in the fixed field".into()));
        }
        let alpha = v / 2;
        let u = a.div(&dd.pow(alpha)?)?.residue()?;
        let q = self.q();
        let chi_m1 = if ((q - 1) / 2) % 2 == 0 { 1 } else { -1 };
        let mut s = u.chi();
        if alpha % 2 != 0 {
            s *= chi_m1;
        }
        Ok(s == 1)
    }
}

fn pad(c: &[Qp], d: usize, p: u32) -> Vec<Qp> {
    let mut v = c.to_vec();
    v.resize(d, Qp::zero(p));
    v
}

fn ceil_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b) + if a.rem_euclid(b) != 0 { 1 } else { 0 }
}

#[derive(Clone)]
pub struct Elem {
    pub f: Field,
    pub c: Vec<Qp>,
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

impl Elem {
    pub fn field(&self) -> &Field {
        &self.f
    }

    fn normalize(&mut self) {
        let fi = &self.f.0;
        let e = fi.e;
        let mut v = INF;
        let mut a = INF;
        for (k, q) in self.c.iter().enumerate() {
            let w = fi.weights[k];
            if let Some(vk) = q.valuation() {
                v = v.min(e * vk + w);
            }
            let ab = q.abs_prec();
            if ab < INF {
                a = a.min(e * ab + w);
            }
        }
        if v >= a {
            // zero to precision a
            for (k, q) in self.c.iter_mut() .enumerate() {
                let w = fi.weights[k];
                *q = Qp::zero_mod(fi.p, if a >= INF { INF } else { ceil_div(a - w, e) });
            }
            return;
        }
        let cap = v + fi.prec as i64 * e;
        for (k, q) in self.c.iter_mut().enumerate() {
            let w = fi.weights[k];
            *q = q.cap_abs(ceil_div(cap - w, e));
        }
    }

    /// Normalized valuation, `None` for zero to working precision.
    pub fn valuation(&self) -> Option<i64> {
        let fi = &self.f.0;
        let mut v = INF;
        let mut a = INF;
        for (k, q) in self.c.iter().enumerate() {
            let w = fi.weights[k];
            if let Some(vk) = q.valuation() {
                v = v.min(fi.e * vk + w);
            }
            let ab = q.abs_prec();
            if ab < INF {
                a = a.min(fi.e * ab + w);
            }
        }
        if v >= a || v >= INF {
            None
        } else {
            Some(v)
        }
    }

    /// Absolute precision in normalized valuation units.
    pub fn abs_prec(&self) -> i64 {
        let fi = &self.f.0;
        let mut a = INF;
        for (k, q) in self.c.iter().enumerate() {
            let ab = q.abs_prec();
            if ab < INF {
                a = a.min(fi.e * ab + fi.weights[k]);
            }
        }
        a
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    /// A representative with full working precision: unknown digits are
    /// taken to be zero.
    pub fn padded(&self) -> Elem {
        let prec = self.f.0.prec;
        self.f.from_coords(self.c.iter().map(|q| q.padded(prec)).collect())
    }

    pub fn is_exact_zero(&self) -> bool {
        self.c.iter().all(|q| q.is_exact_zero())
    }

    /// Lower bound on the valuation: the valuation or the absolute precision.
    pub fn val_or_prec(&self) -> i64 {
        self.valuation().unwrap_or_else(|| self.abs_prec())
    }

    pub fn add(&self, o: &Elem) -> Elem {
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a.add(b)).collect();
        self.f.from_coords(c)
    }

    pub fn sub(&self, o: &Elem) -> Elem {
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a.sub(b)).collect();
        self.f.from_coords(c)
    }

    pub fn neg(&self) -> Elem {
        Elem { f: self.f.clone(), c: self.c.iter().map(|a| a.neg()).collect() }
    }

    pub fn mul(&self, o: &Elem) -> Elem {
        let fi = &self.f.0;
        let d = fi.d;
        if d == 1 {
            return self.f.from_coords(vec![self.c[0].mul(&o.c[0])]);
        }
        let mut acc: Vec<Qp> = vec![Qp::zero(fi.p); d];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_exact_zero() {
                    continue;
                }
                let ab = a.mul(b);
                for (k, t) in &fi.table[i][j] {
                    acc[*k] = acc[*k].add(&ab.mul(t));
                }
            }
        }
        self.f.from_coords(acc)
    }

    pub fn mul_qp(&self, q: &Qp) -> Elem {
        self.f.from_coords(self.c.iter().map(|a| a.mul(q)).collect())
    }

    /// Matrix of multiplication by self on the Q_p basis (column j = self·b_j).
    pub fn mult_matrix(&self) -> Mat<Qp> {
        let d = self.f.0.d;
        let cols: Vec<Vec<Qp>> = (0..d).map(|j| self.mul(&self.f.basis(j)).c).collect();
        Mat::from_cols(&cols, &Qp::zero(self.f.0.p))
    }

    pub fn inv(&self) -> Result<Elem> {
        if self.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Err(Error::PrecisionExhausted("inverting an element indistinguishable from zero".into()));
        }
        if self.f.0.d == 1 {
            return Ok(self.f.from_coords(vec![self.c[0].inv()?]));
        }
        // scale to a unit first to keep the linear solve well conditioned
        let v = self.valuation().unwrap();
        let pi = self.f.pi();
        let pv = pi.pow_nonneg(v.unsigned_abs())?;
        let u = if v >= 0 { self.div_exact_by(&pv)? } else { self.mul(&pv) };
        let m = u.mult_matrix();
        let mut rhs = vec![Qp::zero(self.f.0.p); self.f.0.d];
        rhs[0] = Qp::one(self.f.0.p, self.f.0.prec);
        let sol = m.solve(&rhs)?.ok_or_else(|| Error::PrecisionExhausted("singular multiplication matrix".into()))?;
        let uinv = self.f.from_coords(sol);
        if v >= 0 {
            uinv.div_exact_by(&pv)
        } else {
            Ok(uinv.mul(&pv))
        }
    }

    /// Division by a power of the uniformizer through the multiplication
    /// matrix of the divisor (used only inside `inv`).
    fn div_exact_by(&self, d: &Elem) -> Result<Elem> {
        if self.f.0.d == 1 {
            return Ok(self.f.from_coords(vec![self.c[0].div(&d.c[0])?]));
        }
        let m = d.mult_matrix();
        let sol = m.solve(&self.c)?.ok_or_else(|| Error::PrecisionExhausted("division failed".into()))?;
        Ok(self.f.from_coords(sol))
    }

    pub fn div(&self, o: &Elem) -> Result<Elem> {
        Ok(self.mul(&o.inv()?))
    }

    fn pow_nonneg(&self, mut e: u64) -> Result<Elem> {
        let mut acc = self.f.one();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn pow(&self, e: i64) -> Result<Elem> {
        if e >= 0 {
            self.pow_nonneg(e as u64)
        } else {
            self.inv()?.pow_nonneg((-e) as u64)
        }
    }

    pub fn rho(&self) -> Elem {
        self.f.apply_rho(self)
    }

    /// Residue class of an integral element.
    pub fn residue(&self) -> Result<FfElem> {
        let fi = &self.f.0;
        if let Some(v) = self.valuation() {
            if v < 0 {
                return Err(Error::NotIntegral);
            }
        } else if self.abs_prec() < 1 {
            return Err(Error::PrecisionExhausted("residue of an imprecise zero".into()));
        }
        let mut r = vec![0u32; fi.res_idx.len()];
        for (ri, &k) in fi.res_idx.iter().enumerate() {
            r[ri] = self.c[k].residue()?;
        }
        Ok(fi.residue.elem(r))
    }

    /// Trace down to a prefix subfield.
    pub fn trace_to(&self, sub: &Field) -> Elem {
        let ds = sub.degree();
        let nb = self.f.degree() / ds;
        let mut acc = sub.zero();
        for t in 0..nb {
            let bt = self.f.basis(t * ds);
            let y = self.mul(&bt);
            acc = acc.add(&sub.from_coords(y.c[t * ds..(t + 1) * ds].to_vec()));
        }
        acc
    }

    /// Matrix of multiplication by self over a prefix subfield.
    pub fn relative_matrix(&self, sub: &Field) -> Mat<Elem> {
        let ds = sub.degree();
        let nb = self.f.degree() / ds;
        let mut m = Mat::zeros(nb, nb, &sub.zero());
        for t in 0..nb {
            let y = self.mul(&self.f.basis(t * ds));
            for s in 0..nb {
                m.set(s, t, sub.from_coords(y.c[s * ds..(s + 1) * ds].to_vec()));
            }
        }
        m
    }

    pub fn norm_to(&self, sub: &Field) -> Result<Elem> {
        self.relative_matrix(sub).det()
    }

    /// Restrict to a prefix subfield; fails if the element is not in it.
    pub fn restrict(&self, sub: &Field) -> Result<Elem> {
        let ds = sub.degree();
        if self.c[ds..].iter().any(|q| !q.is_zero()) {
            return Err(Error::HypothesisFailed("element does not lie in the subfield".into()));
        }
        Ok(sub.from_coords(self.c[..ds].to_vec()))
    }

    /// Canonical representative of the class of self modulo π^k o_F:
    /// coordinates truncated below the weight-adjusted exponent.
    pub fn rem_pi(&self, k: i64) -> Elem {
        let fi = &self.f.0;
        let c = self.c.iter().enumerate().map(|(j, q)| q.reduce_mod(ceil_div(k - fi.weights[j], fi.e))).collect();
        Elem { f: self.f.clone(), c }
    }

    /// Integral and known modulo π^k: the data needed before truncating.
    pub fn is_integral(&self) -> bool {
        self.valuation().map_or(true, |v| v >= 0)
    }

    /// Square root when one exists (p odd, Newton iteration on the unit).
    pub fn sqrt(&self) -> Result<Option<Elem>> {
        let Some(v) = self.valuation() else { return Ok(Some(self.clone())) };
        if v % 2 != 0 {
            return Ok(None);
        }
        let pi = self.f.pi();
        let h = pi.pow(v / 2)?;
        let u = self.div(&h.mul(&h))?;
        let r = u.residue()?;
        let Some(s) = r.sqrt() else { return Ok(None) };
        let mut y = self.f.lift(&s);
        let half = self.f.rational(1, 2)?;
        let iters = 64 - (self.f.prec() as u64 * self.f.e() as u64).leading_zeros() + 2;
        for _ in 0..iters {
            y = y.add(&u.div(&y)?).mul(&half);
        }
        if !y.mul(&y).sub(&u).is_zero() {
            return Err(Error::PrecisionExhausted("square root did not converge".into()));
        }
        Ok(Some(y.mul(&h)))
    }

    pub fn is_square(&self) -> Result<bool> {
        let Some(v) = self.valuation() else { return Ok(true) };
        if v % 2 != 0 {
            return Ok(false);
        }
        let u = self.div(&self.f.pi().pow(v)?)?;
        Ok(u.residue()?.is_square())
    }

    pub fn encode(&self) -> Vec<String> {
        self.c.iter().map(|q| q.encode()).collect()
    }

    pub fn to_json(&self) -> Value {
        if self.c.len() == 1 {
            Value::String(self.c[0].encode())
        } else {
            Value::Array(self.c.iter().map(|q| Value::String(q.encode())).collect())
        }
    }

    pub fn from_json(f: &Field, v: &Value) -> Result<Elem> {
        f.parse_coeff(v)
    }

    /// Human readable form: small integers and basis names b1, b2, ...
    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms = vec![];
        for (k, q) in self.c.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let coeff = match q.to_small_int() {
                Some(n) => n.to_string(),
                None => match q.valuation() {
                    Some(v) if v < 0 => {
                        let scaled = q.shift(-v);
                        match scaled.to_small_int() {
                            Some(n) => format!("{n}/{}^{}", q.prime(), -v),
                            None => q.encode(),
                        }
                    }
                    _ => q.encode(),
                },
            };
            if k == 0 {
                terms.push(coeff);
            } else {
                terms.push(format!("{coeff}*b{k}"));
            }
        }
        terms.join(" + ")
    }

    /// Residue digits as a big integer pair, for hashing/fingerprints.
    pub fn fingerprint(&self) -> Vec<(i64, BigUint)> {
        self.c.iter().map(|q| (q.val_bound(), q.unit().clone())).collect()
    }
}

impl Scalar for Elem {
    fn zero_like(&self) -> Self {
        self.f.zero()
    }
    fn one_like(&self) -> Self {
        self.f.one()
    }
    fn from_int_like(&self, n: i64) -> Self {
        self.f.int(n)
    }
    fn add(&self, o: &Self) -> Self {
        Elem::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Elem::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Elem::mul(self, o)
    }
    fn neg(&self) -> Self {
        Elem::neg(self)
    }
    fn inv(&self) -> Result<Self> {
        Elem::inv(self)
    }
    fn is_zero(&self) -> bool {
        Elem::is_zero(self)
    }
    fn pivot_key(&self) -> i64 {
        self.valuation().unwrap_or(INF)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_example() -> (Field, Field) {
        let spec = FieldSpec::qp(3)
            .step(StepKind::Unramified, &[-5, 0, 1])
            .step(StepKind::Eisenstein, &[-3, 0, 1])
            .conjugate(Some(0));
        let e = Field::new(&spec, None).unwrap();
        let f = e.prefix(1);
        (e, f)
    }

    #[test]
    fn q3_basics() {
        let f = Field::qp(3, 24).unwrap();
        assert_eq!((f.e(), f.f()), (1, 1));
        assert_eq!(f.pi().valuation(), Some(1));
        assert_eq!(f.zero().valuation(), None);
    }

    #[test]
    fn example_tower_invariants() {
        let (e, f) = trace_example();
        assert_eq!((e.e(), e.f()), (2, 2));
        assert_eq!((f.e(), f.f()), (1, 2));
        let s3 = e.generator(1);
        assert_eq!(s3.valuation(), Some(1));
        assert!(s3.trace_to(&f).is_zero());
        let t = e.int(3).trace_to(&f);
        assert!(t.sub(&f.int(6)).is_zero());
        // rho fixes sqrt 3 and negates sqrt 5
        let s5 = e.generator(0);
        assert!(s5.rho().add(&s5).is_zero());
        assert!(s3.rho().sub(&s3).is_zero());
    }

    #[test]
    fn inverse_in_tower() {
        let (e, _) = trace_example();
        let x = e.generator(0).add(&e.generator(1)).add(&e.int(7));
        let y = x.inv().unwrap();
        assert!(x.mul(&y).sub(&e.one()).is_zero());
        let z = e.generator(1).inv().unwrap();
        assert_eq!(z.valuation(), Some(-1));
    }

    #[test]
    fn tag_checks() {
        let bad = FieldSpec::qp(3).step(StepKind::Unramified, &[-1, 0, 1]);
        assert!(matches!(Field::new(&bad, None), Err(Error::TagMismatch(_))));
        let wild = FieldSpec::qp(3).step(StepKind::Eisenstein, &[-3, 0, 0, 1]);
        assert!(matches!(Field::new(&wild, None), Err(Error::WildExtension)));
        assert!(matches!(Field::new(&FieldSpec::qp(2), None), Err(Error::EvenPrime(2))));
    }

    #[test]
    fn square_roots_hensel() {
        let f = Field::qp(3, 24).unwrap();
        let r = f.int(10).sqrt().unwrap().unwrap();
        assert!(r.mul(&r).sub(&f.int(10)).is_zero());
        assert!(f.int(2).sqrt().unwrap().is_none());
    }
}
