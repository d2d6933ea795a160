//! ε-hermitian forms h(v, w) = ρ(v)ᵀ G w: adjoints, twists, invariants,
//! canonical bases and E-valued lifts.

use std::collections::HashMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::fmat::{self, FMat};
use crate::arith::{Elem, Field};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Quadratic,
    Symplectic,
    Hermitian,
    /// ε = −1 with ρ non-trivial, classified after a twist by a skew scalar
    SkewHermitian,
}

pub fn kind_of(field: &Field, eps: i32) -> Kind {
    match (field.has_rho(), eps) {
        (false, 1) => Kind::Quadratic,
        (false, _) => Kind::Symplectic,
        (true, 1) => Kind::Hermitian,
        (true, _) => Kind::SkewHermitian,
    }
}

/// Complete isometry invariant within a fixed (F, ρ, ε).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FormClass {
    Quadratic { rank: usize, det_odd: bool, det_nonsquare: bool, hasse: i32 },
    Hermitian { rank: usize, det_norm: bool },
    Symplectic { rank: usize },
}

impl FormClass {
    pub fn rank(&self) -> usize {
        match self {
            FormClass::Quadratic { rank, .. } | FormClass::Hermitian { rank, .. } | FormClass::Symplectic { rank } => *rank,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HermForm {
    field: Field,
    eps: i32,
    gram: FMat,
}

impl HermForm {
    pub fn new(field: &Field, eps: i32, gram: FMat) -> Result<HermForm> {
        if eps != 1 && eps != -1 {
            return Err(Error::Schema("epsilon must be 1 or -1".into()));
        }
        if !gram.is_square() {
            return Err(Error::Schema("Gram matrix must be square".into()));
        }
        let st = fmat::star(&gram);
        let target = if eps == 1 { gram.clone() } else { gram.neg() };
        if !st.eq_approx(&target) {
            return Err(Error::NotSelfAdjoint);
        }
        if gram.rows > 0 && gram.det()?.is_zero() {
            return Err(Error::SingularBasis);
        }
        Ok(HermForm { field: field.clone(), eps, gram })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn eps(&self) -> i32 {
        self.eps
    }
    pub fn gram(&self) -> &FMat {
        &self.gram
    }
    pub fn dim(&self) -> usize {
        self.gram.rows
    }
    pub fn kind(&self) -> Kind {
        kind_of(&self.field, self.eps)
    }

    pub fn eval(&self, v: &[Elem], w: &[Elem]) -> Elem {
        let gw = self.gram.mul_vec(w);
        v.iter().zip(&gw).fold(self.field.zero(), |acc, (a, b)| acc.add(&a.rho().mul(b)))
    }

    /// Gram matrix of the vectors in the columns of p.
    pub fn transport(&self, p: &FMat) -> FMat {
        fmat::star(p).mul(&self.gram).mul(p)
    }

    /// σ_h(x) = G⁻¹ ρ(x)ᵀ G.
    pub fn adjoint(&self, x: &FMat) -> Result<FMat> {
        Ok(self.gram.inverse()?.mul(&fmat::star(x)).mul(&self.gram))
    }

    /// σ_{h,h'}(f) for f: V → V', characterized by h'(f v, w) = h(v, σ(f) w).
    pub fn adjoint_to(&self, other: &HermForm, f: &FMat) -> Result<FMat> {
        Ok(self.gram.inverse()?.mul(&fmat::star(f)).mul(&other.gram))
    }

    /// Does g: (V, self) → (V', other) preserve the forms?
    pub fn is_isometry_to(&self, other: &HermForm, g: &FMat) -> bool {
        other.transport(g).eq_approx(&self.gram)
    }

    pub fn is_isometry(&self, g: &FMat) -> bool {
        self.is_isometry_to(self, g)
    }

    /// +1 if σ(x) = x, −1 if σ(x) = −x, otherwise `None`.
    pub fn symmetry_sign(&self, x: &FMat) -> Result<Option<i32>> {
        let s = self.adjoint(x)?;
        if s.eq_approx(x) {
            Ok(Some(1))
        } else if s.eq_approx(&x.neg()) {
            Ok(Some(-1))
        } else {
            Ok(None)
        }
    }

    /// h_γ(v, w) = h(v, γ w); the sign flips when γ is skew.
    pub fn twist(&self, gamma: &FMat) -> Result<HermForm> {
        let sign = self.symmetry_sign(gamma)?.ok_or(Error::NotSelfAdjoint)?;
        if gamma.det()?.is_zero() {
            return Err(Error::SingularBasis);
        }
        HermForm::new(&self.field, self.eps * sign, self.gram.mul(gamma))
    }

    pub fn twist_scalar(&self, c: &Elem) -> Result<HermForm> {
        let n = self.dim();
        self.twist(&fmat::identity(&self.field, n).scale(c))
    }

    pub fn direct_sum(&self, o: &HermForm) -> Result<HermForm> {
        if self.eps != o.eps || self.field != o.field {
            return Err(Error::ContextMismatch);
        }
        let (n, m) = (self.dim(), o.dim());
        let mut g = fmat::zeros(&self.field, n + m, n + m);
        for i in 0..n {
            for j in 0..n {
                g.set(i, j, self.gram.get(i, j).clone());
            }
        }
        for i in 0..m {
            for j in 0..m {
                g.set(n + i, n + j, o.gram.get(i, j).clone());
            }
        }
        HermForm::new(&self.field, self.eps, g)
    }

    /// The ε = +1 form used for classification, with the scalar used.
    fn untwisted(&self) -> Result<(HermForm, Option<Elem>)> {
        if self.kind() != Kind::SkewHermitian {
            return Ok((self.clone(), None));
        }
        let s = skew_scalar(&self.field)?;
        Ok((HermForm { field: self.field.clone(), eps: 1, gram: self.gram.scale(&s) }, Some(s)))
    }

    pub fn classify(&self) -> Result<FormClass> {
        let f = &self.field;
        let n = self.dim();
        match self.kind() {
            Kind::Symplectic => Ok(FormClass::Symplectic { rank: n }),
            Kind::Quadratic => {
                let (_, d) = diagonalize(self)?;
                Ok(quadratic_class(f, &d)?)
            }
            Kind::Hermitian | Kind::SkewHermitian => {
                let (h, _) = self.untwisted()?;
                let det = if n == 0 { f.one() } else { h.gram.det()? };
                Ok(FormClass::Hermitian { rank: n, det_norm: f.is_norm(&det)? })
            }
        }
    }

    pub fn is_isometric(&self, o: &HermForm) -> Result<bool> {
        if self.eps != o.eps || self.field != o.field {
            return Err(Error::ContextMismatch);
        }
        Ok(self.classify()? == o.classify()?)
    }

    /// Basis (columns) whose Gram matrix depends only on the isometry
    /// class: hyperbolic planes ⟨1, −1⟩ followed by a fixed anisotropic
    /// diagonal (symplectic: standard pairs).  Returns (basis, Gram).
    pub fn canonical_basis(&self) -> Result<(FMat, FMat)> {
        let f = &self.field;
        let n = self.dim();
        if self.kind() == Kind::Symplectic {
            let p = symplectic_basis(self)?;
            return Ok((p.clone(), self.transport(&p)));
        }
        let (h, s) = self.untwisted()?;
        let table = AnisoTable::new(f, h.kind())?;
        let cls = h.classify()?;
        let target = table.canonical_diagonal(&cls)?;
        debug_assert_eq!(target.len(), n);
        let p = represent_diagonal(&h, &target, &table)?;
        let mut c = fmat::diag(f, &target);
        if let Some(s) = s {
            c = c.scale(&s.inv()?);
        }
        Ok((p, c))
    }

    /// An isometry g: (V, self) → (V', other), if the forms are isometric.
    pub fn isometry_to(&self, other: &HermForm) -> Result<FMat> {
        if !self.is_isometric(other)? {
            return Err(Error::HypothesisFailed("forms are not isometric".into()));
        }
        let (p, _) = self.canonical_basis()?;
        let (q, _) = other.canonical_basis()?;
        let g = q.mul(&p.inverse()?);
        if !self.is_isometry_to(other, &g) {
            return Err(Error::PrecisionExhausted("isometry check failed after canonical bases".into()));
        }
        Ok(g)
    }

    /// Witt decomposition: hyperbolic pairs (x, y) with h(x, y) = 1, h(x,x) =
    /// h(y,y) = 0, then the anisotropic tail.
    pub fn witt_decompose(&self) -> Result<WittBasis> {
        let f = &self.field;
        let n = self.dim();
        if self.kind() == Kind::Symplectic {
            let p = symplectic_basis(self)?;
            return Ok(WittBasis { basis: p, planes: n / 2, tail: 0 });
        }
        let (p, c) = self.canonical_basis()?;
        let (_, s) = self.untwisted()?;
        let table = AnisoTable::new(f, if self.kind() == Kind::Quadratic { Kind::Quadratic } else { Kind::Hermitian })?;
        let k = table.aniso_dim(&self.untwisted()?.0.classify()?)?;
        let planes = (n - k) / 2;
        let half = f.rational(1, 2)?;
        let mut b = p.clone();
        for t in 0..planes {
            let (i, j) = (2 * t, 2 * t + 1);
            let a = p.col(i);
            let bb = p.col(j);
            // ⟨c, −c⟩ with c = 1 (or s⁻¹ after untwisting)
            let cval = c.get(i, i).clone();
            let x: Vec<Elem> = a.iter().zip(&bb).map(|(u, v)| u.add(v)).collect();
            let sc = half.mul(&cval.inv()?);
            let y: Vec<Elem> = a.iter().zip(&bb).map(|(u, v)| u.sub(v).mul(&sc)).collect();
            for r in 0..n {
                b.set(r, i, x[r].clone());
                b.set(r, j, y[r].clone());
            }
        }
        let _ = s;
        Ok(WittBasis { basis: b, planes, tail: k })
    }

    pub fn to_json(&self) -> Value {
        json!({ "epsilon": self.eps, "gram": fmat::to_json(&self.gram) })
    }

    pub fn from_json(field: &Field, v: &Value) -> Result<HermForm> {
        let eps = v.get("epsilon").and_then(|e| e.as_i64()).ok_or_else(|| Error::Schema("form needs an integer epsilon".into()))?;
        let g = v.get("gram").ok_or_else(|| Error::Schema("form needs a gram matrix".into()))?;
        HermForm::new(field, eps as i32, fmat::square_from_json(field, g)?)
    }
}

#[derive(Clone, Debug)]
pub struct WittBasis {
    pub basis: FMat,
    pub planes: usize,
    pub tail: usize,
}

/// The fixed skew scalar used to pass between ε = −1 and ε = +1.
pub fn skew_scalar(f: &Field) -> Result<Elem> {
    f.skew_element().ok_or_else(|| Error::UnsupportedContext("no skew scalar without an involution".into()))
}

fn quadratic_class(f: &Field, d: &[Elem]) -> Result<FormClass> {
    let det = d.iter().fold(f.one(), |a, x| a.mul(x));
    let (odd, ns) = f.square_class(&det)?;
    let mut hasse = 1;
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            hasse *= f.hilbert(&d[i], &d[j])?;
        }
    }
    Ok(FormClass::Quadratic { rank: d.len(), det_odd: odd, det_nonsquare: ns, hasse })
}

/// Class of a diagonal form ⟨d⟩ of the given ε = +1 kind.
pub fn diagonal_class(f: &Field, kind: Kind, d: &[Elem]) -> Result<FormClass> {
    match kind {
        Kind::Quadratic => quadratic_class(f, d),
        Kind::Hermitian => {
            let det = d.iter().fold(f.one(), |a, x| a.mul(x));
            Ok(FormClass::Hermitian { rank: d.len(), det_norm: f.is_norm(&det)? })
        }
        _ => Err(Error::UnsupportedContext("diagonal classes exist only for ε = +1".into())),
    }
}

/// Orthogonal basis for an ε = +1 form (columns of P) and its diagonal.
pub fn diagonalize(h: &HermForm) -> Result<(FMat, Vec<Elem>)> {
    let f = h.field().clone();
    let n = h.dim();
    if h.eps() != 1 {
        return Err(Error::UnsupportedContext("diagonalization needs ε = +1".into()));
    }
    let mut mix = vec![f.one()];
    if let Some(s) = f.skew_element() {
        mix.push(s);
    }
    if let Some(k) = f.0.rho_step {
        mix.push(f.generator(k));
    }
    let mut basis: Vec<Vec<Elem>> = (0..n).map(|i| (0..n).map(|r| if r == i { f.one() } else { f.zero() }).collect()).collect();
    let mut out_b = vec![];
    let mut out_d = vec![];
    while !basis.is_empty() {
        // best pivot among diagonal values and mixed pairs
        let mut best: Option<(i64, Vec<Elem>, usize)> = None;
        let m = basis.len();
        for i in 0..m {
            let v = h.eval(&basis[i], &basis[i]);
            if let Some(val) = v.valuation() {
                if best.as_ref().map_or(true, |b| val < b.0) {
                    best = Some((val, basis[i].clone(), i));
                }
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                for c in &mix {
                    let w: Vec<Elem> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a.add(&b.mul(c))).collect();
                    let v = h.eval(&w, &w);
                    if let Some(val) = v.valuation() {
                        if best.as_ref().map_or(true, |b| val < b.0) {
                            best = Some((val, w, i));
                        }
                    }
                }
            }
        }
        let Some((_, w, drop)) = best else {
            return Err(Error::PrecisionExhausted("no anisotropic pivot found".into()));
        };
        let c = h.eval(&w, &w);
        let cinv = c.inv()?;
        let mut rest = vec![];
        for (k, b) in basis.iter().enumerate() {
            if k == drop {
                continue;
            }
            let t = h.eval(&w, b).mul(&cinv);
            rest.push(b.iter().zip(&w).map(|(x, y)| x.sub(&y.mul(&t))).collect());
        }
        out_b.push(w);
        out_d.push(c);
        basis = rest;
    }
    let p = if n == 0 { fmat::zeros(&f, 0, 0) } else { crate::arith::Mat::from_cols(&out_b, &f.zero()) };
    Ok((p, out_d))
}

fn symplectic_basis(h: &HermForm) -> Result<FMat> {
    let f = h.field().clone();
    let n = h.dim();
    let mut basis: Vec<Vec<Elem>> = (0..n).map(|i| (0..n).map(|r| if r == i { f.one() } else { f.zero() }).collect()).collect();
    let mut out = vec![];
    while !basis.is_empty() {
        let m = basis.len();
        let mut best: Option<(i64, usize, usize)> = None;
        for i in 0..m {
            for j in i + 1..m {
                if let Some(v) = h.eval(&basis[i], &basis[j]).valuation() {
                    if best.map_or(true, |b| v < b.0) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((_, i, j)) = best else {
            return Err(Error::PrecisionExhausted("degenerate symplectic form".into()));
        };
        let x = basis[i].clone();
        let a = h.eval(&x, &basis[j]).inv()?;
        let y: Vec<Elem> = basis[j].iter().map(|t| t.mul(&a)).collect();
        // w − x h(y,w)·ε⁻¹... with h(x,y) = 1, h(y,x) = −1
        let mut rest = vec![];
        for (k, b) in basis.iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            let c2 = h.eval(&x, b);
            let c1 = h.eval(&y, b).neg();
            rest.push((0..n).map(|r| b[r].sub(&x[r].mul(&c1)).sub(&y[r].mul(&c2))).collect());
        }
        out.push(x);
        out.push(y);
        basis = rest;
    }
    Ok(if n == 0 { fmat::zeros(&f, 0, 0) } else { crate::arith::Mat::from_cols(&out, &f.zero()) })
}

/// Anisotropic representatives and the classes of their hyperbolic
/// extensions, for an ε = +1 kind.
#[derive(Clone, Debug)]
pub struct AnisoTable {
    pub field: Field,
    pub kind: Kind,
    /// diagonal representatives of the anisotropic classes
    pub reps: Vec<Vec<Elem>>,
    pub classes: Vec<FormClass>,
    index: HashMap<FormClass, usize>,
}

impl AnisoTable {
    pub fn new(field: &Field, kind: Kind) -> Result<AnisoTable> {
        let f = field;
        let letters: Vec<Elem> = match kind {
            Kind::Quadratic => {
                let d = f.nonsquare_unit();
                let pi = f.pi();
                vec![f.one(), d.clone(), pi.clone(), d.mul(&pi)]
            }
            Kind::Hermitian => vec![f.one(), non_norm(f)?],
            _ => return Err(Error::UnsupportedContext("anisotropic tables need ε = +1".into())),
        };
        let max_dim = if kind == Kind::Quadratic { 4 } else { 2 };
        let mut reps: Vec<Vec<Elem>> = vec![vec![]];
        let mut classes = vec![diagonal_class(f, kind, &[])?];
        let mut index = HashMap::new();
        index.insert(classes[0].clone(), 0);
        // multisets of letters, by increasing size
        let mut layer: Vec<Vec<usize>> = vec![vec![]];
        for k in 1..=max_dim {
            let mut next = vec![];
            for m in &layer {
                let start = m.last().copied().unwrap_or(0);
                for l in start..letters.len() {
                    let mut mm = m.clone();
                    mm.push(l);
                    next.push(mm);
                }
            }
            for m in &next {
                let d: Vec<Elem> = m.iter().map(|&l| letters[l].clone()).collect();
                let c = diagonal_class(f, kind, &d)?;
                if index.contains_key(&c) {
                    continue;
                }
                // isotropic iff the class is a smaller anisotropic class plus planes
                let isotropic = (0..reps.len()).any(|i| {
                    reps[i].len() + 2 <= k && (k - reps[i].len()) % 2 == 0 && {
                        let e = with_planes(f, &reps[i], (k - reps[i].len()) / 2);
                        diagonal_class(f, kind, &e).map_or(false, |ce| ce == c)
                    }
                });
                if !isotropic {
                    index.insert(c.clone(), reps.len());
                    reps.push(d);
                    classes.push(c);
                }
            }
            layer = next;
        }
        Ok(AnisoTable { field: f.clone(), kind, reps, classes, index })
    }

    /// Index of the anisotropic class Witt-equivalent to a class.
    pub fn anisotropic_part(&self, c: &FormClass) -> Result<usize> {
        let n = c.rank();
        for (i, r) in self.reps.iter().enumerate() {
            if r.len() > n || (n - r.len()) % 2 != 0 {
                continue;
            }
            let e = with_planes(&self.field, r, (n - r.len()) / 2);
            if diagonal_class(&self.field, self.kind, &e)? == *c {
                return Ok(i);
            }
        }
        Err(Error::PrecisionExhausted("class matches no anisotropic representative".into()))
    }

    pub fn aniso_dim(&self, c: &FormClass) -> Result<usize> {
        Ok(self.reps[self.anisotropic_part(c)?].len())
    }

    pub fn canonical_diagonal(&self, c: &FormClass) -> Result<Vec<Elem>> {
        let i = self.anisotropic_part(c)?;
        let r = &self.reps[i];
        Ok(with_planes(&self.field, r, (c.rank() - r.len()) / 2))
    }

    pub fn is_anisotropic_diag(&self, d: &[Elem]) -> Result<bool> {
        let c = diagonal_class(&self.field, self.kind, d)?;
        Ok(self.index.contains_key(&c) && self.reps[self.index[&c]].len() == d.len())
    }
}

/// ⟨1, −1⟩^m followed by r.
fn with_planes(f: &Field, r: &[Elem], m: usize) -> Vec<Elem> {
    let mut out = vec![];
    for _ in 0..m {
        out.push(f.one());
        out.push(f.int(-1));
    }
    out.extend(r.iter().cloned());
    out
}

/// A symmetric element of F_0 which is not a norm from F.
pub fn non_norm(f: &Field) -> Result<Elem> {
    let d = f.nonsquare_unit();
    if !f.is_norm(&d)? {
        return Ok(d);
    }
    let pi = f.pi();
    let cands = [pi.clone(), pi.mul(&pi).mul(&d), pi.mul(&pi).mul(&pi)];
    for c in cands {
        if c.rho().sub(&c).is_zero() && !f.is_norm(&c)? {
            return Ok(c);
        }
    }
    Err(Error::UnsupportedContext("no non-norm found".into()))
}

/// Residue lifts times small powers of π: the search space for solving
/// representation problems.
fn candidates(f: &Field, center: i64) -> Vec<Elem> {
    let rf = f.residue_field();
    let units: Vec<Elem> = rf.elements().filter(|x| !x.is_zero_ff()).map(|x| f.lift(&x)).collect();
    let mut out = vec![];
    for k in [center, center - 1, center + 1] {
        let pk = f.pi_pow(k);
        for u in &units {
            out.push(u.mul(&pk));
        }
    }
    if let Some(s) = f.skew_element() {
        let pk = f.pi_pow(center);
        for u in &units {
            for w in &units {
                out.push(u.add(&w.mul(&s)).mul(&pk));
            }
        }
    }
    out
}

/// x with x·ρ(x) = a, for a symmetric and a norm.
pub fn norm_solve(f: &Field, a: &Elem) -> Result<Option<Elem>> {
    if !f.has_rho() {
        return a.sqrt();
    }
    if !f.is_norm(a)? {
        return Ok(None);
    }
    let rf = f.residue_field();
    let mut cands: Vec<Elem> = rf.elements().filter(|x| !x.is_zero_ff()).map(|x| f.lift(&x)).collect();
    if let Some(s) = f.skew_element() {
        let more: Vec<Elem> = cands.iter().map(|c| c.mul(&s)).collect();
        cands.extend(more);
        cands.push(s.add(&f.one()));
    }
    if let Some(k) = f.0.rho_step {
        let g = f.generator(k);
        cands.push(g.clone());
        cands.push(g.add(&f.one()));
    }
    for c in cands {
        let nc = c.mul(&c.rho());
        if nc.is_zero() {
            continue;
        }
        let b = a.div(&nc)?;
        if let Some(r) = b.sqrt()? {
            if r.rho().sub(&r).is_zero() {
                return Ok(Some(c.mul(&r)));
            }
        }
    }
    Ok(None)
}

/// Is c represented by ⟨d⟩ (d diagonal, ε = +1 kind)?
fn representable(t: &AnisoTable, d: &[Elem], c: &Elem) -> Result<bool> {
    let f = &t.field;
    if d.is_empty() {
        return Ok(false);
    }
    if d.len() == 1 {
        let q = c.div(&d[0])?;
        return Ok(match t.kind {
            Kind::Quadratic => q.is_square()?,
            _ => q.rho().sub(&q).is_zero() && f.is_norm(&q)?,
        });
    }
    let mut e = d.to_vec();
    e.push(c.neg());
    Ok(!t.is_anisotropic_diag(&e)?)
}

/// Solve Σ ρ(x_i) d_i x_i = c.
fn represent(t: &AnisoTable, d: &[Elem], c: &Elem) -> Result<Option<Vec<Elem>>> {
    let f = &t.field;
    if !representable(t, d, c)? {
        return Ok(None);
    }
    let k = d.len();
    if k == 1 {
        let q = c.div(&d[0])?;
        return Ok(norm_solve(f, &q)?.map(|x| vec![x]));
    }
    if let Some(mut x) = represent(t, &d[..k - 1], c)? {
        x.push(f.zero());
        return Ok(Some(x));
    }
    let vc = c.valuation().unwrap_or(0);
    let vd = d[k - 1].valuation().unwrap_or(0);
    let center = (vc - vd).div_euclid(2);
    for y in candidates(f, center) {
        let rest = c.sub(&y.rho().mul(&d[k - 1]).mul(&y));
        if rest.is_zero() {
            continue;
        }
        if !representable(t, &d[..k - 1], &rest)? {
            continue;
        }
        if let Some(mut x) = represent(t, &d[..k - 1], &rest)? {
            x.push(y);
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Basis P of V with ρ(P)ᵀ G P = diag(target), built by representing the
/// target values one at a time and splitting them off.
fn represent_diagonal(h: &HermForm, target: &[Elem], t: &AnisoTable) -> Result<FMat> {
    let f = h.field().clone();
    let n = h.dim();
    if n == 0 {
        return Ok(fmat::zeros(&f, 0, 0));
    }
    let mut space: Vec<Vec<Elem>> = (0..n).map(|i| (0..n).map(|r| if r == i { f.one() } else { f.zero() }).collect()).collect();
    let mut out = vec![];
    for c in target {
        let sub = crate::arith::Mat::from_cols(&space, &f.zero());
        let hs = HermForm { field: f.clone(), eps: 1, gram: h.transport(&sub) };
        let (p, d) = diagonalize(&hs)?;
        let x = represent(t, &d, c)?.ok_or_else(|| Error::PrecisionExhausted("no representation found for a canonical value".into()))?;
        let coords = p.mul_vec(&x);
        let v = sub.mul_vec(&coords);
        let j0 = (0..coords.len()).filter(|&j| !coords[j].is_zero()).min_by_key(|&j| coords[j].valuation().unwrap()).unwrap();
        let cinv = c.inv()?;
        let mut rest = vec![];
        for (j, w) in space.iter().enumerate() {
            if j == j0 {
                continue;
            }
            let s = h.eval(&v, w).mul(&cinv);
            rest.push(w.iter().zip(&v).map(|(a, b)| a.sub(&b.mul(&s))).collect());
        }
        out.push(v);
        space = rest;
    }
    Ok(crate::arith::Mat::from_cols(&out, &f.zero()))
}

/// How λ: E → F is specified.
#[derive(Clone, Debug)]
pub enum Lambda {
    Trace,
    /// x ↦ tr(z x) for a symmetric z ∈ E^×
    TwistedTrace(Elem),
}

impl Lambda {
    pub fn apply(&self, x: &Elem, sub: &Field) -> Elem {
        match self {
            Lambda::Trace => x.trace_to(sub),
            Lambda::TwistedTrace(z) => z.mul(x).trace_to(sub),
        }
    }
}

/// F-basis b_t of E over the prefix field F.
pub fn relative_basis(e: &Field, f: &Field) -> Vec<Elem> {
    let ds = f.degree();
    (0..e.degree() / ds).map(|t| e.basis(t * ds)).collect()
}

/// The F-form λ ∘ h̃ on E^m, in the F-basis (b_t e_i) ordered by i then t.
pub fn trace_form(ht: &HermForm, f: &Field, lambda: &Lambda) -> Result<HermForm> {
    let e = ht.field();
    let b = relative_basis(e, f);
    let d = b.len();
    let m = ht.dim();
    let mut g = fmat::zeros(f, m * d, m * d);
    for i in 0..m {
        for t in 0..d {
            for j in 0..m {
                for u in 0..d {
                    let x = b[t].rho().mul(ht.gram().get(i, j)).mul(&b[u]);
                    g.set(i * d + t, j * d + u, lambda.apply(&x, f));
                }
            }
        }
    }
    HermForm::new(f, ht.eps(), g)
}

/// The E-valued form h^φ with λ ∘ h^φ = h, where φ(b_t) are the matrices of
/// the F-basis of E acting on V.  Returns an E-basis of V (as F-vectors,
/// columns) and the E-Gram matrix in that basis.
pub fn lift_form_over_e(h: &HermForm, e: &Field, phi_basis: &[FMat], lambda: &Lambda) -> Result<(FMat, HermForm)> {
    let f = h.field();
    let b = relative_basis(e, f);
    let d = b.len();
    if phi_basis.len() != d {
        return Err(Error::Schema("one matrix per basis element of E is required".into()));
    }
    // λ-dual basis: λ(b_t b*_u) = δ_tu
    let mut pair = fmat::zeros(f, d, d);
    for t in 0..d {
        for u in 0..d {
            pair.set(t, u, lambda.apply(&b[t].mul(&b[u]), f));
        }
    }
    if pair.det()?.is_zero() {
        return Err(Error::DegenerateTracePairing);
    }
    let pinv = pair.inverse()?;
    let dual: Vec<Elem> = (0..d)
        .map(|u| (0..d).fold(e.zero(), |acc, t| acc.add(&e.embed(pinv.get(t, u)).mul(&b[t]))))
        .collect();
    // E-basis of V: greedily extend while the F-span grows
    let n = h.dim();
    if n % d != 0 {
        return Err(Error::Schema("dimension is not divisible by [E:F]".into()));
    }
    let mut chosen: Vec<Vec<Elem>> = vec![];
    let mut span: Vec<Vec<Elem>> = vec![];
    for i in 0..n {
        if span.len() == n {
            break;
        }
        let w: Vec<Elem> = (0..n).map(|r| if r == i { f.one() } else { f.zero() }).collect();
        let mut trial = span.clone();
        for m in phi_basis {
            trial.push(m.mul_vec(&w));
        }
        let tm = crate::arith::Mat::from_rows(trial.clone(), &f.zero());
        if tm.rank()? == trial.len() {
            span = trial;
            chosen.push(w);
        }
    }
    if span.len() != n {
        return Err(Error::HypothesisFailed("φ does not make V a free E-module".into()));
    }
    let m = chosen.len();
    let mut g = fmat::zeros(e, m, m);
    for k in 0..m {
        for l in 0..m {
            let mut acc = e.zero();
            for u in 0..d {
                let hv = h.eval(&chosen[k], &phi_basis[u].mul_vec(&chosen[l]));
                acc = acc.add(&e.embed(&hv).mul(&dual[u]));
            }
            g.set(k, l, acc);
        }
    }
    let basis = crate::arith::Mat::from_cols(&chosen, &f.zero());
    Ok((basis, HermForm::new(e, h.eps(), g)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{FieldSpec, StepKind};

    fn q3() -> Field {
        Field::qp(3, 24).unwrap()
    }

    fn diag_form(f: &Field, d: &[i64]) -> HermForm {
        let e: Vec<Elem> = d.iter().map(|&x| f.int(x)).collect();
        HermForm::new(f, 1, fmat::diag(f, &e)).unwrap()
    }

    #[test]
    fn identity_gram_adjoint_is_transpose() {
        let f = q3();
        let h = diag_form(&f, &[1, 1]);
        let x = fmat::from_ints(&f, &[&[1, 2], &[3, 4]]);
        assert!(h.adjoint(&x).unwrap().eq_approx(&x.transpose()));
    }

    #[test]
    fn symplectic_adjoint() {
        let f = q3();
        let j = fmat::from_ints(&f, &[&[0, 1], &[-1, 0]]);
        let h = HermForm::new(&f, -1, j.clone()).unwrap();
        let x = fmat::from_ints(&f, &[&[1, 2], &[3, 4]]);
        let expect = j.mul(&x.transpose()).mul(&j).neg();
        assert!(h.adjoint(&x).unwrap().eq_approx(&expect));
    }

    #[test]
    fn square_scaling_and_permutation() {
        let f = q3();
        assert!(diag_form(&f, &[1, 1]).is_isometric(&diag_form(&f, &[4, 4])).unwrap());
        assert!(diag_form(&f, &[1, 2]).is_isometric(&diag_form(&f, &[2, 1])).unwrap());
        assert!(!diag_form(&f, &[1, 1]).is_isometric(&diag_form(&f, &[1, 2])).unwrap());
    }

    #[test]
    fn witt_decompose_hyperbolic_and_anisotropic() {
        let f = q3();
        let w = diag_form(&f, &[1, -1]).witt_decompose().unwrap();
        assert_eq!((w.planes, w.tail), (1, 0));
        let w = diag_form(&f, &[1, 1, -3, 6]).witt_decompose().unwrap();
        assert_eq!((w.planes, w.tail), (0, 4));
    }

    #[test]
    fn canonical_isometry_between_isometric_forms() {
        let f = q3();
        let a = diag_form(&f, &[1, 2, 3, 5]);
        let g0 = fmat::from_ints(&f, &[&[1, 1, 0, 2], &[0, 1, 3, 0], &[1, 0, 1, 1], &[0, 2, 0, 1]]);
        let b = HermForm::new(&f, 1, a.transport(&g0)).unwrap();
        let g = b.isometry_to(&a).unwrap();
        assert!(b.is_isometry_to(&a, &g));
    }

    #[test]
    fn hermitian_unramified() {
        let spec = FieldSpec::qp(3).step(StepKind::Unramified, &[-5, 0, 1]).conjugate(None);
        let f = Field::new(&spec, Some(20)).unwrap();
        let h = diag_form(&f, &[1, 3]);
        let h2 = diag_form(&f, &[3, 1]);
        assert!(h.is_isometric(&h2).unwrap());
        let g = h.isometry_to(&diag_form(&f, &[1, 3])).unwrap();
        assert!(h.is_isometry(&g));
        assert!(!diag_form(&f, &[1, 1]).is_isometric(&diag_form(&f, &[1, 3])).unwrap());
    }

    #[test]
    fn lift_form_recovers_sqrt3() {
        let spec = FieldSpec::qp(3).step(StepKind::Unramified, &[-5, 0, 1]).step(StepKind::Eisenstein, &[-3, 0, 1]).conjugate(Some(0));
        let e = Field::new(&spec, Some(20)).unwrap();
        let f = e.prefix(1);
        let h = HermForm::new(&f, 1, fmat::from_ints(&f, &[&[0, 6], &[6, 0]])).unwrap();
        let phi: Vec<FMat> = relative_basis(&e, &f).iter().map(|b| b.relative_matrix(&f)).collect();
        let (_, hphi) = lift_form_over_e(&h, &e, &phi, &Lambda::Trace).unwrap();
        let sqrt3 = e.generator(1);
        assert!(hphi.gram().get(0, 0).sub(&sqrt3).is_zero());
        let back = trace_form(&hphi, &f, &Lambda::Trace).unwrap();
        assert!(back.gram().eq_approx(h.gram()));
    }
    #[test]
    fn skew_hermitian_ramified() {
        let spec = FieldSpec::qp(3).step(StepKind::Eisenstein, &[-3, 0, 1]).conjugate(None);
        let f = Field::new(&spec, Some(20)).unwrap();
        let pi = f.pi();
        let one = f.one();
        let z = f.zero();
        let g = fmat::diag(&f, &[pi.clone(), pi.clone()]);
        let h = HermForm::new(&f, -1, g).unwrap();
        let mut a = fmat::zeros(&f, 2, 2);
        a.set(0, 1, one.clone());
        a.set(1, 0, one.neg());
        let _ = z;
        let h2 = HermForm::new(&f, -1, a).unwrap();
        let same = h.is_isometric(&h2).unwrap();
        if same {
            let g = h.isometry_to(&h2).unwrap();
            assert!(h.is_isometry_to(&h2, &g));
        }
        let g = h.isometry_to(&h).unwrap();
        assert!(h.is_isometry(&g));
    }

    #[test]
    fn symplectic_isometry() {
        let f = q3();
        let j = fmat::from_ints(&f, &[&[0, 3, 0, 0], &[-3, 0, 0, 1], &[0, 0, 0, 9], &[0, -1, -9, 0]]);
        let a = HermForm::new(&f, -1, j).unwrap();
        let b = HermForm::new(&f, -1, fmat::from_ints(&f, &[&[0, 1, 0, 0], &[-1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, -1, 0]])).unwrap();
        let g = a.isometry_to(&b).unwrap();
        assert!(a.is_isometry_to(&b, &g));
    }
}
