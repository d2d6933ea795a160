//! Witt groups W_{ρ,ε}(F) as explicit finite tables, and the trace map
//! Tr_λ: W_{ρ',ε}(E) → W_{ρ,ε}(F).

use serde_json::{json, Value};

use crate::arith::fmat;
use crate::arith::{Elem, Field};
use crate::error::{Error, Result};
use crate::forms::{self, AnisoTable, FormClass, HermForm, Kind, Lambda};

#[derive(Clone, Debug)]
pub struct WittTable {
    field: Field,
    eps: i32,
    kind: Kind,
    /// None for the symplectic case (trivial group)
    aniso: Option<AnisoTable>,
    add: Vec<Vec<usize>>,
    neg: Vec<usize>,
}

impl WittTable {
    pub fn new(field: &Field, eps: i32) -> Result<WittTable> {
        let kind = forms::kind_of(field, eps);
        let aniso = match kind {
            Kind::Symplectic => None,
            Kind::Quadratic => Some(AnisoTable::new(field, Kind::Quadratic)?),
            Kind::Hermitian | Kind::SkewHermitian => Some(AnisoTable::new(field, Kind::Hermitian)?),
        };
        let mut t = WittTable { field: field.clone(), eps, kind, aniso, add: vec![], neg: vec![] };
        let n = t.order();
        let mut add = vec![vec![0; n]; n];
        let mut neg = vec![0; n];
        if let Some(a) = &t.aniso {
            for i in 0..n {
                for j in 0..n {
                    let mut d = a.reps[i].clone();
                    d.extend(a.reps[j].iter().cloned());
                    add[i][j] = a.anisotropic_part(&forms::diagonal_class(field, a.kind, &d)?)?;
                }
                let d: Vec<Elem> = a.reps[i].iter().map(|x| x.neg()).collect();
                neg[i] = a.anisotropic_part(&forms::diagonal_class(field, a.kind, &d)?)?;
            }
        }
        t.add = add;
        t.neg = neg;
        Ok(t)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn eps(&self) -> i32 {
        self.eps
    }
    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.aniso.as_ref().map_or(1, |a| a.reps.len())
    }

    pub fn zero(&self) -> usize {
        0
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a][b]
    }

    pub fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }

    pub fn aniso_dim(&self, a: usize) -> usize {
        self.aniso.as_ref().map_or(0, |t| t.reps[a].len())
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.add(x, a);
            k += 1;
        }
        k
    }

    pub fn exponent(&self) -> usize {
        (0..self.order()).map(|a| self.element_order(a)).fold(1, lcm)
    }

    /// Abelian group type, e.g. "C4xC4".
    pub fn structure(&self) -> String {
        let n = self.order();
        if n == 1 {
            return "trivial".into();
        }
        // ranks[i] = log2 |{a : 2^{i+1} a = 0}|
        let mut factors = vec![];
        let mut ranks = vec![];
        let mut k = 1;
        loop {
            k *= 2;
            let killed = (0..n).filter(|&a| k % self.element_order(a) == 0).count();
            ranks.push(killed.trailing_zeros() as usize);
            if killed == n {
                break;
            }
        }
        let mut counts = vec![];
        for i in 0..ranks.len() {
            counts.push(ranks[i] - if i == 0 { 0 } else { ranks[i - 1] });
        }
        for i in 0..counts.len() {
            let here = counts[i] - counts.get(i + 1).copied().unwrap_or(0);
            for _ in 0..here {
                factors.push(1usize << (i + 1));
            }
        }
        factors.sort_unstable_by(|a, b| b.cmp(a));
        factors.iter().map(|f| format!("C{f}")).collect::<Vec<_>>().join("x")
    }

    /// X_{ρ,ε,F}: the unique class of maximal anisotropic dimension.
    pub fn max_element(&self) -> Result<usize> {
        let n = self.order();
        let m = (0..n).map(|a| self.aniso_dim(a)).max().unwrap_or(0);
        let top: Vec<usize> = (0..n).filter(|&a| self.aniso_dim(a) == m).collect();
        if top.len() != 1 {
            return Err(Error::HypothesisFailed(format!("{} classes of maximal anisotropic dimension", top.len())));
        }
        Ok(top[0])
    }

    fn untwist_scalar(&self) -> Result<Option<Elem>> {
        if self.kind == Kind::SkewHermitian {
            Ok(Some(forms::skew_scalar(&self.field)?))
        } else {
            Ok(None)
        }
    }

    /// A diagonal anisotropic representative of the class.
    pub fn rep_form(&self, a: usize) -> Result<HermForm> {
        let f = &self.field;
        let Some(t) = &self.aniso else {
            return HermForm::new(f, self.eps, fmat::zeros(f, 0, 0));
        };
        let mut d = t.reps[a].clone();
        if let Some(s) = self.untwist_scalar()? {
            let si = s.inv()?;
            d = d.iter().map(|x| x.mul(&si)).collect();
        }
        HermForm::new(f, self.eps, fmat::diag(f, &d))
    }

    pub fn class_of(&self, h: &HermForm) -> Result<usize> {
        if h.eps() != self.eps || h.field() != &self.field {
            return Err(Error::ContextMismatch);
        }
        let Some(t) = &self.aniso else { return Ok(0) };
        let c = match h.classify()? {
            FormClass::Symplectic { .. } => return Ok(0),
            c => c,
        };
        t.anisotropic_part(&c)
    }

    pub fn rep_label(&self, a: usize) -> Vec<String> {
        match self.rep_form(a) {
            Ok(h) => (0..h.dim()).map(|i| h.gram().get(i, i).display()).collect(),
            Err(_) => vec![],
        }
    }

    pub fn to_json(&self) -> Result<Value> {
        let n = self.order();
        let x = self.max_element()?;
        let classes: Vec<Value> = (0..n)
            .map(|a| json!({ "index": a, "aniso_dim": self.aniso_dim(a), "rep": self.rep_label(a), "order": self.element_order(a) }))
            .collect();
        Ok(json!({
            "epsilon": self.eps,
            "kind": self.kind,
            "order": n,
            "exponent": self.exponent(),
            "structure": self.structure(),
            "classes": classes,
            "add": self.add,
            "max_element": x,
        }))
    }

    pub fn to_text(&self) -> Result<String> {
        let n = self.order();
        let mut s = format!("W order {}  exponent {}  {}\n", n, self.exponent(), self.structure());
        let x = self.max_element()?;
        for a in 0..n {
            let tag = if a == x { "  X" } else { "" };
            s.push_str(&format!("{:>3}  dim {}  order {}  <{}>{}\n", a, self.aniso_dim(a), self.element_order(a), self.rep_label(a).join(", "), tag));
        }
        if n <= 16 {
            s.push_str("+  ");
            for b in 0..n {
                s.push_str(&format!("{b:>3}"));
            }
            s.push('\n');
            for a in 0..n {
                s.push_str(&format!("{a:>3}"));
                for b in 0..n {
                    s.push_str(&format!("{:>3}", self.add(a, b)));
                }
                s.push('\n');
            }
        }
        Ok(s)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    a / gcd(a, b) * b
}

/// E over the prefix F with λ.
#[derive(Clone, Debug)]
pub struct TraceSpec {
    pub e: Field,
    pub f: Field,
    pub lambda: Lambda,
}

impl TraceSpec {
    pub fn new(e: &Field, steps_of_f: usize, lambda: Lambda) -> Result<TraceSpec> {
        if steps_of_f > e.num_steps() {
            return Err(Error::Schema("the base is not a prefix of the tower".into()));
        }
        let f = e.prefix(steps_of_f);
        if (e.e() / f.e()) % e.p() as i64 == 0 {
            return Err(Error::WildExtension);
        }
        if let Lambda::TwistedTrace(z) = &lambda {
            if z.is_zero() || !z.rho().sub(z).is_zero() {
                return Err(Error::HypothesisFailed("λ twist must be a symmetric unit".into()));
            }
        }
        Ok(TraceSpec { e: e.clone(), f, lambda })
    }

    pub fn degree(&self) -> usize {
        self.e.degree() / self.f.degree()
    }
}

/// Tr_λ on forms: the F-form λ ∘ h̃.
pub fn trace_form(spec: &TraceSpec, h: &HermForm) -> Result<HermForm> {
    forms::trace_form(h, &spec.f, &spec.lambda)
}

/// The trace map as a table from W(E) to W(F).
#[derive(Clone, Debug)]
pub struct TraceMap {
    pub source: WittTable,
    pub target: WittTable,
    pub images: Vec<usize>,
}

impl TraceMap {
    pub fn new(spec: &TraceSpec, eps: i32) -> Result<TraceMap> {
        let source = WittTable::new(&spec.e, eps)?;
        let target = WittTable::new(&spec.f, eps)?;
        let mut images = vec![];
        for a in 0..source.order() {
            let h = source.rep_form(a)?;
            images.push(target.class_of(&trace_form(spec, &h)?)?);
        }
        Ok(TraceMap { source, target, images })
    }

    pub fn apply(&self, a: usize) -> usize {
        self.images[a]
    }

    pub fn is_homomorphism(&self) -> bool {
        let n = self.source.order();
        (0..n).all(|a| (0..n).all(|b| self.images[self.source.add(a, b)] == self.target.add(self.images[a], self.images[b])))
    }

    pub fn kernel(&self) -> Vec<usize> {
        (0..self.images.len()).filter(|&a| self.images[a] == 0).collect()
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().len() == 1
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TraceReport {
    pub degree: usize,
    pub epsilon: i32,
    pub source_order: usize,
    pub target_order: usize,
    pub x_source: usize,
    pub x_target: usize,
    pub image_of_x: usize,
    pub max_element_ok: bool,
    pub homomorphism: bool,
    pub kernel_size: usize,
    /// checked only for odd degree
    pub injective: Option<bool>,
}

impl TraceReport {
    pub fn passed(&self) -> bool {
        self.max_element_ok && self.homomorphism && self.injective.unwrap_or(true)
    }
}

/// Check Tr(X_E) = X_F, additivity, and injectivity in odd degree.
pub fn verify_trace_theorem(spec: &TraceSpec, eps: i32) -> Result<TraceReport> {
    let m = TraceMap::new(spec, eps)?;
    let xs = m.source.max_element()?;
    let xt = m.target.max_element()?;
    let deg = spec.degree();
    Ok(TraceReport {
        degree: deg,
        epsilon: eps,
        source_order: m.source.order(),
        target_order: m.target.order(),
        x_source: xs,
        x_target: xt,
        image_of_x: m.apply(xs),
        max_element_ok: m.apply(xs) == xt,
        homomorphism: m.is_homomorphism(),
        kernel_size: m.kernel().len(),
        injective: if deg % 2 == 1 { Some(m.is_injective()) } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{FieldSpec, StepKind};

    fn field(spec: FieldSpec) -> Field {
        Field::new(&spec, Some(20)).unwrap()
    }

    #[test]
    fn orders_and_structures() {
        let q3 = field(FieldSpec::qp(3));
        let q5 = field(FieldSpec::qp(5));
        let t = WittTable::new(&q5, 1).unwrap();
        assert_eq!((t.order(), t.exponent(), t.structure().as_str()), (16, 2, "C2xC2xC2xC2"));
        let t = WittTable::new(&q3, 1).unwrap();
        assert_eq!((t.order(), t.exponent(), t.structure().as_str()), (16, 4, "C4xC4"));
        assert_eq!(WittTable::new(&q3, -1).unwrap().order(), 1);
        let u = field(FieldSpec::qp(3).step(StepKind::Unramified, &[-5, 0, 1]).conjugate(None));
        let t = WittTable::new(&u, 1).unwrap();
        assert_eq!((t.order(), t.structure().as_str()), (4, "C2xC2"));
        let t = WittTable::new(&u, -1).unwrap();
        assert_eq!((t.order(), t.structure().as_str()), (4, "C2xC2"));
        let r3 = field(FieldSpec::qp(3).step(StepKind::Eisenstein, &[-3, 0, 1]).conjugate(None));
        assert_eq!(WittTable::new(&r3, 1).unwrap().structure(), "C4");
        assert_eq!(WittTable::new(&r3, -1).unwrap().structure(), "C4");
        let u5 = field(FieldSpec::qp(5).step(StepKind::Eisenstein, &[-5, 0, 1]).conjugate(None));
        assert_eq!(WittTable::new(&u5, 1).unwrap().structure(), "C2xC2");
    }

    #[test]
    fn max_element_over_q3() {
        let q3 = field(FieldSpec::qp(3));
        let t = WittTable::new(&q3, 1).unwrap();
        let x = t.max_element().unwrap();
        assert_eq!(t.aniso_dim(x), 4);
        let d: Vec<Elem> = [1, 2, 3, 6].iter().map(|&k| q3.int(k)).collect();
        let h = HermForm::new(&q3, 1, fmat::diag(&q3, &d)).unwrap();
        // 2 ≡ −1: ⟨1, 2⟩ is hyperbolic here; δ = 2 gives ⟨1, −δ, −π, δπ⟩
        let d2: Vec<Elem> = [1, 1, -3, 6].iter().map(|&k| q3.int(k)).collect();
        let h2 = HermForm::new(&q3, 1, fmat::diag(&q3, &d2)).unwrap();
        assert_ne!(t.class_of(&h).unwrap(), x);
        assert_eq!(t.class_of(&h2).unwrap(), x);
    }

    #[test]
    fn worked_trace_example() {
        let spec = FieldSpec::qp(3).step(StepKind::Unramified, &[-5, 0, 1]).step(StepKind::Eisenstein, &[-3, 0, 1]).conjugate(Some(0));
        let e = field(spec);
        let ts = TraceSpec::new(&e, 1, Lambda::Trace).unwrap();
        let f = &ts.f;
        let r3 = e.generator(1);
        let h = HermForm::new(&e, 1, fmat::diag(&e, &[r3])).unwrap();
        let t = trace_form(&ts, &h).unwrap();
        assert!(t.gram().eq_approx(&fmat::from_ints(f, &[&[0, 6], &[6, 0]])));
        let h1 = HermForm::new(&e, 1, fmat::identity(&e, 1)).unwrap();
        let t1 = trace_form(&ts, &h1).unwrap();
        assert!(t1.gram().eq_approx(&fmat::from_ints(f, &[&[2, 0], &[0, 6]])));
        let w = WittTable::new(f, 1).unwrap();
        assert_eq!(w.class_of(&t).unwrap(), 0);
        assert_ne!(w.class_of(&t1).unwrap(), 0);
    }

    #[test]
    fn cubic_injective_and_quadratic_kernel() {
        let e = field(FieldSpec::qp(5).step(StepKind::Eisenstein, &[-5, 0, 0, 1]));
        let r = verify_trace_theorem(&TraceSpec::new(&e, 0, Lambda::Trace).unwrap(), 1).unwrap();
        assert!(r.passed());
        assert_eq!(r.injective, Some(true));
        let e = field(FieldSpec::qp(3).step(StepKind::Eisenstein, &[-3, 0, 1]));
        let m = TraceMap::new(&TraceSpec::new(&e, 0, Lambda::Trace).unwrap(), 1).unwrap();
        let k = m.kernel();
        assert_eq!(k.len(), 4);
        assert!(k.iter().all(|&a| m.source.aniso_dim(a) <= 2));
    }

    #[test]
    fn trace_theorem_quadratic_specs() {
        for (p, a) in [(3u64, 2i64), (3, 3), (5, 2), (5, 5)] {
            for conj in [false, true] {
                let mut s = FieldSpec::qp(p).step(if a == p as i64 { StepKind::Eisenstein } else { StepKind::Unramified }, &[-a, 0, 1]);
                if conj {
                    s = s.conjugate(None);
                }
                let e = field(s);
                for eps in [1, -1] {
                    let r = verify_trace_theorem(&TraceSpec::new(&e, 0, Lambda::Trace).unwrap(), eps).unwrap();
                    assert!(r.passed(), "p={p} a={a} conj={conj} eps={eps}: {r:?}");
                }
            }
        }
    }
}
