//! Strata [Λ, q, r, β]: the coset β + a_{−r}(Λ) with ν_Λ(β) = −q.

pub mod centralizer;
pub mod classical;
pub mod conj;
pub mod examples;
pub mod graded;
pub mod orders;
pub mod split;

use num_integer::Integer;
use serde_json::{json, Value};

use crate::arith::factor::{factor, FfPoly};
use crate::arith::fmat::{self, FMat};
use crate::arith::hensel::reduce_poly;
use crate::arith::{Field, Poly};
use crate::error::{Error, Result};
use crate::forms::HermForm;
use crate::lattices::LatticeSeq;

#[derive(Clone, Debug)]
pub struct Stratum {
    pub lat: LatticeSeq,
    pub q: i64,
    pub r: i64,
    pub beta: FMat,
    /// Present for skew strata: the form, Λ is self-dual and σ(β) = −β.
    pub herm: Option<HermForm>,
}

impl Stratum {
    pub fn new(lat: LatticeSeq, q: i64, r: i64, beta: FMat, herm: Option<HermForm>) -> Result<Stratum> {
        if r < 0 || q < r {
            return Err(Error::InvalidStratum(format!("need q >= r >= 0, got q = {q}, r = {r}")));
        }
        if beta.rows != lat.dim() || !beta.is_square() {
            return Err(Error::InvalidStratum("element and lattice have different dimensions".into()));
        }
        match lat.nu(&beta) {
            None => {}
            Some(v) if v == -q || v >= -r => {}
            Some(v) => return Err(Error::InvalidStratum(format!("nu(beta) = {v} but q = {q}, r = {r}"))),
        }
        if let Some(h) = &herm {
            if h.dim() != lat.dim() {
                return Err(Error::InvalidStratum("form has the wrong dimension".into()));
            }
            if !h.adjoint(&beta)?.eq_approx(&beta.neg()) {
                return Err(Error::NotSkew);
            }
            if lat.dual(h.gram())?.1.is_none() {
                return Err(Error::InvalidStratum("lattice sequence is not self-dual".into()));
            }
        }
        Ok(Stratum { lat, q, r, beta, herm })
    }

    pub fn field(&self) -> &Field {
        self.lat.field()
    }
    pub fn dim(&self) -> usize {
        self.lat.dim()
    }
    pub fn period(&self) -> i64 {
        self.lat.period()
    }

    /// Equivalent to a zero stratum: β ∈ a_{−r}.
    pub fn is_zero(&self) -> bool {
        self.lat.nu(&self.beta).map_or(true, |v| v >= -self.r)
    }

    pub fn is_skew(&self) -> bool {
        self.herm.is_some()
    }

    pub fn sigma(&self, x: &FMat) -> Result<FMat> {
        self.herm.as_ref().ok_or_else(|| Error::UnsupportedContext("stratum carries no form".into()))?.adjoint(x)
    }

    pub fn with_beta(&self, beta: FMat) -> Result<Stratum> {
        Stratum::new(self.lat.clone(), self.q, self.r, beta, self.herm.clone())
    }

    /// β in the splitting coordinates of Λ.
    pub fn beta_split(&self) -> FMat {
        self.lat.to_split(&self.beta)
    }

    /// Same cosets: same lattice, same (q, r) and β − β′ ∈ a_{−r}.
    pub fn equivalent(&self, o: &Stratum) -> bool {
        self.q == o.q && self.r == o.r && self.lat.same_as(&o.lat) && self.lat.contains_in_filtration(&self.beta.sub(&o.beta), -self.r)
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "lattice": self.lat.to_json(),
            "q": self.q,
            "r": self.r,
            "beta": fmat::to_json(&self.beta),
        });
        if let Some(h) = &self.herm {
            let mut hv = h.to_json();
            hv["skew"] = json!(true);
            v["hermitian"] = hv;
        }
        v
    }

    pub fn from_json(field: &Field, v: &Value) -> Result<Stratum> {
        let lat = LatticeSeq::from_json(field, v.get("lattice").ok_or_else(|| Error::Schema("stratum needs a lattice".into()))?)?;
        let int = |k: &str| v.get(k).and_then(|x| x.as_i64()).ok_or_else(|| Error::Schema(format!("stratum needs an integer {k}")));
        let q = int("q")?;
        let r = int("r")?;
        let beta = fmat::square_from_json(field, v.get("beta").ok_or_else(|| Error::Schema("stratum needs beta".into()))?)?;
        let herm = match v.get("hermitian") {
            None | Some(Value::Null) => None,
            Some(h) => Some(HermForm::from_json(field, h)?),
        };
        Stratum::new(lat, q, r, beta, herm)
    }
}

/// y_β, φ_β and the level of a stratum.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub e: i64,
    pub g: i64,
    pub y: FMat,
    pub phi: FfPoly,
    pub factors: Vec<(FfPoly, u32)>,
    /// Level q/e in lowest terms.
    pub level: (i64, i64),
}

impl Analysis {
    pub fn is_primary(&self) -> bool {
        self.factors.len() <= 1
    }

    pub fn is_power_of_x(&self) -> bool {
        self.factors.iter().all(|(f, _)| f.degree() == Some(1) && f.coeff(0).is_zero_ff())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "e": self.e,
            "g": self.g,
            "level": format!("{}/{}", self.level.0, self.level.1),
            "y": fmat::to_json(&self.y),
            "phi": ffpoly_string(&self.phi),
            "factors": self.factors.iter().map(|(f, m)| json!({"factor": ffpoly_string(f), "multiplicity": m})).collect::<Vec<_>>(),
        })
    }
}

pub fn ffpoly_string(f: &FfPoly) -> String {
    let d = match f.degree() {
        None => return "0".into(),
        Some(d) => d,
    };
    let mut parts = vec![];
    for i in (0..=d).rev() {
        let c = f.coeff(i);
        if c.is_zero_ff() {
            continue;
        }
        let cs = if c.c.len() == 1 { c.c[0].to_string() } else { format!("({})", c.c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")) };
        let mono = match i {
            0 => cs,
            _ => {
                let x = if i == 1 { "X".to_string() } else { format!("X^{i}") };
                if c.is_one() { x } else { format!("{cs}*{x}") }
            }
        };
        parts.push(mono);
    }
    parts.join(" + ")
}

pub fn stratum_invariants(d: &Stratum) -> Result<Analysis> {
    let f = d.field();
    let n = d.dim();
    let e = d.period();
    let g = e.gcd(&d.q.max(1));
    let rf = f.residue_field();
    let lvl = {
        let t = d.q.gcd(&e);
        (d.q / t.max(1), e / t.max(1))
    };
    let y = if d.q == 0 || d.beta.is_zero() {
        fmat::zeros(f, n, n)
    } else {
        d.beta.pow((e / g) as u32).scale(&f.pi_pow(d.q / g))
    };
    let phi = if y.is_zero() {
        Poly::monomial(rf.one(), n)
    } else {
        reduce_poly(&d.lat.to_split(&y).charpoly(), f)?
    };
    let factors = factor(&phi)?;
    Ok(Analysis { e, g, y, phi, factors, level: lvl })
}

/// φ_β is not a power of X; only meaningful for r = q − 1 or zero strata.
pub fn is_fundamental(d: &Stratum) -> Result<bool> {
    if d.is_zero() {
        return Ok(false);
    }
    if d.r != d.q - 1 {
        return Err(Error::WrongShape);
    }
    Ok(!stratum_invariants(d)?.is_power_of_x())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn q3() -> Field {
        Field::qp(3, 24).unwrap()
    }

    pub fn gl_pair() -> (Stratum, Stratum) {
        examples::gl_pair(24).unwrap()
    }

    pub fn skew_pair() -> (Stratum, Stratum) {
        examples::skew_pair(24).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::arith::factor::ffpoly;

    #[test]
    fn gl_example_invariants() {
        let (s, _) = gl_pair();
        let a = stratum_invariants(&s).unwrap();
        let rf = s.field().residue_field();
        let want = ffpoly(&rf, &[-1, 1]).pow(2).mul(&ffpoly(&rf, &[1, 1]).pow(2));
        assert!(a.phi.sub(&want).is_zero());
        assert_eq!(a.level, (1, 1));
        assert!(is_fundamental(&s).unwrap());
    }

    #[test]
    fn unramified_quadratic_phi() {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let c = fmat::from_ints(&f, &[&[0, 5], &[1, 0]]).scale(&f.pi_pow(-1));
        let s = Stratum::new(lat, 1, 0, c, None).unwrap();
        let a = stratum_invariants(&s).unwrap();
        let rf = f.residue_field();
        assert!(a.phi.sub(&ffpoly(&rf, &[-2, 0, 1])).is_zero());
        assert_eq!(a.factors.len(), 1);
        assert_eq!(a.factors[0].1, 1);
    }

    #[test]
    fn zero_and_nilpotent_not_fundamental() {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 0, 0, 0], 1).unwrap();
        let z = Stratum::new(lat.clone(), 1, 1, fmat::zeros(&f, 4, 4), None).unwrap();
        let a = stratum_invariants(&z).unwrap();
        assert!(a.phi.sub(&Poly::monomial(f.residue_field().one(), 4)).is_zero());
        assert!(!is_fundamental(&z).unwrap());
        let mut n = fmat::zeros(&f, 4, 4);
        n.set(0, 1, f.pi_pow(-1));
        n.set(1, 3, f.pi_pow(-1));
        let s = Stratum::new(lat, 1, 0, n, None).unwrap();
        assert!(!is_fundamental(&s).unwrap());
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let (s, _) = gl_pair();
        let v = s.to_json();
        let t = Stratum::from_json(s.field(), &v).unwrap();
        assert!(t.equivalent(&s));
        let f = s.field().clone();
        let bad = Stratum::new(s.lat.clone(), 3, 1, s.beta.clone(), None);
        assert!(matches!(bad, Err(Error::InvalidStratum(_))));
        let _ = f;
    }
}
