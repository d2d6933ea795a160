//! The orders h(β, Λ) ⊆ j(β, Λ) along a defining sequence and the
//! character ψ_β(1 + x) = ψ_F(tr(β x)).

use serde_json::{json, Value};

use crate::arith::fmat::{self, FMat};
use crate::arith::Elem;
use crate::error::{Error, Result};
use crate::lattices::MatrixLattice;
use crate::strata::centralizer::centralizer_of;
use crate::strata::Stratum;

/// A value of Q/Z as num/den with den a power of p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QmodZ {
    pub num: u64,
    pub den: u64,
}

impl QmodZ {
    pub fn zero() -> QmodZ {
        QmodZ { num: 0, den: 1 }
    }

    pub fn add(&self, o: &QmodZ) -> QmodZ {
        let den = self.den.max(o.den);
        let a = self.num * (den / self.den) + o.num * (den / o.den);
        QmodZ { num: a % den, den }.reduced()
    }

    fn reduced(mut self) -> QmodZ {
        while self.den > 1 && self.num % 2 == 0 && self.den % 2 == 0 {
            self.num /= 2;
            self.den /= 2;
        }
        for p in [3u64, 5, 7, 11, 13] {
            while self.den > 1 && self.num % p == 0 && self.den % p == 0 {
                self.num /= p;
                self.den /= p;
            }
        }
        if self.num == 0 {
            self.den = 1;
        }
        self
    }

    pub fn to_string(&self) -> String {
        if self.num == 0 {
            "0".into()
        } else {
            format!("{}/{}", self.num, self.den)
        }
    }
}

/// ψ_F(x) = {Tr_{F/Qp}(x)/p}: trivial on p_F, not on o_F (F/Qp tame).
pub fn psi_f(x: &Elem) -> Result<QmodZ> {
    let f = x.field();
    let p = f.p() as u64;
    let t = x.mult_matrix().trace();
    let v = match t.valuation() {
        None => return Ok(QmodZ::zero()),
        Some(v) => v - 1,
    };
    if v >= 0 {
        return Ok(QmodZ::zero());
    }
    let k = (-v) as u32;
    if k > 20 {
        return Err(Error::PrecisionExhausted("character value too deep".into()));
    }
    let den = p.pow(k);
    let digits = t.digits();
    let mut num = 0u64;
    for d in digits.iter().take(k as usize).rev() {
        num = num * p + *d as u64;
    }
    Ok(QmodZ { num: num % den, den }.reduced())
}

#[derive(Clone, Debug)]
pub struct OrderPair {
    pub beta: FMat,
    pub q: i64,
    pub m: i64,
    pub h: MatrixLattice,
    pub j: MatrixLattice,
    pub h_in_j: bool,
    pub h_ring: bool,
    pub j_ring: bool,
    lat_m1: MatrixLattice,
}

impl OrderPair {
    fn one_minus(&self, g: &FMat) -> FMat {
        let f = g.get(0, 0).field();
        g.sub(&fmat::identity(f, g.rows))
    }

    /// g ∈ H^{m+1} = 1 + (h ∩ a_{m+1}).
    pub fn in_h(&self, g: &FMat) -> bool {
        let x = self.one_minus(g);
        self.h.contains_matrix(&x) && self.lat_m1.contains_matrix(&x)
    }

    /// g ∈ J^{m+1} = 1 + (j ∩ a_{m+1}).
    pub fn in_j(&self, g: &FMat) -> bool {
        let x = self.one_minus(g);
        self.j.contains_matrix(&x) && self.lat_m1.contains_matrix(&x)
    }

    /// ψ_β(g) = ψ_F(tr(β (g − 1))).
    pub fn psi(&self, g: &FMat) -> Result<QmodZ> {
        psi_f(&self.beta.mul(&self.one_minus(g)).trace())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q,
            "m": self.m,
            "h_generators": self.h.rank(),
            "j_generators": self.j.rank(),
            "h_in_j": self.h_in_j,
            "h_ring": self.h_ring,
            "j_ring": self.j_ring,
        })
    }
}

fn b0(s: &Stratum, gamma: &FMat) -> Result<MatrixLattice> {
    let basis: Vec<Vec<Elem>> = centralizer_of(gamma)?.iter().map(fmat::flatten).collect();
    s.lat.filtration(0).meet_subspace(&basis)
}

fn closed_under_mul(l: &MatrixLattice, n: usize) -> bool {
    let ms = l.matrices(n);
    ms.iter().all(|x| ms.iter().all(|y| l.contains_matrix(&x.mul(y))))
}

/// Checks the shape of a defining sequence [Λ, q, r_k, γ_k].
pub fn check_defining_sequence(seq: &[Stratum]) -> Result<()> {
    let first = seq.first().ok_or_else(|| Error::BadDefiningSequence("empty".into()))?;
    for w in seq.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if !a.lat.same_as(&b.lat) || a.q != first.q || b.q != first.q {
            return Err(Error::BadDefiningSequence("lattice or q changes".into()));
        }
        if b.r <= a.r {
            return Err(Error::BadDefiningSequence("r must increase".into()));
        }
        if !a.lat.contains_in_filtration(&a.beta.sub(&b.beta), -b.r) {
            return Err(Error::BadDefiningSequence(format!("consecutive terms differ below level {}", b.r)));
        }
    }
    Ok(())
}

pub fn build_orders_psi(seq: &[Stratum], m: i64) -> Result<OrderPair> {
    check_defining_sequence(seq)?;
    let first = &seq[0];
    let n = first.dim();
    let q = first.q;
    let last = seq.last().unwrap();
    let base = b0(last, &last.beta)?;
    let mut h = base.sum(&last.lat.filtration(q.div_euclid(2) + 1))?;
    let mut j = base.sum(&last.lat.filtration((q + 1).div_euclid(2)))?;
    for k in (0..seq.len() - 1).rev() {
        let s = &seq[k];
        let r = seq[k + 1].r;
        let b = b0(s, &s.beta)?;
        h = b.sum(&h.intersect(&s.lat.filtration(r.div_euclid(2) + 1))?)?;
        j = b.sum(&j.intersect(&s.lat.filtration((r + 1).div_euclid(2)))?)?;
    }
    let h_in_j = j.contains_lattice(&h);
    let h_ring = closed_under_mul(&h, n);
    let j_ring = closed_under_mul(&j, n);
    Ok(OrderPair { beta: first.beta.clone(), q, m, h, j, h_in_j, h_ring, j_ring, lat_m1: first.lat.filtration(m + 1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattices::LatticeSeq;
    use crate::strata::fixtures::*;

    #[test]
    fn psi_f_level_one() {
        let f = q3();
        assert_eq!(psi_f(&f.int(3)).unwrap(), QmodZ::zero());
        assert_eq!(psi_f(&f.int(5)).unwrap(), QmodZ { num: 2, den: 3 });
        assert_eq!(psi_f(&f.rational(1, 3).unwrap()).unwrap(), QmodZ { num: 1, den: 9 });
        let a = psi_f(&f.rational(2, 3).unwrap()).unwrap();
        assert_eq!(a.to_string(), "2/9");
    }

    #[test]
    fn scalar_orders_are_a0() {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let s = Stratum::new(lat.clone(), 1, 0, fmat::identity(&f, 2).scale(&f.pi_pow(-1)), None).unwrap();
        let o = build_orders_psi(&[s], 0).unwrap();
        assert!(o.h.same(&lat.filtration(0)) && o.j.same(&lat.filtration(0)));
    }

    #[test]
    fn minimal_orders_and_psi() {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 0], 1).unwrap();
        let b = fmat::from_ints(&f, &[&[0, 5], &[1, 0]]).scale(&f.pi_pow(-2));
        let s = Stratum::new(lat.clone(), 2, 1, b.clone(), None).unwrap();
        let o = build_orders_psi(&[s], 1).unwrap();
        assert!(o.h_in_j && o.h_ring && o.j_ring);
        assert!(!o.h.same(&o.j) || o.h.contains_lattice(&lat.filtration(1)));
        let one = fmat::identity(&f, 2);
        assert_eq!(o.psi(&one).unwrap(), QmodZ::zero());
        let x = fmat::from_ints(&f, &[&[3, 0], &[6, 3]]);
        let y = fmat::from_ints(&f, &[&[0, 3], &[3, 0]]);
        let gx = one.add(&x);
        let gy = one.add(&y);
        let lhs = o.psi(&gx.mul(&gy)).unwrap();
        assert_eq!(lhs, o.psi(&gx).unwrap().add(&o.psi(&gy).unwrap()));
        let deep = one.add(&fmat::from_ints(&f, &[&[27, 54], &[27, 0]]));
        assert_eq!(o.psi(&deep).unwrap(), QmodZ::zero());
        assert!(o.in_h(&one.add(&fmat::from_ints(&f, &[&[9, 0], &[0, 9]]))));
    }

    #[test]
    fn bad_sequences() {
        let (s, t) = gl_pair();
        assert!(matches!(build_orders_psi(&[s.clone(), t], 0), Err(Error::BadDefiningSequence(_))));
        assert!(matches!(build_orders_psi(&[], 0), Err(Error::BadDefiningSequence(_))));
    }
}
