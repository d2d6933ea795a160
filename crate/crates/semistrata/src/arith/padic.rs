//! Elements of Q_p with capped relative precision.
//!
//! A value is either a unit times a power of p, known to `rel` digits, or a
//! zero known modulo p^abs.  Exact zero is the zero with `abs = INF`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Sentinel for "infinite" valuation or absolute precision.
pub const INF: i64 = i64::MAX / 4;

thread_local! {
    static POWS: RefCell<HashMap<u32, Vec<BigUint>>> = RefCell::new(HashMap::new());
}

/// p^k, cached per thread.
pub fn ppow(p: u32, k: u32) -> BigUint {
    POWS.with(|c| {
        let mut c = c.borrow_mut();
        let v = c.entry(p).or_insert_with(|| vec![BigUint::one()]);
        while v.len() <= k as usize {
            let next = v.last().unwrap() * p;
            v.push(next);
        }
        v[k as usize].clone()
    })
}

fn sat(x: i64) -> i64 {
    x.clamp(-INF, INF)
}

#[derive(Clone)]
pub struct Qp {
    p: u32,
    v: i64,
    u: BigUint,
    rel: u32,
}

impl fmt::Debug for Qp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.encode())
    }
}

impl Qp {
    pub fn zero(p: u32) -> Qp {
        Qp { p, v: INF, u: BigUint::zero(), rel: 0 }
    }

    /// Zero known only modulo p^abs.
    pub fn zero_mod(p: u32, abs: i64) -> Qp {
        Qp { p, v: sat(abs), u: BigUint::zero(), rel: 0 }
    }

    pub fn one(p: u32, prec: u32) -> Qp {
        Qp { p, v: 0, u: BigUint::one(), rel: prec }
    }

    pub fn from_i64(p: u32, n: i64, prec: u32) -> Qp {
        Qp::from_bigint(p, &BigInt::from(n), prec)
    }

    pub fn from_bigint(p: u32, n: &BigInt, prec: u32) -> Qp {
        if n.is_zero() {
            return Qp::zero(p);
        }
        let mut m = n.abs().to_biguint().unwrap();
        let mut v = 0i64;
        let pb = BigUint::from(p);
        loop {
            let (q, r) = m.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            m = q;
            v += 1;
        }
        let modulus = ppow(p, prec);
        let mut u = m % &modulus;
        if n.sign() == Sign::Minus {
            u = &modulus - u;
        }
        Qp { p, v, u, rel: prec }
    }

    pub fn from_rational(p: u32, num: i64, den: i64, prec: u32) -> Result<Qp> {
        let d = Qp::from_i64(p, den, prec);
        Qp::from_i64(p, num, prec).div(&d)
    }

    /// Build from valuation, unit residue and relative precision.
    pub fn from_parts(p: u32, v: i64, u: BigUint, rel: u32) -> Qp {
        if rel == 0 {
            return Qp::zero_mod(p, v);
        }
        let modulus = ppow(p, rel);
        let mut u = u % modulus;
        if u.is_zero() {
            return Qp::zero_mod(p, v + rel as i64);
        }
        let mut v = v;
        let mut rel = rel;
        let pb = BigUint::from(p);
        loop {
            let (q, r) = u.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            u = q;
            v += 1;
            rel -= 1;
        }
        Qp { p, v, u, rel }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.u.is_zero() && self.v >= INF
    }

    /// Valuation, or `None` for a (possibly inexact) zero.
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.v)
        }
    }

    /// Lower bound for the valuation; the absolute precision for zeros.
    pub fn val_bound(&self) -> i64 {
        self.v
    }

    /// Absolute precision: the value is known modulo p^abs_prec.
    pub fn abs_prec(&self) -> i64 {
        if self.is_zero() {
            self.v
        } else {
            self.v + self.rel as i64
        }
    }

    pub fn rel_prec(&self) -> u32 {
        self.rel
    }

    pub fn unit(&self) -> &BigUint {
        &self.u
    }

    /// Cap the absolute precision.
    pub fn cap_abs(&self, abs: i64) -> Qp {
        if self.is_zero() {
            return Qp::zero_mod(self.p, self.v.min(abs));
        }
        if self.abs_prec() <= abs {
            return self.clone();
        }
        if abs <= self.v {
            return Qp::zero_mod(self.p, abs);
        }
        let rel = (abs - self.v) as u32;
        Qp { p: self.p, v: self.v, u: &self.u % ppow(self.p, rel), rel }
    }

    /// Treat the unknown digits as zero, up to `rel` relative digits; a zero
    /// becomes exact.
    pub fn padded(&self, rel: u32) -> Qp {
        if self.is_zero() {
            return Qp::zero(self.p);
        }
        if self.rel >= rel {
            return self.clone();
        }
        Qp { p: self.p, v: self.v, u: self.u.clone(), rel }
    }

    /// Cap the relative precision.
    pub fn cap_rel(&self, rel: u32) -> Qp {
        if self.is_zero() || self.rel <= rel {
            return self.clone();
        }
        self.cap_abs(self.v + rel as i64)
    }

    pub fn neg(&self) -> Qp {
        if self.is_zero() {
            return self.clone();
        }
        let m = ppow(self.p, self.rel);
        Qp { p: self.p, v: self.v, u: &m - &self.u, rel: self.rel }
    }

    pub fn add(&self, o: &Qp) -> Qp {
        debug_assert_eq!(self.p, o.p);
        let abs = self.abs_prec().min(o.abs_prec());
        if self.is_zero() {
            return o.cap_abs(abs);
        }
        if o.is_zero() {
            return self.cap_abs(abs);
        }
        let m = self.v.min(o.v);
        let width = (abs - m) as u32;
        let modulus = ppow(self.p, width);
        let a = if self.v > m { &self.u * ppow(self.p, (self.v - m) as u32) } else { self.u.clone() };
        let b = if o.v > m { &o.u * ppow(self.p, (o.v - m) as u32) } else { o.u.clone() };
        let s = (a + b) % &modulus;
        Qp::from_parts(self.p, m, s, width)
    }

    pub fn sub(&self, o: &Qp) -> Qp {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Qp) -> Qp {
        debug_assert_eq!(self.p, o.p);
        match (self.is_zero(), o.is_zero()) {
            (true, true) => Qp::zero_mod(self.p, sat(self.v.saturating_add(o.v))),
            (true, false) => Qp::zero_mod(self.p, sat(self.v.saturating_add(o.v))),
            (false, true) => Qp::zero_mod(self.p, sat(self.v.saturating_add(o.v))),
            (false, false) => {
                let rel = self.rel.min(o.rel);
                let u = (&self.u * &o.u) % ppow(self.p, rel);
                Qp { p: self.p, v: self.v + o.v, u, rel }
            }
        }
    }

    pub fn inv(&self) -> Result<Qp> {
        if self.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Err(Error::PrecisionExhausted("inverting a value indistinguishable from zero".into()));
        }
        let m = BigInt::from(ppow(self.p, self.rel));
        let a = BigInt::from(self.u.clone());
        let e = a.extended_gcd(&m);
        let mut x = e.x % &m;
        if x.is_negative() {
            x += &m;
        }
        Ok(Qp { p: self.p, v: -self.v, u: x.to_biguint().unwrap(), rel: self.rel })
    }

    pub fn div(&self, o: &Qp) -> Result<Qp> {
        Ok(self.mul(&o.inv()?))
    }

    /// Multiply by p^k.
    pub fn shift(&self, k: i64) -> Qp {
        let mut r = self.clone();
        if r.v < INF {
            r.v = sat(r.v + k);
        }
        r
    }

    /// Residue modulo p of an integral value.
    pub fn residue(&self) -> Result<u32> {
        if self.is_zero() {
            if self.v < 1 {
                return Err(Error::PrecisionExhausted("residue of an imprecise zero".into()));
            }
            return Ok(0);
        }
        if self.v < 0 {
            return Err(Error::NotIntegral);
        }
        if self.v > 0 {
            return Ok(0);
        }
        Ok((&self.u % self.p).to_u32().unwrap())
    }

    /// Integer representative in [0, p^abs) of an integral value.
    pub fn lift_integer(&self) -> Option<BigUint> {
        if self.is_zero() {
            return Some(BigUint::zero());
        }
        if self.v < 0 {
            return None;
        }
        Some(&self.u * ppow(self.p, self.v as u32))
    }

    /// Signed representative of small integers, used for display.
    pub fn to_small_int(&self) -> Option<i64> {
        if self.is_zero() {
            return Some(0);
        }
        if self.v < 0 {
            return None;
        }
        let n = self.lift_integer()?;
        let m = ppow(self.p, (self.v + self.rel as i64) as u32);
        let half = &m >> 1;
        let val: BigInt = if n > half { BigInt::from(n) - BigInt::from(m) } else { BigInt::from(n) };
        val.to_i64().filter(|x| x.abs() < 1 << 40)
    }

    /// Canonical representative of the class modulo p^a: the digits below
    /// position a.
    pub fn reduce_mod(&self, a: i64) -> Qp {
        if self.is_zero() || self.v >= a {
            return Qp::zero(self.p);
        }
        let keep = ((a - self.v) as u32).min(self.rel);
        Qp { p: self.p, v: self.v, u: &self.u % ppow(self.p, keep), rel: keep }.normalized()
    }

    fn normalized(self) -> Qp {
        let Qp { p, v, u, rel } = self;
        Qp::from_parts(p, v, u, rel)
    }

    /// Little-endian base-p digits of the unit part.
    pub fn digits(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.rel as usize);
        let mut u = self.u.clone();
        for _ in 0..self.rel {
            let (q, r) = u.div_rem(&BigUint::from(self.p));
            out.push(r.to_u32().unwrap());
            u = q;
        }
        out
    }

    /// Serialize as "v:digits" (little-endian base-p digits of the unit).
    /// Exact zero is "0"; a zero known modulo p^a is "0@a".
    pub fn encode(&self) -> String {
        if self.is_exact_zero() {
            return "0".into();
        }
        if self.is_zero() {
            return format!("0@{}", self.v);
        }
        let ds = self.digits();
        let body: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
        let sep = if self.p <= 10 { "" } else { "." };
        format!("{}:{}", self.v, body.join(sep))
    }

    pub fn decode(p: u32, s: &str) -> Result<Qp> {
        let s = s.trim();
        if s == "0" {
            return Ok(Qp::zero(p));
        }
        if let Some(a) = s.strip_prefix("0@") {
            let a: i64 = a.parse().map_err(|_| Error::Schema(format!("bad zero precision in {s:?}")))?;
            return Ok(Qp::zero_mod(p, a));
        }
        let (v, d) = s.split_once(':').ok_or_else(|| Error::Schema(format!("element {s:?} is not of the form v:digits")))?;
        let v: i64 = v.parse().map_err(|_| Error::Schema(format!("bad valuation in {s:?}")))?;
        let digits: Vec<u32> = if p <= 10 {
            d.chars().map(|c| c.to_digit(10).ok_or_else(|| Error::Schema(format!("bad digit in {s:?}")))).collect::<Result<_>>()?
        } else {
            d.split('.').map(|t| t.parse::<u32>().map_err(|_| Error::Schema(format!("bad digit in {s:?}")))).collect::<Result<_>>()?
        };
        if digits.is_empty() || digits.iter().any(|&x| x >= p) {
            return Err(Error::Schema(format!("digits of {s:?} out of range for p = {p}")));
        }
        if digits[0] == 0 {
            return Err(Error::Schema(format!("unit digits of {s:?} start with 0")));
        }
        let mut u = BigUint::zero();
        for &x in digits.iter().rev() {
            u = u * p + x;
        }
        Ok(Qp { p, v, u, rel: digits.len() as u32 })
    }
}

/// Parse an integer or a rational "a/b" into Q_p.
pub fn parse_rational(p: u32, s: &str, prec: u32) -> Result<Qp> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| Error::Schema(format!("bad rational {s:?}")))?;
        let b: BigInt = b.trim().parse().map_err(|_| Error::Schema(format!("bad rational {s:?}")))?;
        if b.is_zero() {
            return Err(Error::Schema(format!("zero denominator in {s:?}")));
        }
        return Qp::from_bigint(p, &a, prec).div(&Qp::from_bigint(p, &b, prec));
    }
    let a: BigInt = s.parse().map_err(|_| Error::Schema(format!("bad integer {s:?}")))?;
    Ok(Qp::from_bigint(p, &a, prec))
}

/// Legendre symbol (a | p) for p an odd prime, a not divisible by p.
pub fn legendre(a: i64, p: u32) -> i32 {
    let p = p as i64;
    let a = a.rem_euclid(p);
    if a == 0 {
        return 0;
    }
    let mut r = 1i64;
    let mut b = a;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

impl crate::arith::scalar::Scalar for Qp {
    fn zero_like(&self) -> Self {
        Qp::zero(self.p)
    }
    fn one_like(&self) -> Self {
        // precision of the context is carried by the operands, use a wide one
        Qp::one(self.p, self.rel.max(DEFAULT_WIDE))
    }
    fn from_int_like(&self, n: i64) -> Self {
        Qp::from_i64(self.p, n, self.rel.max(DEFAULT_WIDE))
    }
    fn add(&self, o: &Self) -> Self {
        Qp::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Qp::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Qp::mul(self, o)
    }
    fn neg(&self) -> Self {
        Qp::neg(self)
    }
    fn inv(&self) -> Result<Self> {
        Qp::inv(self)
    }
    fn is_zero(&self) -> bool {
        Qp::is_zero(self)
    }
    fn pivot_key(&self) -> i64 {
        self.v
    }
}

/// Relative precision used for constants created without a field context.
pub const DEFAULT_WIDE: u32 = 64;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_encoding() {
        let x = Qp::from_i64(3, -18, 10);
        assert_eq!(x.valuation(), Some(2));
        let s = x.encode();
        let y = Qp::decode(3, &s).unwrap();
        assert!(x.sub(&y).is_zero());
        assert_eq!(Qp::decode(3, "0").unwrap().is_exact_zero(), true);
    }

    #[test]
    fn inverse_and_cancellation() {
        let p = 5;
        let x = Qp::from_rational(p, 7, 25, 12).unwrap();
        assert_eq!(x.valuation(), Some(-2));
        let y = x.mul(&x.inv().unwrap());
        assert!(y.sub(&Qp::one(p, 12)).is_zero());
        let a = Qp::from_i64(p, 1 + 125, 12);
        let b = Qp::one(p, 12);
        let d = a.sub(&b);
        assert_eq!(d.valuation(), Some(3));
        assert_eq!(d.rel_prec(), 9);
    }

    #[test]
    fn imprecise_zero_cannot_be_inverted() {
        let z = Qp::zero_mod(3, 5);
        assert!(matches!(z.inv(), Err(Error::PrecisionExhausted(_))));
        assert!(matches!(Qp::zero(3).inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn legendre_small() {
        assert_eq!(legendre(2, 3), -1);
        assert_eq!(legendre(-1, 5), 1);
        assert_eq!(legendre(-1, 3), -1);
    }
}
