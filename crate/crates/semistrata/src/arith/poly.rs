//! Dense univariate polynomials over any [`Scalar`], coefficients stored low
//! degree first with no (precision-)zero leading coefficients.

use crate::arith::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Poly<S: Scalar> {
    c: Vec<S>,
    zero: S,
}

impl<S: Scalar> Poly<S> {
    pub fn new(mut c: Vec<S>, zero: &S) -> Poly<S> {
        while c.last().map_or(false, |x| x.is_zero()) {
            c.pop();
        }
        Poly { c, zero: zero.zero_like() }
    }

    pub fn zero(zero: &S) -> Poly<S> {
        Poly { c: vec![], zero: zero.zero_like() }
    }

    pub fn constant(a: S) -> Poly<S> {
        let z = a.zero_like();
        Poly::new(vec![a], &z)
    }

    pub fn one(zero: &S) -> Poly<S> {
        Poly::constant(zero.one_like())
    }

    /// The monomial X.
    pub fn x(zero: &S) -> Poly<S> {
        Poly::new(vec![zero.zero_like(), zero.one_like()], zero)
    }

    /// X - a.
    pub fn linear(a: &S) -> Poly<S> {
        Poly::new(vec![a.neg(), a.one_like()], a)
    }

    pub fn monomial(a: S, k: usize) -> Poly<S> {
        let z = a.zero_like();
        let mut c = vec![z.clone(); k];
        c.push(a);
        Poly::new(c, &z)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> S {
        self.c.get(i).cloned().unwrap_or_else(|| self.zero.clone())
    }

    pub fn zero_scalar(&self) -> &S {
        &self.zero
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn deg_i(&self) -> i64 {
        self.degree().map_or(-1, |d| d as i64)
    }

    pub fn lead(&self) -> S {
        self.c.last().cloned().unwrap_or_else(|| self.zero.clone())
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].sub(&self.c[0].one_like()).is_zero()
    }

    pub fn add(&self, o: &Poly<S>) -> Poly<S> {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect();
        Poly::new(c, &self.zero)
    }

    pub fn sub(&self, o: &Poly<S>) -> Poly<S> {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| self.coeff(i).sub(&o.coeff(i))).collect();
        Poly::new(c, &self.zero)
    }

    pub fn neg(&self) -> Poly<S> {
        Poly::new(self.c.iter().map(|x| x.neg()).collect(), &self.zero)
    }

    pub fn scale(&self, a: &S) -> Poly<S> {
        Poly::new(self.c.iter().map(|x| x.mul(a)).collect(), &self.zero)
    }

    pub fn mul(&self, o: &Poly<S>) -> Poly<S> {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(&self.zero);
        }
        let mut c = vec![self.zero.clone(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j].add(&a.mul(b));
            }
        }
        Poly::new(c, &self.zero)
    }

    pub fn pow(&self, mut e: u32) -> Poly<S> {
        let mut acc = Poly::one(&self.zero);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        acc
    }

    /// Division with remainder; the divisor's leading coefficient must be
    /// invertible.
    pub fn divrem(&self, d: &Poly<S>) -> Result<(Poly<S>, Poly<S>)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let linv = d.lead().inv()?;
        let mut r = self.c.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(&self.zero), self.clone()));
        }
        let mut q = vec![self.zero.clone(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let t = r[k + dd].mul(&linv);
            for (i, dc) in d.c.iter().enumerate() {
                r[k + i] = r[k + i].sub(&t.mul(dc));
            }
            q[k] = t;
        }
        r.truncate(dd);
        Ok((Poly::new(q, &self.zero), Poly::new(r, &self.zero)))
    }

    pub fn rem(&self, d: &Poly<S>) -> Result<Poly<S>> {
        Ok(self.divrem(d)?.1)
    }

    pub fn monic(&self) -> Result<Poly<S>> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let l = self.lead().inv()?;
        let mut p = self.scale(&l);
        if let Some(last) = p.c.last_mut() {
            *last = l.one_like();
        }
        Ok(p)
    }

    pub fn derivative(&self) -> Poly<S> {
        let c = self.c.iter().enumerate().skip(1).map(|(i, a)| a.mul(&a.from_int_like(i as i64))).collect();
        Poly::new(c, &self.zero)
    }

    pub fn eval(&self, x: &S) -> S {
        let mut acc = self.zero.clone();
        for a in self.c.iter().rev() {
            acc = acc.mul(x).add(a);
        }
        acc
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn gcd(&self, o: &Poly<S>) -> Result<Poly<S>> {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: (g, s, t) with s*self + t*o = g, g monic.
    pub fn xgcd(&self, o: &Poly<S>) -> Result<(Poly<S>, Poly<S>, Poly<S>)> {
        let z = &self.zero;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Poly::one(z), Poly::zero(z));
        let (mut t0, mut t1) = (Poly::zero(z), Poly::one(z));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1)?;
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return Ok((r0, s0, t0));
        }
        let l = r0.lead().inv()?;
        Ok((r0.monic()?, s0.scale(&l), t0.scale(&l)))
    }

    /// self^e mod m for a possibly huge exponent.
    pub fn powmod(&self, e: u128, m: &Poly<S>) -> Result<Poly<S>> {
        let mut acc = Poly::one(&self.zero).rem(m)?;
        let mut b = self.rem(m)?;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b).rem(m)?;
            }
            b = b.mul(&b).rem(m)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn map<T: Scalar>(&self, zero: &T, f: impl Fn(&S) -> T) -> Poly<T> {
        Poly::new(self.c.iter().map(f).collect(), zero)
    }

    /// Coefficientwise equality to working precision.
    pub fn eq_approx(&self, o: &Poly<S>) -> bool {
        self.sub(o).is_zero()
    }
}
