//! Finite fields F_{p^f} given by structure constants on an F_p basis.
//!
//! Residue fields of towers come out of the tower construction with such a
//! table; standalone fields are built from an irreducible polynomial.

use std::fmt;
use std::sync::Arc;

use crate::arith::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Debug)]
pub struct FiniteFieldInner {
    pub p: u32,
    pub f: usize,
    /// table[i][j] = coordinates of b_i * b_j
    table: Vec<Vec<Vec<u32>>>,
    one: Vec<u32>,
}

#[derive(Clone)]
pub struct FiniteField(pub Arc<FiniteFieldInner>);

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.0.p, self.0.f)
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || (self.0.p == o.0.p && self.0.f == o.0.f && self.0.table == o.0.table)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FfElem {
    pub k: FiniteField,
    pub c: Vec<u32>,
}

impl Eq for FiniteField {}
impl std::hash::Hash for FiniteField {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.p.hash(state);
        self.0.f.hash(state);
    }
}

impl fmt::Debug for FfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k.0.f == 1 {
            write!(f, "{}", self.c[0])
        } else {
            write!(f, "{:?}", self.c)
        }
    }
}

impl FiniteField {
    /// Field from structure constants; `one` gives the identity coordinates.
    pub fn from_table(p: u32, table: Vec<Vec<Vec<u32>>>, one: Vec<u32>) -> FiniteField {
        let f = one.len();
        FiniteField(Arc::new(FiniteFieldInner { p, f, table, one }))
    }

    /// F_p.
    pub fn prime(p: u32) -> FiniteField {
        FiniteField::from_table(p, vec![vec![vec![1]]], vec![1])
    }

    /// F_p[x]/(m) for monic m (coefficients low to high, length deg+1).
    /// Irreducibility is the caller's responsibility.
    pub fn from_modulus(p: u32, m: &[u32]) -> FiniteField {
        let f = m.len() - 1;
        let reduce = |mut v: Vec<u32>| -> Vec<u32> {
            while v.len() > f {
                let top = v.pop().unwrap();
                let k = v.len() - f;
                for i in 0..f {
                    let sub = (top as u64 * m[i] as u64 % p as u64) as u32;
                    v[k + i] = (v[k + i] + p - sub) % p;
                }
            }
            v.resize(f, 0);
            v
        };
        let mut table = vec![vec![vec![0; f]; f]; f];
        for i in 0..f {
            for j in 0..f {
                let mut v = vec![0u32; i + j + 1];
                v[i + j] = 1;
                table[i][j] = reduce(v);
            }
        }
        let mut one = vec![0; f];
        one[0] = 1;
        FiniteField::from_table(p, table, one)
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn degree(&self) -> usize {
        self.0.f
    }

    pub fn size(&self) -> u64 {
        (self.0.p as u64).pow(self.0.f as u32)
    }

    pub fn zero(&self) -> FfElem {
        FfElem { k: self.clone(), c: vec![0; self.0.f] }
    }

    pub fn one(&self) -> FfElem {
        FfElem { k: self.clone(), c: self.0.one.clone() }
    }

    pub fn elem(&self, c: Vec<u32>) -> FfElem {
        let p = self.0.p;
        FfElem { k: self.clone(), c: c.into_iter().map(|x| x % p).collect() }
    }

    pub fn from_int(&self, n: i64) -> FfElem {
        let r = n.rem_euclid(self.0.p as i64) as u32;
        let mut c = self.0.one.clone();
        for x in c.iter_mut() {
            *x = (*x as u64 * r as u64 % self.0.p as u64) as u32;
        }
        FfElem { k: self.clone(), c }
    }

    /// The i-th element in a fixed enumeration of the field.
    pub fn element(&self, mut i: u64) -> FfElem {
        let p = self.0.p as u64;
        let mut c = vec![0; self.0.f];
        for x in c.iter_mut() {
            *x = (i % p) as u32;
            i /= p;
        }
        FfElem { k: self.clone(), c }
    }

    pub fn index_of(&self, x: &FfElem) -> u64 {
        let p = self.0.p as u64;
        x.c.iter().rev().fold(0u64, |acc, &d| acc * p + d as u64)
    }

    pub fn elements(&self) -> impl Iterator<Item = FfElem> + '_ {
        (0..self.size()).map(move |i| self.element(i))
    }

    /// Some non-square, for odd p.
    pub fn nonsquare(&self) -> FfElem {
        self.elements().find(|x| !x.is_zero_ff() && !x.is_square()).expect("odd order field has non-squares")
    }

    /// A generator of the multiplicative group.
    pub fn primitive_element(&self) -> FfElem {
        let q1 = self.size() - 1;
        let primes = prime_factors(q1);
        self.elements()
            .find(|x| !x.is_zero_ff() && primes.iter().all(|&l| !x.pow(q1 / l).is_one()))
            .expect("cyclic group has a generator")
    }
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = vec![];
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FfElem {
    pub fn is_zero_ff(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c == self.k.0.one
    }

    pub fn pow(&self, mut e: u64) -> FfElem {
        let mut base = self.clone();
        let mut acc = self.k.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = Scalar::mul(&acc, &base);
            }
            base = Scalar::mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_square(&self) -> bool {
        if self.is_zero_ff() {
            return true;
        }
        self.pow((self.k.size() - 1) / 2).is_one()
    }

    /// Quadratic character: 1, -1, or 0 at zero.
    pub fn chi(&self) -> i32 {
        if self.is_zero_ff() {
            0
        } else if self.is_square() {
            1
        } else {
            -1
        }
    }

    pub fn sqrt(&self) -> Option<FfElem> {
        if self.is_zero_ff() {
            return Some(self.clone());
        }
        if !self.is_square() {
            return None;
        }
        // Tonelli-Shanks
        let q = self.k.size();
        let mut s = 0;
        let mut t = q - 1;
        while t % 2 == 0 {
            t /= 2;
            s += 1;
        }
        let z = self.k.nonsquare();
        let mut m = s;
        let mut c = z.pow(t);
        let mut tt = self.pow(t);
        let mut r = self.pow((t + 1) / 2);
        while !tt.is_one() {
            let mut i = 0;
            let mut x = tt.clone();
            while !x.is_one() {
                x = Scalar::mul(&x, &x);
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = Scalar::mul(&b, &b);
            }
            m = i;
            c = Scalar::mul(&b, &b);
            tt = Scalar::mul(&tt, &c);
            r = Scalar::mul(&r, &b);
        }
        Some(r)
    }

    /// x^(1/p), the inverse of Frobenius.
    pub fn pth_root(&self) -> FfElem {
        let q = self.k.size();
        self.pow(q / self.k.0.p as u64)
    }
}

impl Scalar for FfElem {
    fn zero_like(&self) -> Self {
        self.k.zero()
    }
    fn one_like(&self) -> Self {
        self.k.one()
    }
    fn from_int_like(&self, n: i64) -> Self {
        self.k.from_int(n)
    }
    fn add(&self, o: &Self) -> Self {
        let p = self.k.0.p;
        FfElem { k: self.k.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| (a + b) % p).collect() }
    }
    fn sub(&self, o: &Self) -> Self {
        let p = self.k.0.p;
        FfElem { k: self.k.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| (a + p - b) % p).collect() }
    }
    fn neg(&self) -> Self {
        let p = self.k.0.p;
        FfElem { k: self.k.clone(), c: self.c.iter().map(|a| (p - a) % p).collect() }
    }
    fn mul(&self, o: &Self) -> Self {
        let k = &self.k.0;
        let p = k.p as u64;
        if k.f == 1 {
            return FfElem { k: self.k.clone(), c: vec![(self.c[0] as u64 * o.c[0] as u64 * k.table[0][0][0] as u64 % p) as u32] };
        }
        let mut acc = vec![0u64; k.f];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let ab = a as u64 * b as u64 % p;
                for (t, &s) in k.table[i][j].iter().enumerate() {
                    acc[t] = (acc[t] + ab * s as u64) % p;
                }
            }
        }
        FfElem { k: self.k.clone(), c: acc.into_iter().map(|x| x as u32).collect() }
    }
    fn inv(&self) -> Result<Self> {
        if self.is_zero_ff() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(self.k.size() - 2))
    }
    fn is_zero(&self) -> bool {
        self.is_zero_ff()
    }
    fn pivot_key(&self) -> i64 {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f9_axioms() {
        // X^2 + 1 is irreducible over F_3
        let k = FiniteField::from_modulus(3, &[1, 0, 1]);
        assert_eq!(k.size(), 9);
        for a in k.elements() {
            if !a.is_zero_ff() {
                assert!(Scalar::mul(&a, &a.inv().unwrap()).is_one());
            }
            for b in k.elements() {
                assert_eq!(Scalar::mul(&a, &b), Scalar::mul(&b, &a));
            }
        }
        let g = k.primitive_element();
        let mut seen = std::collections::HashSet::new();
        let mut x = k.one();
        for _ in 0..8 {
            seen.insert(x.c.clone());
            x = Scalar::mul(&x, &g);
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn square_roots() {
        let k = FiniteField::from_modulus(5, &[2, 0, 1]); // X^2 + 2 over F_5
        for a in k.elements() {
            let s = Scalar::mul(&a, &a);
            let r = s.sqrt().unwrap();
            assert_eq!(Scalar::mul(&r, &r), s);
        }
    }
}
