//! Dense matrices over a [`Scalar`] with valuation-pivoted elimination.

use crate::arith::poly::Poly;
use crate::arith::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Mat<S: Scalar> {
    pub rows: usize,
    pub cols: usize,
    a: Vec<S>,
    zero: S,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize, zero: &S) -> Mat<S> {
        Mat { rows, cols, a: vec![zero.zero_like(); rows * cols], zero: zero.zero_like() }
    }

    pub fn identity(n: usize, zero: &S) -> Mat<S> {
        let mut m = Mat::zeros(n, n, zero);
        for i in 0..n {
            m.set(i, i, zero.one_like());
        }
        m
    }

    pub fn scalar(n: usize, x: &S) -> Mat<S> {
        let mut m = Mat::zeros(n, n, x);
        for i in 0..n {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>, zero: &S) -> Mat<S> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let a: Vec<S> = rows.into_iter().flatten().collect();
        assert_eq!(a.len(), r * c, "ragged matrix rows");
        Mat { rows: r, cols: c, a, zero: zero.zero_like() }
    }

    pub fn from_cols(cols: &[Vec<S>], zero: &S) -> Mat<S> {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        let mut m = Mat::zeros(r, c, zero);
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn diag(d: &[S], zero: &S) -> Mat<S> {
        let mut m = Mat::zeros(d.len(), d.len(), zero);
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn zero_scalar(&self) -> &S {
        &self.zero
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.a[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: S) {
        self.a[i * self.cols + j] = x;
    }

    pub fn entries(&self) -> &[S] {
        &self.a
    }

    pub fn row(&self, i: usize) -> Vec<S> {
        self.a[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn map<T: Scalar>(&self, zero: &T, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, a: self.a.iter().map(f).collect(), zero: zero.zero_like() }
    }

    pub fn try_map<T: Scalar>(&self, zero: &T, f: impl Fn(&S) -> Result<T>) -> Result<Mat<T>> {
        Ok(Mat { rows: self.rows, cols: self.cols, a: self.a.iter().map(f).collect::<Result<_>>()?, zero: zero.zero_like() })
    }

    pub fn add(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, a: self.a.iter().zip(&o.a).map(|(x, y)| x.add(y)).collect(), zero: self.zero.clone() }
    }

    pub fn sub(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, a: self.a.iter().zip(&o.a).map(|(x, y)| x.sub(y)).collect(), zero: self.zero.clone() }
    }

    pub fn neg(&self) -> Mat<S> {
        self.map(&self.zero, |x| x.neg())
    }

    pub fn scale(&self, s: &S) -> Mat<S> {
        self.map(&self.zero, |x| x.mul(s))
    }

    pub fn mul(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let mut out = Mat::zeros(self.rows, o.cols, &self.zero);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let t = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, t);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = self.zero.clone();
                for j in 0..self.cols {
                    acc = acc.add(&self.get(i, j).mul(&v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Mat<S> {
        let mut out = Mat::zeros(self.cols, self.rows, &self.zero);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|x| x.is_zero())
    }

    pub fn eq_approx(&self, o: &Mat<S>) -> bool {
        self.rows == o.rows && self.cols == o.cols && self.sub(o).is_zero()
    }

    pub fn trace(&self) -> S {
        let mut acc = self.zero.clone();
        for i in 0..self.rows.min(self.cols) {
            acc = acc.add(self.get(i, i));
        }
        acc
    }

    pub fn pow(&self, mut e: u32) -> Mat<S> {
        let mut acc = Mat::identity(self.rows, &self.zero);
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

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat<S> {
        let mut out = Mat::zeros(rows.len(), cols.len(), &self.zero);
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn hstack(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!(self.rows, o.rows);
        let mut out = Mat::zeros(self.rows, self.cols + o.cols, &self.zero);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..o.cols {
                out.set(i, self.cols + j, o.get(i, j).clone());
            }
        }
        out
    }

    pub fn vstack(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, o.cols);
        let mut a = self.a.clone();
        a.extend(o.a.iter().cloned());
        Mat { rows: self.rows + o.rows, cols: self.cols, a, zero: self.zero.clone() }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.cols {
            self.a.swap(i * self.cols + k, j * self.cols + k);
        }
    }

    /// Reduced row echelon form; returns (rref, pivot columns, determinant
    /// factor of the row operations applied to a square input).
    pub fn rref(&self) -> Result<(Mat<S>, Vec<usize>, S)> {
        let mut m = self.clone();
        let mut piv = vec![];
        let mut detf = self.zero.one_like();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let mut best: Option<(i64, usize)> = None;
            for i in r..m.rows {
                let x = m.get(i, c);
                if !x.is_zero() {
                    let k = x.pivot_key();
                    if best.map_or(true, |(bk, _)| k < bk) {
                        best = Some((k, i));
                    }
                }
            }
            let Some((_, i)) = best else { continue };
            if i != r {
                m.swap_rows(i, r);
                detf = detf.neg();
            }
            let pv = m.get(r, c).clone();
            detf = detf.mul(&pv);
            let inv = pv.inv()?;
            for k in 0..m.cols {
                let t = m.get(r, k).mul(&inv);
                m.set(r, k, t);
            }
            m.set(r, c, self.zero.one_like());
            for i2 in 0..m.rows {
                if i2 == r {
                    continue;
                }
                let f = m.get(i2, c).clone();
                if f.is_zero() {
                    continue;
                }
                for k in 0..m.cols {
                    let t = m.get(i2, k).sub(&f.mul(m.get(r, k)));
                    m.set(i2, k, t);
                }
                m.set(i2, c, self.zero.clone());
            }
            piv.push(c);
            r += 1;
        }
        Ok((m, piv, detf))
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.rref()?.1.len())
    }

    pub fn det(&self) -> Result<S> {
        assert!(self.is_square());
        let (_, piv, detf) = self.rref()?;
        if piv.len() < self.rows {
            return Ok(self.zero.clone());
        }
        Ok(detf)
    }

    pub fn inverse(&self) -> Result<Mat<S>> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = self.hstack(&Mat::identity(n, &self.zero));
        let (r, piv, _) = aug.rref()?;
        if piv.len() < n || piv[n - 1] != n - 1 {
            return Err(Error::SingularBasis);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Ok(r.submatrix(&rows, &cols))
    }

    /// Basis of the right kernel, as columns of the returned matrix.
    pub fn kernel(&self) -> Result<Mat<S>> {
        let (r, piv, _) = self.rref()?;
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        let mut out = Mat::zeros(self.cols, free.len(), &self.zero);
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, self.zero.one_like());
            for (i, &pc) in piv.iter().enumerate() {
                out.set(pc, k, r.get(i, fc).neg());
            }
        }
        Ok(out)
    }

    /// Some solution x of self * x = b, or None if inconsistent.
    pub fn solve(&self, b: &[S]) -> Result<Option<Vec<S>>> {
        let bm = Mat::from_cols(&[b.to_vec()], &self.zero);
        let aug = self.hstack(&bm);
        let (r, piv, _) = aug.rref()?;
        if piv.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![self.zero.clone(); self.cols];
        for (i, &pc) in piv.iter().enumerate() {
            x[pc] = r.get(i, self.cols).clone();
        }
        Ok(Some(x))
    }

    /// Characteristic polynomial det(X - A) by Berkowitz (division free).
    pub fn charpoly(&self) -> Poly<S> {
        assert!(self.is_square());
        let n = self.rows;
        let z = &self.zero;
        // v holds coefficients highest degree first
        let mut v: Vec<S> = vec![z.one_like()];
        for r in 0..n {
            // t = [1, -a_rr, -R C, -R A C, ...], length r + 2
            let mut t = vec![z.one_like(), self.get(r, r).neg()];
            let mut col: Vec<S> = (0..r).map(|i| self.get(i, r).clone()).collect();
            for _ in 0..r {
                let mut s = z.clone();
                for j in 0..r {
                    s = s.add(&self.get(r, j).mul(&col[j]));
                }
                t.push(s.neg());
                let next: Vec<S> = (0..r)
                    .map(|i| {
                        let mut acc = z.clone();
                        for j in 0..r {
                            acc = acc.add(&self.get(i, j).mul(&col[j]));
                        }
                        acc
                    })
                    .collect();
                col = next;
            }
            let mut nv = vec![z.clone(); r + 2];
            for i in 0..r + 2 {
                for j in 0..=r {
                    if i >= j && i - j < t.len() {
                        nv[i] = nv[i].add(&t[i - j].mul(&v[j]));
                    }
                }
            }
            v = nv;
        }
        v.reverse();
        Poly::new(v, z)
    }

    /// Minimal polynomial by a Krylov dependency search on the powers of A.
    pub fn minpoly(&self) -> Result<Poly<S>> {
        assert!(self.is_square());
        let n = self.rows;
        let z = &self.zero;
        let mut powers = vec![Mat::identity(n, z)];
        for k in 1..=n {
            let next = powers[k - 1].mul(self);
            let cols: Vec<Vec<S>> = powers.iter().map(|m| m.a.clone()).collect();
            let sys = Mat::from_cols(&cols, z);
            if let Some(x) = sys.solve(&next.a)? {
                let mut c: Vec<S> = x.iter().map(|a| a.neg()).collect();
                c.push(z.one_like());
                let mp = Poly::new(c, z);
                if eval_matrix(&mp, self).is_zero() {
                    return Ok(mp);
                }
            }
            powers.push(next);
        }
        Ok(self.charpoly())
    }
}

/// Evaluate a polynomial at a square matrix (Horner).
pub fn eval_matrix<S: Scalar>(f: &Poly<S>, a: &Mat<S>) -> Mat<S> {
    let n = a.rows;
    let z = a.zero_scalar();
    let mut acc = Mat::zeros(n, n, z);
    for c in f.coeffs().iter().rev() {
        acc = acc.mul(a).add(&Mat::scalar(n, c));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::finite::FiniteField;

    #[test]
    fn charpoly_and_inverse_over_f5() {
        let k = FiniteField::prime(5);
        let z = k.zero();
        let m = Mat::from_rows(vec![vec![k.from_int(1), k.from_int(2)], vec![k.from_int(3), k.from_int(4)]], &z);
        let cp = m.charpoly();
        // X^2 - 5X - 2 = X^2 + 3 over F_5
        assert_eq!(cp.coeffs().iter().map(|c| c.c[0]).collect::<Vec<_>>(), vec![3, 0, 1]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).eq_approx(&Mat::identity(2, &z)));
        assert!(eval_matrix(&cp, &m).is_zero());
    }

    #[test]
    fn kernel_dimension() {
        let k = FiniteField::prime(3);
        let z = k.zero();
        let m = Mat::from_rows(vec![vec![k.from_int(1), k.from_int(1), k.from_int(0)], vec![k.from_int(2), k.from_int(2), k.from_int(0)]], &z);
        let ker = m.kernel().unwrap();
        assert_eq!(ker.cols, 2);
        assert!(m.mul(&ker).is_zero());
    }
}
