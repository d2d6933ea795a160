//! The small amount of ring structure shared by exact finite-field scalars
//! and precision-tracked p-adic scalars, so matrices and polynomials can be
//! written once.

use std::fmt::Debug;

use crate::error::Result;

pub trait Scalar: Clone + Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_int_like(&self, n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self>;
    /// Zero to working precision.
    fn is_zero(&self) -> bool;
    /// Pivot preference for elimination: smaller is better.  For p-adic
    /// scalars this is the valuation, for exact scalars a constant.
    fn pivot_key(&self) -> i64;

    fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    fn eq_approx(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }
}
