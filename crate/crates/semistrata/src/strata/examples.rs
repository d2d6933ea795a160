//! The two counterexample pairs, built at a chosen precision.

use crate::arith::fmat;
use crate::arith::{Field, FieldSpec, StepKind};
use crate::error::Result;
use crate::forms::HermForm;
use crate::lattices::LatticeSeq;
use crate::strata::Stratum;

/// Period-2 chain over Q3 with jumps (0,0,0,1); b = π⁻¹diag(1,1,−1,−1)
/// against −b.
pub fn gl_pair(prec: u32) -> Result<(Stratum, Stratum)> {
    let f = Field::qp(3, prec)?;
    let lat = LatticeSeq::standard(&f, vec![0, 0, 0, 1], 2)?;
    let pi = f.pi_pow(-1);
    let b = fmat::diag(&f, &[pi.clone(), pi.clone(), pi.neg(), pi.neg()]);
    let s1 = Stratum::new(lat.clone(), 2, 1, b.clone(), None)?;
    let s2 = Stratum::new(lat, 2, 1, b.neg(), None)?;
    Ok((s1, s2))
}

/// Q3(√3) with conjugation, the antidiagonal skew-hermitian form and the
/// chain with jumps (0,1,2,3), e = 4.
pub fn skew_pair(prec: u32) -> Result<(Stratum, Stratum)> {
    let f = Field::new(&FieldSpec::qp(3).step(StepKind::Eisenstein, &[-3, 0, 1]).conjugate(None), Some(prec))?;
    let h = HermForm::new(&f, -1, fmat::from_ints(&f, &[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, -1, 0, 0], &[-1, 0, 0, 0]]))?;
    let lat = LatticeSeq::standard(&f, vec![0, 1, 2, 3], 4)?;
    let pi = f.pi_pow(-1);
    let zp = pi.mul(&f.int(2));
    let b = fmat::diag(&f, &[zp.clone(), pi.clone(), pi.clone(), zp.clone()]);
    let b2 = fmat::diag(&f, &[pi.clone(), zp.clone(), zp, pi]);
    let s1 = Stratum::new(lat.clone(), 4, 3, b, Some(h.clone()))?;
    let s2 = Stratum::new(lat, 4, 3, b2, Some(h))?;
    Ok((s1, s2))
}

/// The element swapping the two blocks in the general-linear example.
pub fn gl_swap(f: &Field) -> fmat::FMat {
    fmat::from_ints(f, &[&[0, 0, 1, 0], &[0, 0, 0, 1], &[1, 0, 0, 0], &[0, 1, 0, 0]])
}

/// (12)(34), which intertwines the skew pair inside G.
pub fn skew_swap(f: &Field) -> fmat::FMat {
    fmat::from_ints(f, &[&[0, 1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 0]])
}
