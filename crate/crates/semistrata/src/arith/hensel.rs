//! Lifting coprime residue factorizations, and Bézout coefficients.

use crate::arith::factor::FfPoly;
use crate::arith::field::{Elem, Field};
use crate::arith::poly::Poly;
use crate::error::{Error, Result};

pub type FPoly = Poly<Elem>;

/// Reduce an integral polynomial to the residue field.
pub fn reduce_poly(f: &FPoly, k: &Field) -> Result<FfPoly> {
    let rz = k.residue_field().zero();
    let c = f.coeffs().iter().map(|a| a.residue()).collect::<Result<Vec<_>>>()?;
    Ok(Poly::new(c, &rz))
}

/// Lift a residue polynomial coefficientwise.
pub fn lift_poly(g: &FfPoly, k: &Field) -> FPoly {
    Poly::new(g.coeffs().iter().map(|a| k.lift(a)).collect(), &k.zero())
}

fn is_integral(f: &FPoly) -> bool {
    f.coeffs().iter().all(|a| a.valuation().map_or(true, |v| v >= 0))
}

/// Quadratic Hensel lifting of f̄ = ḡ₀ḡ₁ to f = g₀g₁ with monic g₀, g₁.
pub fn hensel_factor(f: &FPoly, g0: &FfPoly, g1: &FfPoly, k: &Field) -> Result<(FPoly, FPoly)> {
    if !is_integral(f) {
        return Err(Error::NotIntegral);
    }
    if !f.lead().sub(&k.one()).is_zero() {
        return Err(Error::HypothesisFailed("polynomial is not monic".into()));
    }
    let (d, s_bar, t_bar) = g0.xgcd(g1)?;
    if d.deg_i() != 0 {
        return Err(Error::NotCoprime);
    }
    let fbar = reduce_poly(f, k)?;
    if !fbar.sub(&g0.mul(g1)).is_zero() {
        return Err(Error::HypothesisFailed("residue factors do not multiply to the reduction".into()));
    }
    let mut g = lift_poly(&g0.monic()?, k);
    let mut h = lift_poly(&g1.monic()?, k);
    let mut s = lift_poly(&s_bar, k);
    let mut t = lift_poly(&t_bar, k);
    let one = FPoly::one(&k.zero());
    let dg = g.degree().unwrap_or(0);
    let budget = 64 - ((k.prec() as u64) * (k.e() as u64) + 1).leading_zeros() + 6;
    for _ in 0..budget {
        let e = f.sub(&g.mul(&h));
        if e.is_zero() {
            return Ok((g, h));
        }
        // s g + t h = 1 mod m, h monic
        let (q, r) = s.mul(&e).divrem(&h)?;
        let gs = g.add(&t.mul(&e)).add(&q.mul(&g));
        let hs = h.add(&r);
        let b = s.mul(&gs).add(&t.mul(&hs)).sub(&one);
        let (c, dd) = s.mul(&b).divrem(&hs)?;
        let ss = s.sub(&dd);
        let ts = t.sub(&t.mul(&b)).sub(&c.mul(&gs));
        // coefficients above the degree vanish modulo the new precision
        g = truncate_monic(&gs, dg, k);
        h = hs;
        t = ts.rem(&g)?;
        s = ss.rem(&h)?;
    }
    if f.sub(&g.mul(&h)).is_zero() {
        return Ok((g, h));
    }
    Err(Error::NonConvergence("Hensel lifting".into()))
}

fn truncate_monic(g: &FPoly, d: usize, k: &Field) -> FPoly {
    let mut c: Vec<Elem> = (0..d).map(|i| g.coeff(i)).collect();
    c.push(k.one());
    Poly::new(c, &k.zero())
}

/// Bézout coefficients a₀g₀ + a₁g₁ = 1 for coprime polynomials.
pub fn bezout_combine(g0: &FPoly, g1: &FPoly) -> Result<(FPoly, FPoly)> {
    let (d, a0, a1) = g0.xgcd(g1)?;
    if d.deg_i() != 0 {
        return Err(Error::NotCoprime);
    }
    Ok((a0, a1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor::ffpoly;

    fn q3() -> Field {
        Field::qp(3, 24).unwrap()
    }

    fn fpoly(k: &Field, c: &[i64]) -> FPoly {
        Poly::new(c.iter().map(|&x| k.int(x)).collect(), &k.zero())
    }

    #[test]
    fn split_x2_minus_10() {
        let k = q3();
        let rf = k.residue_field();
        let f = fpoly(&k, &[-10, 0, 1]);
        let (g0, g1) = hensel_factor(&f, &ffpoly(&rf, &[-1, 1]), &ffpoly(&rf, &[1, 1]), &k).unwrap();
        assert!(g0.mul(&g1).sub(&f).is_zero());
        let r = g0.coeff(0).neg();
        assert!(r.mul(&r).sub(&k.int(10)).is_zero());
    }

    #[test]
    fn exact_factors_are_fixed() {
        let k = q3();
        let rf = k.residue_field();
        let f = fpoly(&k, &[-1, 0, 1]);
        let (g0, g1) = hensel_factor(&f, &ffpoly(&rf, &[-1, 1]), &ffpoly(&rf, &[1, 1]), &k).unwrap();
        assert!(g0.sub(&fpoly(&k, &[-1, 1])).is_zero());
        assert!(g1.sub(&fpoly(&k, &[1, 1])).is_zero());
    }

    #[test]
    fn coprimality_is_required() {
        let k = q3();
        let rf = k.residue_field();
        let f = fpoly(&k, &[-3, 0, 1]);
        let x = ffpoly(&rf, &[0, 1]);
        assert_eq!(hensel_factor(&f, &x, &x, &k).unwrap_err(), Error::NotCoprime);
        let x = fpoly(&k, &[0, 1]);
        assert_eq!(bezout_combine(&x, &x).unwrap_err(), Error::NotCoprime);
    }

    #[test]
    fn bezout_for_linear_pair() {
        let k = q3();
        let (a0, a1) = bezout_combine(&fpoly(&k, &[-1, 1]), &fpoly(&k, &[1, 1])).unwrap();
        assert!(a0.coeff(0).sub(&k.rational(-1, 2).unwrap()).is_zero());
        assert!(a1.coeff(0).sub(&k.rational(1, 2).unwrap()).is_zero());
        let (a0, a1) = bezout_combine(&FPoly::one(&k.zero()), &fpoly(&k, &[5, 0, 1])).unwrap();
        assert!(a0.sub(&FPoly::one(&k.zero())).is_zero() && a1.is_zero());
    }
}
