//! Factorization of polynomials over finite fields: square-free
//! decomposition, distinct-degree splitting, Cantor-Zassenhaus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::finite::{FfElem, FiniteField};
use crate::arith::poly::Poly;
use crate::error::Result;

pub type FfPoly = Poly<FfElem>;

fn pth_root_poly(g: &FfPoly, p: usize) -> FfPoly {
    let z = g.zero_scalar().clone();
    let c: Vec<FfElem> = g.coeffs().iter().step_by(p).map(|a| a.pth_root()).collect();
    Poly::new(c, &z)
}

/// Square-free decomposition of a monic polynomial: pairs (g_i, i) with
/// f = prod g_i^i, g_i square-free and pairwise coprime.
pub fn squarefree(f: &FfPoly) -> Result<Vec<(FfPoly, u32)>> {
    let p = f.zero_scalar().k.p() as usize;
    let mut out = vec![];
    if f.deg_i() <= 0 {
        return Ok(out);
    }
    let df = f.derivative();
    let mut g = f.gcd(&df)?;
    let mut w = f.divrem(&g)?.0;
    let mut i = 1u32;
    while w.deg_i() > 0 {
        let y = w.gcd(&g)?;
        let z = w.divrem(&y)?.0;
        if z.deg_i() > 0 {
            out.push((z.monic()?, i));
        }
        i += 1;
        g = g.divrem(&y)?.0;
        w = y;
    }
    if g.deg_i() > 0 {
        let h = pth_root_poly(&g.monic()?, p);
        for (fac, m) in squarefree(&h)? {
            out.push((fac, m * p as u32));
        }
    }
    Ok(out)
}

/// Distinct-degree factorization of a square-free monic polynomial.
pub fn distinct_degree(f: &FfPoly) -> Result<Vec<(FfPoly, usize)>> {
    let q = f.zero_scalar().k.size() as u128;
    let z = f.zero_scalar().clone();
    let x = Poly::x(&z);
    let mut out = vec![];
    let mut rest = f.clone();
    let mut h = x.clone();
    let mut i = 1;
    while rest.deg_i() >= 2 * i as i64 {
        h = h.powmod(q, &rest)?;
        let g = h.sub(&x).gcd(&rest)?;
        if g.deg_i() > 0 {
            rest = rest.divrem(&g)?.0;
            h = h.rem(&rest)?;
            out.push((g, i));
        }
        i += 1;
    }
    if rest.deg_i() > 0 {
        let d = rest.degree().unwrap();
        out.push((rest.monic()?, d));
    }
    Ok(out)
}

/// Split a product of distinct irreducibles of common degree d.
pub fn equal_degree(f: &FfPoly, d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<FfPoly>> {
    let n = f.degree().unwrap_or(0);
    if n == d || n == 0 {
        return Ok(vec![f.clone()]);
    }
    let k = f.zero_scalar().k.clone();
    let q = k.size() as u128;
    let e = (q.pow(d as u32) - 1) / 2;
    let z = k.zero();
    loop {
        let a: Vec<FfElem> = (0..n).map(|_| k.element(rng.gen_range(0..k.size()))).collect();
        let a = Poly::new(a, &z);
        if a.deg_i() <= 0 {
            continue;
        }
        let g = a.gcd(f)?;
        let u = if g.deg_i() > 0 && g.deg_i() < n as i64 {
            g
        } else {
            let b = a.powmod(e, f)?.sub(&Poly::one(&z));
            b.gcd(f)?
        };
        if u.deg_i() > 0 && u.deg_i() < n as i64 {
            let v = f.divrem(&u)?.0.monic()?;
            let mut out = equal_degree(&u, d, rng)?;
            out.extend(equal_degree(&v, d, rng)?);
            return Ok(out);
        }
    }
}

/// Complete factorization of a monic polynomial into (irreducible,
/// multiplicity), sorted by degree and then coefficients for determinism.
pub fn factor(f: &FfPoly) -> Result<Vec<(FfPoly, u32)>> {
    let f = f.monic()?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out: Vec<(FfPoly, u32)> = vec![];
    for (g, m) in squarefree(&f)? {
        for (h, d) in distinct_degree(&g)? {
            for irr in equal_degree(&h, d, &mut rng)? {
                out.push((irr.monic()?, m));
            }
        }
    }
    out.sort_by_key(|(g, _)| poly_key(g));
    Ok(out)
}

pub fn poly_key(g: &FfPoly) -> (usize, Vec<u64>) {
    let k = &g.zero_scalar().k;
    (g.degree().unwrap_or(0), g.coeffs().iter().map(|c| k.index_of(c)).collect())
}

pub fn is_irreducible(f: &FfPoly) -> Result<bool> {
    if f.deg_i() <= 0 {
        return Ok(false);
    }
    let fs = factor(f)?;
    Ok(fs.len() == 1 && fs[0].1 == 1)
}

/// Build an FfPoly from coordinates of coefficients.
pub fn ffpoly(k: &FiniteField, coeffs: &[i64]) -> FfPoly {
    let z = k.zero();
    Poly::new(coeffs.iter().map(|&c| k.from_int(c)).collect(), &z)
}

pub fn ffpoly_product(fs: &[(FfPoly, u32)], k: &FiniteField) -> FfPoly {
    let mut acc = Poly::one(&k.zero());
    for (g, m) in fs {
        acc = acc.mul(&g.pow(*m));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primary_factors_of_examples() {
        let k = FiniteField::prime(3);
        // X^4
        let f = ffpoly(&k, &[0, 0, 0, 0, 1]);
        let fs = factor(&f).unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].1, 4);
        // (X-1)^2 (X+1)^2 = X^4 - 2X^2 + 1
        let f = ffpoly(&k, &[1, 0, -2, 0, 1]);
        let fs = factor(&f).unwrap();
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().all(|(g, m)| g.degree() == Some(1) && *m == 2));
        // X^2 + 1 irreducible over F_3
        assert!(is_irreducible(&ffpoly(&k, &[1, 0, 1])).unwrap());
    }

    #[test]
    fn pth_powers_are_handled() {
        let k = FiniteField::prime(3);
        // (X+1)^3 (X^2+1)^2
        let a = ffpoly(&k, &[1, 1]).pow(3).mul(&ffpoly(&k, &[1, 0, 1]).pow(2));
        let fs = factor(&a).unwrap();
        assert_eq!(ffpoly_product(&fs, &k).sub(&a).is_zero(), true);
        assert_eq!(fs.len(), 2);
    }
}
