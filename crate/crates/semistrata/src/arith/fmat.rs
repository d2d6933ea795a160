//! Matrices over a tower: involution, flattening, JSON.

use serde_json::Value;

use crate::arith::field::{Elem, Field};
use crate::arith::linalg::Mat;
use crate::error::{Error, Result};

pub type FMat = Mat<Elem>;

pub fn zeros(f: &Field, r: usize, c: usize) -> FMat {
    Mat::zeros(r, c, &f.zero())
}

pub fn identity(f: &Field, n: usize) -> FMat {
    Mat::identity(n, &f.zero())
}

/// The matrix unit E_kj.
pub fn unit(f: &Field, n: usize, k: usize, j: usize) -> FMat {
    let mut m = zeros(f, n, n);
    m.set(k, j, f.one());
    m
}

pub fn from_ints(f: &Field, rows: &[&[i64]]) -> FMat {
    let r: Vec<Vec<Elem>> = rows.iter().map(|row| row.iter().map(|&x| f.int(x)).collect()).collect();
    Mat::from_rows(r, &f.zero())
}

pub fn diag(f: &Field, d: &[Elem]) -> FMat {
    Mat::diag(d, &f.zero())
}

/// Entrywise ρ.
pub fn rho(m: &FMat) -> FMat {
    m.map(m.zero_scalar(), |x| x.rho())
}

/// ρ applied entrywise, then transposed.
pub fn star(m: &FMat) -> FMat {
    rho(m).transpose()
}

pub fn flatten(m: &FMat) -> Vec<Elem> {
    m.entries().to_vec()
}

pub fn unflatten(f: &Field, n: usize, v: &[Elem]) -> FMat {
    let rows: Vec<Vec<Elem>> = v.chunks(n).map(|c| c.to_vec()).collect();
    Mat::from_rows(rows, &f.zero())
}

/// Smallest valuation among the entries, `None` for the zero matrix.
pub fn min_val(m: &FMat) -> Option<i64> {
    m.entries().iter().filter_map(|x| x.valuation()).min()
}

pub fn is_integral(m: &FMat) -> bool {
    m.entries().iter().all(|x| x.is_integral())
}

pub fn to_json(m: &FMat) -> Value {
    Value::Array((0..m.rows).map(|i| Value::Array(m.row(i).iter().map(|x| x.to_json()).collect())).collect())
}

pub fn from_json(f: &Field, v: &Value) -> Result<FMat> {
    let rows = v.as_array().ok_or_else(|| Error::Schema("matrix must be an array of rows".into()))?;
    let mut out = vec![];
    for r in rows {
        let r = r.as_array().ok_or_else(|| Error::Schema("matrix row must be an array".into()))?;
        out.push(r.iter().map(|x| Elem::from_json(f, x)).collect::<Result<Vec<_>>>()?);
    }
    let c = out.first().map_or(0, |r| r.len());
    if out.iter().any(|r| r.len() != c) {
        return Err(Error::Schema("ragged matrix".into()));
    }
    Ok(Mat::from_rows(out, &f.zero()))
}

pub fn square_from_json(f: &Field, v: &Value) -> Result<FMat> {
    let m = from_json(f, v)?;
    if m.rows != m.cols {
        return Err(Error::Schema(format!("expected a square matrix, got {}x{}", m.rows, m.cols)));
    }
    Ok(m)
}

/// Compact text rendering for reports.
pub fn display(m: &FMat) -> String {
    (0..m.rows).map(|i| m.row(i).iter().map(|x| x.display()).collect::<Vec<_>>().join("  ")).collect::<Vec<_>>().join("\n")
}
