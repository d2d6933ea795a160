//! Scalars: p-adic numbers, finite fields, tame towers, and generic
//! polynomial and matrix algebra over them.

pub mod factor;
pub mod field;
pub mod finite;
pub mod fmat;
pub mod hensel;
pub mod linalg;
pub mod padic;
pub mod poly;
pub mod scalar;

pub use field::{Elem, Field, FieldSpec, StepKind};
pub use finite::{FfElem, FiniteField};
pub use linalg::Mat;
pub use padic::Qp;
pub use poly::Poly;
pub use scalar::Scalar;
