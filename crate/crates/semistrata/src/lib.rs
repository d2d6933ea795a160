//! p-adic towers, hermitian lattice sequences, Witt groups and semisimple
//! strata with checkable certificates.

pub mod arith;
pub mod cert;
pub mod error;
pub mod forms;
pub mod lattices;
pub mod lifting;
pub mod selftest;
pub mod strata;
pub mod witt;

pub use error::{Error, Result};
