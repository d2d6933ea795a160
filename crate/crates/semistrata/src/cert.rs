//! Certificates: a group element plus named, individually re-checkable
//! memberships.

use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::fmat::{self, FMat};
use crate::arith::Field;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub witness: Value,
}

impl Check {
    pub fn new(name: &str, ok: bool, witness: Value) -> Check {
        Check { name: name.into(), ok, witness }
    }
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub g: FMat,
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn new(g: FMat) -> Certificate {
        Certificate { g, checks: vec![] }
    }

    pub fn push(&mut self, name: &str, ok: bool, witness: Value) {
        self.checks.push(Check::new(name, ok, witness));
    }

    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.ok).map(|c| c.name.as_str()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({ "g": fmat::to_json(&self.g), "checks": self.checks })
    }

    pub fn g_from_json(field: &Field, v: &Value) -> Result<FMat> {
        fmat::square_from_json(field, v.get("g").ok_or_else(|| Error::Schema("certificate needs g".into()))?)
    }
}
