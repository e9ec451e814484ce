//! Structured inequality reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A constant was measured; nothing is asserted about it.
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub ineq_id: String,
    pub space: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub lhs: f64,
    /// Explicit right-hand side, or the measured constant.
    pub rhs: f64,
    /// `rhs - lhs` for explicit checks.
    pub margin: Option<f64>,
    pub status: Status,
    pub pass: Option<bool>,
}

impl InequalityReport {
    /// Explicit check `lhs <= rhs (1 + rel_tol)`.
    pub fn check<T: Real>(ineq_id: &str, space: &str, lhs: T, rhs: T, rel_tol: T) -> Self {
        let ok = lhs <= rhs + rel_tol * rhs.abs();
        Self::new(ineq_id, space, lhs.to_f64_lossy(), rhs.to_f64_lossy(), ok)
    }

    /// Explicit check with an absolute tolerance.
    pub fn check_abs<T: Real>(ineq_id: &str, space: &str, lhs: T, rhs: T, abs_tol: T) -> Self {
        let ok = lhs <= rhs + abs_tol;
        Self::new(ineq_id, space, lhs.to_f64_lossy(), rhs.to_f64_lossy(), ok)
    }

    /// Pass/fail of a shape property, recorded with its two sides.
    pub fn shape(ineq_id: &str, space: &str, lhs: f64, rhs: f64, ok: bool) -> Self {
        Self::new(ineq_id, space, lhs, rhs, ok)
    }

    fn new(ineq_id: &str, space: &str, lhs: f64, rhs: f64, ok: bool) -> Self {
        Self {
            ineq_id: ineq_id.into(),
            space: space.into(),
            params: BTreeMap::new(),
            lhs,
            rhs,
            margin: Some(rhs - lhs),
            status: if ok { Status::Pass } else { Status::Fail },
            pass: Some(ok),
        }
    }

    /// A measured constant: `lhs` is the observed quantity and `rhs` the
    /// constant it implies.
    pub fn measured<T: Real>(ineq_id: &str, space: &str, lhs: T, constant: T) -> Self {
        Self {
            ineq_id: ineq_id.into(),
            space: space.into(),
            params: BTreeMap::new(),
            lhs: lhs.to_f64_lossy(),
            rhs: constant.to_f64_lossy(),
            margin: None,
            status: Status::Measured,
            pass: None,
        }
    }

    pub fn with<V: Into<serde_json::Value>>(mut self, key: &str, value: V) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn with_num<T: Real>(self, key: &str, value: T) -> Self {
        self.with(key, finite_json(value.to_f64_lossy()))
    }

    pub fn is_failure(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

fn finite_json(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v).map_or(serde_json::Value::Null, serde_json::Value::Number)
}
