//! Signed-margin reports shared by every verifier.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::measure::Measure;

/// |margin| ≤ EQ_TOL·max(1, |rhs|) counts as equality.
pub const EQ_TOL: f64 = 1e-6;
/// Relative part of the violation tolerance; a quadrature estimate is added.
pub const VIOLATION_RTOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Holds,
    Equality,
    Violated,
    /// The hypothesis of the inequality failed on the grid; the conclusion
    /// was still evaluated and is reported alongside.
    ViolatedHypothesis,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Equality => "equality",
            Status::Violated => "violated",
            Status::ViolatedHypothesis => "violated-hypothesis",
        }
    }

    pub fn is_violation(self) -> bool {
        matches!(self, Status::Violated | Status::ViolatedHypothesis)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One inequality instance `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs.
    pub margin: f64,
    /// margin / max(1, |rhs|).
    pub rel_margin: f64,
    pub status: Status,
    pub tolerance: f64,
    pub witness: Option<Vec<f64>>,
    pub meta: BTreeMap<String, Value>,
}

pub fn classify(margin: f64, rhs: f64, tolerance: f64) -> Status {
    if !(margin >= -tolerance) {
        Status::Violated
    } else if margin.abs() <= EQ_TOL * rhs.abs().max(1.0) {
        Status::Equality
    } else {
        Status::Holds
    }
}

impl VerificationReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            rel_margin: margin / rhs.abs().max(1.0),
            status: classify(margin, rhs, tolerance),
            tolerance,
            witness: None,
            meta: BTreeMap::new(),
        }
    }

    /// Report from values at two resolutions: the fine values are reported and
    /// their differences from the coarse ones widen the tolerance.
    pub fn two_resolution(name: impl Into<String>, coarse: (f64, f64), fine: (f64, f64)) -> Self {
        let quad_err = (fine.0 - coarse.0).abs() + (fine.1 - coarse.1).abs();
        let tol = VIOLATION_RTOL * fine.1.abs().max(1.0) + quad_err;
        Self::new(name, fine.0, fine.1, tol).with_meta("quadrature_error", quad_err)
    }

    pub fn with_witness(mut self, witness: Vec<f64>) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta.get(key).and_then(Value::as_f64)
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }
}

/// Evaluate `f` on `measure` and on its refinement.
pub(crate) fn at_two_resolutions<T>(measure: &Measure, f: impl Fn(&Measure) -> Result<T>) -> Result<(T, T)> {
    let coarse = f(measure)?;
    let fine = f(&measure.refined()?)?;
    Ok((coarse, fine))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_rules() {
        assert_eq!(VerificationReport::new("a", 1.0, 2.0, 1e-7).status, Status::Holds);
        assert_eq!(VerificationReport::new("a", 1.0, 1.0 + 1e-9, 1e-7).status, Status::Equality);
        assert_eq!(VerificationReport::new("a", 1.0, 1.0 - 1e-8, 1e-7).status, Status::Equality);
        assert_eq!(VerificationReport::new("a", 1.0, 0.5, 1e-7).status, Status::Violated);
        assert_eq!(VerificationReport::new("a", f64::NAN, 0.5, 1e-7).status, Status::Violated);
    }

    #[test]
    fn json_fields_are_exact() {
        let r = VerificationReport::new("mlsi", 0.25, 0.5, 1e-7)
            .with_witness(vec![0.5])
            .with_meta("lambda", 1.0);
        let v = serde_json::to_value(&r).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        let mut expected = vec![
            "name", "lhs", "rhs", "margin", "rel_margin", "status", "tolerance", "witness", "meta",
        ];
        expected.sort();
        let mut got = keys.clone();
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(v["status"], "holds");
        let back: VerificationReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
        let s = serde_json::to_value(Status::ViolatedHypothesis).unwrap();
        assert_eq!(s, "violated-hypothesis");
    }
}
