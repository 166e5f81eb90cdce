//! Uniform pass/fail records produced by every checker.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::quadrature::QuadSummary;
use crate::tensor::DenseTensor;

/// Relative floating-point slack in every verdict.
pub const VERDICT_REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Equality,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Equality => "equality",
        }
    }

    /// Pass or equality.
    pub fn holds(&self) -> bool {
        !matches!(self, Verdict::Fail)
    }
}

/// Which way the asserted inequality points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `lhs <= rhs`
    Leq,
    /// `lhs >= rhs`
    Geq,
}

/// Scalar parameters of a check; absent ones are omitted from JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Signed slack in the asserted direction: `rhs - lhs` for `leq`, `lhs - rhs` for `geq`.
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub direction: Direction,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<QuadSummary>,
    pub instance_digest: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl InequalityReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, direction: Direction, tolerance: f64) -> Self {
        let margin = match direction {
            Direction::Leq => rhs - lhs,
            Direction::Geq => lhs - rhs,
        };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            margin,
            tolerance,
            verdict: verdict_for(margin, tolerance),
            direction,
            params: Params::default(),
            quad: None,
            instance_digest: String::new(),
            extra: BTreeMap::new(),
            error: None,
        }
    }

    /// A check that could not be evaluated; counted as a failure.
    pub fn errored(name: &str, error: impl ToString) -> Self {
        let mut r = Self::new(name, 0.0, 0.0, Direction::Leq, 0.0);
        r.verdict = Verdict::Fail;
        r.error = Some(error.to_string());
        r
    }

    /// A residual that must stay below `bound`.
    pub fn residual(name: &str, residual: f64, bound: f64) -> Self {
        let mut r = Self::new(name, residual, bound, Direction::Leq, 0.0);
        // a residual at the bound is still within it; never call this equality
        r.verdict = if residual <= bound { Verdict::Pass } else { Verdict::Fail };
        r
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn with_quad(mut self, quad: QuadSummary) -> Self {
        self.quad = Some(quad);
        self
    }

    pub fn with_digest(mut self, digest: String) -> Self {
        self.instance_digest = digest;
        self
    }

    pub fn with_extra(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.extra.insert(key.to_string(), value.into());
        self
    }
}

/// `equality` iff `|margin| <= tol`, `pass` iff `margin > tol`, `fail` otherwise.
pub fn verdict_for(margin: f64, tolerance: f64) -> Verdict {
    if margin.is_nan() {
        Verdict::Fail
    } else if margin.abs() <= tolerance {
        Verdict::Equality
    } else if margin >= -tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// `1e-7 (1 + |lhs| + |rhs|) + budget`.
pub fn verdict_tolerance(lhs: f64, rhs: f64, quad_budget: f64) -> f64 {
    VERDICT_REL_TOL * (1.0 + lhs.abs() + rhs.abs()) + quad_budget
}

/// SHA-256 over a label and the exact bits of the given tensors, hex encoded.
pub fn instance_digest(label: &str, tensors: &[&DenseTensor]) -> String {
    let mut h = Sha256::new();
    h.update(label.as_bytes());
    for t in tensors {
        h.update((t.shape().row_dims().len() as u64).to_le_bytes());
        for &d in t.shape().row_dims().iter().chain(t.shape().col_dims()) {
            h.update((d as u64).to_le_bytes());
        }
        for z in t.entries() {
            h.update(z.re.to_bits().to_le_bytes());
            h.update(z.im.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        assert_eq!(verdict_for(0.0, 1e-9), Verdict::Equality);
        assert_eq!(verdict_for(1e-10, 1e-9), Verdict::Equality);
        assert_eq!(verdict_for(1e-3, 1e-9), Verdict::Pass);
        assert_eq!(verdict_for(-1e-3, 1e-9), Verdict::Fail);
        assert_eq!(verdict_for(f64::NAN, 1.0), Verdict::Fail);
    }

    #[test]
    fn margin_sign_follows_direction() {
        let r = InequalityReport::new("x", 1.0, 2.0, Direction::Leq, 1e-9);
        assert_eq!(r.margin, 1.0);
        let r = InequalityReport::new("x", 1.0, 2.0, Direction::Geq, 1e-9);
        assert_eq!(r.margin, -1.0);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn json_round_trip() {
        let r = InequalityReport::new("gt_two", 1.5, 2.0, Direction::Leq, 1e-7)
            .with_params(Params { p: Some(2.0), ..Params::default() })
            .with_extra("floored", false)
            .with_digest("abc".into());
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"verdict\":\"pass\""));
        let back: InequalityReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let e = InequalityReport::errored("x", "boom");
        let back: InequalityReport = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn digest_depends_on_bits() {
        let a = DenseTensor::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        let b = DenseTensor::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0 + 1e-15]]).unwrap();
        assert_eq!(instance_digest("t", &[&a]), instance_digest("t", &[&a]));
        assert_ne!(instance_digest("t", &[&a]), instance_digest("t", &[&b]));
        assert_eq!(instance_digest("t", &[&a]).len(), 64);
    }
}
