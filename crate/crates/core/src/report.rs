//! Records emitted by the verifier sweeps.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Relative slack allowed on the right-hand side of every checked inequality.
pub const REL_SLACK: f64 = 1e-9;
/// Absolute floor for right-hand sides that are zero up to rounding (e.g. an
/// exponential sum that vanishes by orthogonality evaluates to ~1e-16).
pub const ABS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub suite: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub params: Map<String, Value>,
    pub pass: bool,
}

impl BoundReport {
    /// A report for `lhs <= rhs`.
    pub fn new(suite: &str, lhs: f64, rhs: f64, params: Map<String, Value>) -> Self {
        let pass = lhs <= rhs * (1.0 + REL_SLACK) + ABS_SLACK;
        BoundReport {
            suite: suite.to_string(),
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            params,
            pass,
        }
    }

    /// A report for `|a - b| <= tol * max(1, |b|)`; `lhs` holds the absolute
    /// difference and `rhs` the scaled tolerance.
    pub fn equality(suite: &str, a: f64, b: f64, tol: f64, params: Map<String, Value>) -> Self {
        let lhs = (a - b).abs();
        let rhs = tol * b.abs().max(1.0);
        BoundReport {
            suite: suite.to_string(),
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            params,
            pass: lhs <= rhs,
        }
    }

    /// A report for an exact predicate (`lhs` and `rhs` carry whatever counts
    /// the predicate compared).
    pub fn predicate(
        suite: &str,
        lhs: f64,
        rhs: f64,
        pass: bool,
        params: Map<String, Value>,
    ) -> Self {
        BoundReport {
            suite: suite.to_string(),
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            params,
            pass,
        }
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs != 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Build a params map: `params!{"g" => 2, "lambda" => 5}`.
#[macro_export]
macro_rules! params {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = ::serde_json::Map::new();
        $( m.insert($k.to_string(), ::serde_json::json!($v)); )*
        m
    }};
}
