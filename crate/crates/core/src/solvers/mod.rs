//! Solution concepts: Shapley value, nucleolus, and the LP machinery behind it.

mod brute;
pub mod linalg;
pub mod lp;
mod nucleolus;
mod shapley;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use brute::{brute_force_nucleolus, lexicographic_cmp, lexicographic_less};
pub use lp::{lp_solve, Constraint, LinearProgram, LpSolution, LpStatus, Relation};
pub use nucleolus::{nucleolus, nucleolus_with, NucleolusStage, NucleolusTrace, TightSetRule, TIGHT_TOL};
pub use shapley::{shapley_closed_form, shapley_permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Shapley,
    Nucleolus,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shapley" => Ok(Method::Shapley),
            "nucleolus" => Ok(Method::Nucleolus),
            other => Err(Error::validation("method", format!("unknown method `{other}`"))),
        }
    }
}

/// Allocation file: `{"method", "rates", "trace"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationReport {
    pub method: Method,
    pub rates: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<serde_json::Value>,
}

impl AllocationReport {
    pub fn new<T: Scalar>(method: Method, rates: &[T], trace: Option<&NucleolusTrace<T>>) -> Self {
        AllocationReport {
            method,
            rates: rates.iter().map(|r| r.as_f64()).collect(),
            trace: trace.map(|t| serde_json::to_value(t).expect("trace serializes")),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let r: AllocationReport = serde_json::from_str(s)?;
        if let Some(i) = r.rates.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::validation(format!("rates[{i}]"), "must be finite and nonnegative"));
        }
        Ok(r)
    }
}
