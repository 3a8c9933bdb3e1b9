//! Discrete memoryless sources observed by the agents and the base station.
//!
//! The workhorse is [`JointSource`], a dense probability table over
//! `(X₀, X₁…X_L, Z)`. The binary degraded family `X_l = X₀ ⊕ B_l` is described by
//! [`DegradedSourceSpec`] and expanded with [`build_degraded_source`].
//!
//! Conventions: `P(X₀ = 1) = q`, all logarithms are base 2.

mod closed_form;
pub(crate) mod joint;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, MAX_AGENTS};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use closed_form::{closed_form_coalition_value, f_value};
pub use joint::{EntropyQuery, JointSource, VarSet};

/// Binary degraded source: `X₀ ~ Bern(q)`, `X_l = X₀ ⊕ B_l`, `B_l ~ Bern(p_l)`
/// independent. Optional clearance levels partition the agents, level 1 being
/// the highest clearance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradedSourceSpec {
    pub q: f64,
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<Vec<usize>>>,
}

impl DegradedSourceSpec {
    pub fn new(q: f64, p: Vec<f64>) -> Result<Self> {
        let spec = DegradedSourceSpec { q, p, levels: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_levels(mut self, levels: Vec<Vec<usize>>) -> Result<Self> {
        self.levels = Some(levels);
        self.validate()?;
        Ok(self)
    }

    /// The source of the worked three-agent example: `q = 0.4`, `p = (0.2, 0.27, 0.25)`.
    pub fn example() -> Self {
        DegradedSourceSpec {
            q: 0.40,
            p: vec![0.20, 0.27, 0.25],
            levels: None,
        }
    }

    pub fn num_agents(&self) -> usize {
        self.p.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::validation("q", format!("{} is not in (0,1)", self.q)));
        }
        if self.p.is_empty() {
            return Err(Error::validation("p", "at least one agent is required"));
        }
        for (i, &pl) in self.p.iter().enumerate() {
            if !(pl > 0.0 && pl < 1.0) {
                return Err(Error::validation(format!("p[{i}]"), format!("{pl} is not in (0,1)")));
            }
        }
        if let Some(levels) = &self.levels {
            validate_partition(levels, self.num_agents())?;
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: DegradedSourceSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Checks that `levels` covers agents `1..=num_agents` exactly once.
pub fn validate_partition(levels: &[Vec<usize>], num_agents: usize) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::validation("levels", "empty partition"));
    }
    let mut seen = Coalition::EMPTY;
    for (q, level) in levels.iter().enumerate() {
        if level.is_empty() {
            return Err(Error::validation(format!("levels[{q}]"), "empty level"));
        }
        for &a in level {
            if a == 0 || a > num_agents {
                return Err(Error::validation(
                    format!("levels[{q}]"),
                    format!("agent {a} is not in 1..={num_agents}"),
                ));
            }
            if seen.contains(a) {
                return Err(Error::validation(format!("levels[{q}]"), format!("agent {a} listed twice")));
            }
            seen = seen.with(a);
        }
    }
    if seen != Coalition::grand(num_agents) {
        return Err(Error::validation("levels", "partition does not cover every agent"));
    }
    Ok(())
}

/// Expands a degraded spec into its dense joint table.
pub fn build_degraded_source<T: Scalar>(spec: &DegradedSourceSpec) -> Result<JointSource<T>> {
    spec.validate()?;
    let l = spec.num_agents();
    if l > MAX_AGENTS {
        return Err(Error::Capacity(format!(
            "{l} agents exceed the dense-table limit of {MAX_AGENTS}"
        )));
    }
    let q = T::of(spec.q);
    let p: Vec<T> = spec.p.iter().map(|&x| T::of(x)).collect();
    let mut src = JointSource::from_fn(l, None, |x0, agents, _| {
        let mut pr = if x0 == 1 { q } else { T::one() - q };
        for (i, &pl) in p.iter().enumerate() {
            let xl = (agents >> i & 1) as u8;
            pr *= if xl != x0 { pl } else { T::one() - pl };
        }
        pr
    })?;
    if !src.mark_markov_verified(T::of(1e-10).max(T::SLACK)) {
        return Err(Error::Consistency("degraded construction failed the Markov check".into()));
    }
    Ok(src)
}
