//! The coalitional game `(ℒ, v)` and its core.

mod props;
mod value;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, MAX_AGENTS};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use props::core_vertices;
pub use value::{
    check_w_submodular, clearance_level_games, core_bounds, value_function,
    value_function_conditional, w_submodularity_violation,
};

/// Value table `v: 2^ℒ → ℝ₊`, indexed by coalition bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionGame<T> {
    num_agents: usize,
    values: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct GameFile {
    #[serde(rename = "L")]
    l: usize,
    v: Vec<f64>,
}

impl<T: Scalar> CoalitionGame<T> {
    /// Validates `values[∅] = 0` and `v ≥ 0`. Values in `[−SLACK, 0)` are
    /// rounded to zero.
    pub fn new(num_agents: usize, mut values: Vec<T>) -> Result<Self> {
        if num_agents == 0 || num_agents > MAX_AGENTS {
            return Err(Error::validation("L", format!("{num_agents} is not in 1..={MAX_AGENTS}")));
        }
        if values.len() != 1 << num_agents {
            return Err(Error::validation(
                "v",
                format!("expected {} values, got {}", 1usize << num_agents, values.len()),
            ));
        }
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < -T::SLACK {
                return Err(Error::validation(format!("v[{i}]"), format!("{v} is negative or not finite")));
            }
            if *v < T::zero() {
                *v = T::zero();
            }
        }
        if values[0] != T::zero() {
            return Err(Error::validation("v[0]", "the empty coalition must have value 0"));
        }
        Ok(CoalitionGame { num_agents, values })
    }

    /// Builds a game from a function of the coalition.
    pub fn from_fn(num_agents: usize, f: impl FnMut(Coalition) -> T) -> Result<Self> {
        let values = Coalition::all(num_agents).map(f).collect();
        Self::new(num_agents, values)
    }

    /// `v(S) = Σ_{i∈S} c_i`.
    pub fn additive(c: &[T]) -> Result<Self> {
        Self::from_fn(c.len(), |s| s.members().map(|i| c[i - 1]).sum())
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.num_agents)
    }

    #[inline]
    pub fn value(&self, s: Coalition) -> T {
        self.values[s.index()]
    }

    pub fn grand_value(&self) -> T {
        self.value(self.grand())
    }

    /// Pointwise sum of two games on the same agents.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.num_agents != other.num_agents {
            return Err(Error::Domain("games have different agent counts".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect();
        Self::new(self.num_agents, values)
    }

    pub fn to_json(&self) -> String {
        let file = GameFile {
            l: self.num_agents,
            v: self.values.iter().map(|v| v.as_f64()).collect(),
        };
        serde_json::to_string_pretty(&file).expect("game serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(s)?;
        Self::new(file.l, file.v.into_iter().map(T::of).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    fn check_allocation(&self, a: &Allocation<T>) -> Result<()> {
        if a.rates.len() != self.num_agents {
            return Err(Error::Domain(format!(
                "allocation has {} rates for a {}-agent game",
                a.rates.len(),
                self.num_agents
            )));
        }
        Ok(())
    }

    /// `e(y, S) = v(S) − Σ_{i∈S} y_i`.
    pub fn excess(&self, a: &Allocation<T>, s: Coalition) -> Result<T> {
        self.check_allocation(a)?;
        Ok(self.value(s) - a.coalition_sum(s))
    }

    /// Excesses of all `2^L` coalitions, sorted nonincreasing.
    pub fn excess_vector_sorted(&self, a: &Allocation<T>) -> Result<Vec<T>> {
        self.check_allocation(a)?;
        let mut e: Vec<T> = Coalition::all(self.num_agents)
            .map(|s| self.value(s) - a.coalition_sum(s))
            .collect();
        e.sort_by(|x, y| y.partial_cmp(x).expect("finite excesses"));
        Ok(e)
    }
}

/// Per-agent key rates in bits per source symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation<T> {
    pub rates: Vec<T>,
}

impl<T: Scalar> Allocation<T> {
    pub fn new(rates: Vec<T>) -> Result<Self> {
        if let Some(i) = rates.iter().position(|&r| !r.is_finite() || r < -T::GAME_TOL) {
            return Err(Error::validation(format!("rates[{i}]"), "rates must be finite and nonnegative"));
        }
        Ok(Allocation { rates })
    }

    pub fn num_agents(&self) -> usize {
        self.rates.len()
    }

    pub fn rate(&self, agent: usize) -> T {
        self.rates[agent - 1]
    }

    pub fn coalition_sum(&self, s: Coalition) -> T {
        s.members().map(|i| self.rates[i - 1]).sum()
    }

    pub fn total(&self) -> T {
        self.rates.iter().copied().sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.rates
            .iter()
            .zip(&other.rates)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }
}

/// Bounds `lower ≤ Σ_{i∈S} R_i ≤ upper` that characterise the core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoreBounds<T> {
    pub coalition: Coalition,
    pub lower: T,
    pub upper: T,
}
