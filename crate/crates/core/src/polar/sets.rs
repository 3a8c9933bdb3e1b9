use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::profile::EntropyProfile;

pub const DEFAULT_BETA: f64 = 0.3;

/// High-entropy (`h ≥ δ_N`) and very-high-entropy (`h ≥ 1 − δ_N`) index
/// sets, 0-based and ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarIndexSets {
    pub h_set: Vec<usize>,
    pub v_set: Vec<usize>,
    pub delta: f64,
    pub beta: f64,
}

/// `δ_N = 2^{−N^β}`.
pub fn delta_n(n: usize, beta: f64) -> f64 {
    (-(n as f64).powf(beta)).exp2()
}

pub fn build_index_sets(profile: &EntropyProfile, beta: f64) -> Result<PolarIndexSets> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::validation("beta", format!("{beta} is not in (0, 1/2)")));
    }
    let delta = delta_n(profile.n, beta);
    let h_set = (0..profile.n).filter(|&i| profile.h[i] >= delta).collect();
    let v_set = (0..profile.n).filter(|&i| profile.h[i] >= 1.0 - delta).collect();
    Ok(PolarIndexSets { h_set, v_set, delta, beta })
}
