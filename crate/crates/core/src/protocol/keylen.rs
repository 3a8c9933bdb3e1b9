//! Key sizing and leftover-hash bookkeeping.

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::game::Allocation;
use crate::source::{EntropyQuery, JointSource, VarSet};

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::validation("eps", format!("{eps} is not in (0,1)")));
    }
    Ok(())
}

/// `r_l = ⌊N·B·(R_l − ε)⌋`, clamped at 0. The single margin `ε` stands in
/// for the lower-order terms of the asymptotic key-length analysis.
pub fn key_lengths_from_allocation(a: &Allocation<f64>, n: usize, b: usize, eps: f64) -> Result<Vec<usize>> {
    check_eps(eps)?;
    let nb = (n * b) as f64;
    Ok(a.rates
        .iter()
        .map(|&r| {
            let len = (nb * (r - eps)).floor();
            if len > 0.0 {
                len as usize
            } else {
                0
            }
        })
        .collect())
}

/// `sqrt(Σ_{∅≠S} 2^{r_S − H∞(S)})` with `r_S = Σ_{i∈S} r_i`.
///
/// `min_entropy(S)` supplies the min-entropy lower bound of coalition `S`;
/// a value above 1 means the bound says nothing.
pub fn leakage_bound(r: &[usize], mut min_entropy: impl FnMut(Coalition) -> f64) -> f64 {
    let grand = Coalition::grand(r.len());
    let sum: f64 = grand
        .subsets()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let rs: usize = s.members().map(|i| r[i - 1]).sum();
            (rs as f64 - min_entropy(s)).exp2()
        })
        .sum();
    sum.sqrt()
}

/// `(1 − ε)·N·B·I(X_S; X₀)`, the leading term of the min-entropy of the
/// coalition's observations after reconciliation.
pub fn min_entropy_floor(n: usize, b: usize, eps: f64, src: &JointSource<f64>, s: Coalition) -> Result<f64> {
    min_entropy_floor_given(n, b, eps, src, s, Coalition::EMPTY)
}

/// As [`min_entropy_floor`], with the observations of `given` public:
/// `(1 − ε)·N·B·I(X_S; X₀ | X_given)`.
pub fn min_entropy_floor_given(
    n: usize,
    b: usize,
    eps: f64,
    src: &JointSource<f64>,
    s: Coalition,
    given: Coalition,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::validation("eps", format!("{eps} is not in [0,1]")));
    }
    if s.is_empty() {
        return Err(Error::Precondition("min-entropy floor of the empty coalition".into()));
    }
    if !src.is_markov_verified() && !src.verify_markov(1e-10) {
        return Err(Error::Precondition("source is not degraded".into()));
    }
    let info = src.mutual_information(
        &EntropyQuery::mutual(VarSet::agents(s), VarSet::X0).given(VarSet::agents(given)),
    )?;
    Ok((1.0 - eps) * (n * b) as f64 * info)
}
