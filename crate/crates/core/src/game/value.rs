use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::source::{validate_partition, JointSource, VarSet};
use crate::source::joint::EntropyMemo;

use super::{CoalitionGame, CoreBounds};

fn require_markov<T: Scalar>(src: &JointSource<T>) -> Result<()> {
    if src.is_markov_verified() || src.verify_markov(T::of(1e-10).max(T::SLACK)) {
        Ok(())
    } else {
        Err(Error::Precondition(
            "source does not satisfy X_S - X0 - X_T for disjoint coalitions".into(),
        ))
    }
}

fn conditional_game<T: Scalar>(src: &JointSource<T>, with_z: bool) -> Result<CoalitionGame<T>> {
    let l = src.num_agents();
    if l == 0 {
        return Err(Error::Domain("source has no agents".into()));
    }
    let grand = src.grand();
    let mut memo = EntropyMemo::new(src);
    let mut values = Vec::with_capacity(1 << l);
    for s in Coalition::all(l) {
        let mut given = VarSet::agents(s.complement(l));
        given.z = with_z;
        values.push(memo.mi(VarSet::agents(s), VarSet::X0, given)?);
    }
    debug_assert!(values.len() == 1 << l && grand.index() == values.len() - 1);
    CoalitionGame::new(l, values)
}

/// `v(S) = I(X_S; X₀ | X_{S^c})` for every coalition.
pub fn value_function<T: Scalar>(src: &JointSource<T>) -> Result<CoalitionGame<T>> {
    require_markov(src)?;
    conditional_game(src, false)
}

/// `v^Z(S) = I(X_S; X₀ | X_{S^c}, Z)` for a source carrying an eavesdropper
/// component `Z`.
pub fn value_function_conditional<T: Scalar>(src: &JointSource<T>) -> Result<CoalitionGame<T>> {
    if !src.has_z() {
        return Err(Error::Domain("source has no Z component".into()));
    }
    require_markov(src)?;
    conditional_game(src, true)
}

/// One game per clearance level. Level `q` plays on its own agents with the
/// observations of all strictly lower levels as eavesdropper side information;
/// higher levels are marginalised out.
pub fn clearance_level_games<T: Scalar>(
    src: &JointSource<T>,
    levels: &[Vec<usize>],
) -> Result<Vec<CoalitionGame<T>>> {
    validate_partition(levels, src.num_agents()).map_err(|e| Error::Domain(e.to_string()))?;
    let mut games = Vec::with_capacity(levels.len());
    for (q, level) in levels.iter().enumerate() {
        let own = Coalition::from_agents(level.iter().copied());
        let lower = Coalition::from_agents(levels[q + 1..].iter().flatten().copied());
        let mut sub = src.project(own, lower)?;
        if !sub.mark_markov_verified(T::of(1e-10).max(T::SLACK)) {
            return Err(Error::Precondition(format!("level {} source is not degraded", q + 1)));
        }
        games.push(if sub.has_z() {
            value_function_conditional(&sub)?
        } else {
            value_function(&sub)?
        });
    }
    Ok(games)
}

/// `lower = I(X_S; X₀) − I(X_S; X_{S^c})` (clamped at 0), `upper = I(X_S; X₀)`.
pub fn core_bounds<T: Scalar>(src: &JointSource<T>, s: Coalition) -> Result<CoreBounds<T>> {
    require_markov(src)?;
    let l = src.num_agents();
    if !s.is_subset_of(src.grand()) {
        return Err(Error::Domain(format!("{s} is outside the agent set")));
    }
    if s.is_empty() {
        return Ok(CoreBounds { coalition: s, lower: T::zero(), upper: T::zero() });
    }
    let mut memo = EntropyMemo::new(src);
    let xs = VarSet::agents(s);
    let upper = memo.mi(xs, VarSet::X0, VarSet::EMPTY)?;
    let leak = memo.mi(xs, VarSet::agents(s.complement(l)), VarSet::EMPTY)?;
    Ok(CoreBounds { coalition: s, lower: (upper - leak).max(T::zero()), upper })
}

/// A pair `(U, V)` of subsets of `S` with
/// `w(U) + w(V) < w(U ∪ V) + w(U ∩ V) − tol`, where
/// `w(T) = I(X_T; X₀ | X_{S^c})`.
pub fn w_submodularity_violation<T: Scalar>(
    src: &JointSource<T>,
    s: Coalition,
    tol: T,
) -> Result<Option<(Coalition, Coalition)>> {
    require_markov(src)?;
    let l = src.num_agents();
    if !s.is_subset_of(src.grand()) {
        return Err(Error::Domain(format!("{s} is outside the agent set")));
    }
    if s.len() > super::props::MAX_PAIR_SCAN_AGENTS {
        return Err(Error::Capacity(format!("pair scan over {} agents", s.len())));
    }
    let mut memo = EntropyMemo::new(src);
    let given = VarSet::agents(s.complement(l));
    let subsets: Vec<Coalition> = s.subsets().collect();
    let mut w = vec![T::zero(); 1 << l];
    for &t in &subsets {
        w[t.index()] = memo.mi(VarSet::agents(t), VarSet::X0, given)?;
    }
    for &u in &subsets {
        for &v in &subsets {
            if w[u.index()] + w[v.index()] < w[u.union(v).index()] + w[u.intersection(v).index()] - tol {
                return Ok(Some((u, v)));
            }
        }
    }
    Ok(None)
}

pub fn check_w_submodular<T: Scalar>(src: &JointSource<T>, s: Coalition, tol: T) -> Result<bool> {
    Ok(w_submodularity_violation(src, s, tol)?.is_none())
}
