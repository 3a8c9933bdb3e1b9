use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solvers::linalg;

use super::{Allocation, CoalitionGame};

/// Largest game the `O(4^L)` pair scans accept.
pub const MAX_PAIR_SCAN_AGENTS: usize = 12;

impl<T: Scalar> CoalitionGame<T> {
    fn guard_pair_scan(&self) -> Result<()> {
        if self.num_agents() > MAX_PAIR_SCAN_AGENTS {
            return Err(Error::Capacity(format!(
                "pair scan over {} agents (limit {MAX_PAIR_SCAN_AGENTS})",
                self.num_agents()
            )));
        }
        Ok(())
    }

    /// First disjoint pair with `v(S) + v(T) > v(S ∪ T) + tol`, if any.
    pub fn superadditivity_violation(&self, tol: T) -> Result<Option<(Coalition, Coalition)>> {
        self.guard_pair_scan()?;
        for s in Coalition::all(self.num_agents()) {
            for t in s.complement(self.num_agents()).subsets() {
                if self.value(s) + self.value(t) > self.value(s.union(t)) + tol {
                    return Ok(Some((s, t)));
                }
            }
        }
        Ok(None)
    }

    pub fn is_superadditive(&self, tol: T) -> Result<bool> {
        Ok(self.superadditivity_violation(tol)?.is_none())
    }

    /// First pair with `v(U) + v(V) > v(U ∪ V) + v(U ∩ V) + tol`, if any.
    pub fn supermodularity_violation(&self, tol: T) -> Result<Option<(Coalition, Coalition)>> {
        self.guard_pair_scan()?;
        let all: Vec<Coalition> = Coalition::all(self.num_agents()).collect();
        for &u in &all {
            for &v in &all {
                if self.value(u) + self.value(v)
                    > self.value(u.union(v)) + self.value(u.intersection(v)) + tol
                {
                    return Ok(Some((u, v)));
                }
            }
        }
        Ok(None)
    }

    pub fn is_supermodular(&self, tol: T) -> Result<bool> {
        Ok(self.supermodularity_violation(tol)?.is_none())
    }

    /// A coalition whose core constraint `a` violates, or `None` if `a` is in
    /// the core. Efficiency failures report the grand coalition.
    pub fn core_violation(&self, a: &Allocation<T>, tol: T) -> Result<Option<Coalition>> {
        self.check_allocation(a)?;
        let grand = self.grand();
        if (a.total() - self.grand_value()).abs() > tol {
            return Ok(Some(grand));
        }
        Ok(Coalition::all(self.num_agents())
            .filter(|&s| s != grand && !s.is_empty())
            .find(|&s| a.coalition_sum(s) < self.value(s) - tol))
    }

    pub fn core_contains(&self, a: &Allocation<T>, tol: T) -> Result<bool> {
        Ok(self.core_violation(a, tol)?.is_none())
    }
}

/// Vertices of the core polytope, found by intersecting `L − 1` coalition
/// constraints with the efficiency hyperplane. Intended for plotting small
/// games.
pub fn core_vertices<T: Scalar>(game: &CoalitionGame<T>, tol: T) -> Result<Vec<Allocation<T>>> {
    let l = game.num_agents();
    if l > 5 {
        return Err(Error::Capacity(format!("core vertex enumeration over {l} agents (limit 5)")));
    }
    let grand = game.grand();
    let proper: Vec<Coalition> = Coalition::all(l).filter(|&s| !s.is_empty() && s != grand).collect();
    let mut vertices: Vec<Allocation<T>> = Vec::new();
    let mut chosen = Vec::with_capacity(l);
    combinations(proper.len(), l - 1, &mut chosen, &mut |idx| {
        let mut rows: Vec<Vec<T>> = Vec::with_capacity(l);
        let mut rhs = Vec::with_capacity(l);
        for &k in idx {
            rows.push(indicator(proper[k], l));
            rhs.push(game.value(proper[k]));
        }
        rows.push(indicator(grand, l));
        rhs.push(game.grand_value());
        let Some(x) = linalg::solve_square(&rows, &rhs) else {
            return;
        };
        let a = Allocation { rates: x };
        if game.core_violation(&a, tol).ok().flatten().is_none()
            && !vertices.iter().any(|v| v.max_abs_diff(&a) <= tol)
        {
            vertices.push(a);
        }
    });
    Ok(vertices)
}

fn indicator<T: Scalar>(s: Coalition, l: usize) -> Vec<T> {
    (1..=l).map(|i| if s.contains(i) { T::one() } else { T::zero() }).collect()
}

fn combinations(n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    let start = cur.last().map_or(0, |&i| i + 1);
    for i in start..n {
        cur.push(i);
        combinations(n, k, cur, f);
        cur.pop();
    }
}
