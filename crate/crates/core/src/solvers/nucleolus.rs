//! Nucleolus by sequential linear programs.
//!
//! Stage `k` minimises the largest excess `z` over the coalitions that are
//! still free, with earlier stages' coalitions pinned at their excess level.
//! Coalitions tight at the stage optimum join the pinned system, and the
//! loop stops once that system (plus efficiency) has full rank.

use serde::Serialize;

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::game::{Allocation, CoalitionGame};
use crate::scalar::Scalar;

use super::linalg;
use super::lp::{lp_solve, LinearProgram, LpStatus, Relation};

/// Threshold below which a constraint slack counts as tight.
pub const TIGHT_TOL: f64 = 1e-8;

/// Which coalitions get pinned after each stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TightSetRule {
    /// Coalitions tight at every optimum of the stage LP, found with one
    /// auxiliary slack-maximising LP per candidate.
    #[default]
    Essential,
    /// Every coalition tight at the optimum the simplex returned.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NucleolusStage<T> {
    pub z: T,
    pub fixed: Vec<Coalition>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NucleolusTrace<T> {
    pub stages: Vec<NucleolusStage<T>>,
    pub allocation: Vec<T>,
}

pub fn nucleolus<T: Scalar>(game: &CoalitionGame<T>) -> Result<(Allocation<T>, NucleolusTrace<T>)> {
    nucleolus_with(game, TightSetRule::default())
}

struct Stage<'a, T> {
    game: &'a CoalitionGame<T>,
    free: &'a [Coalition],
    pinned: &'a [(Coalition, T)],
}

impl<T: Scalar> Stage<'_, T> {
    fn indicator(&self, s: Coalition, with_z: Option<T>) -> Vec<T> {
        let l = self.game.num_agents();
        let mut row: Vec<T> = (1..=l).map(|i| if s.contains(i) { T::one() } else { T::zero() }).collect();
        row.extend(with_z);
        row
    }

    /// Variables `x₁…x_L, z`, all free.
    fn program(&self, objective: Vec<T>) -> LinearProgram<T> {
        let l = self.game.num_agents();
        let mut lp = LinearProgram::new(objective);
        for j in 0..=l {
            lp.set_free(j);
        }
        for &s in self.free {
            lp.add(self.indicator(s, Some(T::one())), Relation::Ge, self.game.value(s));
        }
        for &(s, rhs) in self.pinned {
            lp.add(self.indicator(s, Some(T::zero())), Relation::Eq, rhs);
        }
        lp.add(self.indicator(self.game.grand(), Some(T::zero())), Relation::Eq, self.game.grand_value());
        lp
    }

    fn min_z(&self) -> Result<(T, Vec<T>)> {
        let l = self.game.num_agents();
        let mut c = vec![T::zero(); l + 1];
        c[l] = T::one();
        let sol = lp_solve(&self.program(c))?;
        match sol.status {
            LpStatus::Optimal => Ok((sol.objective, sol.x)),
            LpStatus::Infeasible => Err(Error::Domain("nucleolus stage program is infeasible".into())),
            LpStatus::Unbounded => Err(Error::Solver("nucleolus stage program is unbounded".into())),
        }
    }

    /// Largest slack `z + x(S) − v(S)` over the stage's optimal face, taken
    /// at `z = z* + η`. A small `η` keeps the face nonempty when `z*` came
    /// out of the simplex a rounding error too low.
    fn max_slack(&self, s: Coalition, z_star: T, tight_tol: T) -> Result<T> {
        let l = self.game.num_agents();
        let mut c = self.indicator(s, Some(T::zero()));
        c.iter_mut().for_each(|v| *v = -*v);
        for eta in [tight_tol / T::of(10.0), tight_tol / T::of(4.0)] {
            let z = z_star + eta;
            let mut lp = self.program(c.clone());
            lp.set_bounds(l, Some(z), Some(z));
            let sol = lp_solve(&lp)?;
            match sol.status {
                LpStatus::Optimal => return Ok(z - sol.objective - self.game.value(s)),
                LpStatus::Unbounded => return Ok(T::infinity()),
                LpStatus::Infeasible => continue,
            }
        }
        Err(Error::Solver("optimal face is empty".into()))
    }
}

pub fn nucleolus_with<T: Scalar>(
    game: &CoalitionGame<T>,
    rule: TightSetRule,
) -> Result<(Allocation<T>, NucleolusTrace<T>)> {
    let l = game.num_agents();
    let grand = game.grand();
    let tight_tol = T::of(TIGHT_TOL).max(T::LP_TOL);
    let mut free: Vec<Coalition> = Coalition::all(l).filter(|&s| !s.is_empty() && s != grand).collect();
    let mut pinned: Vec<(Coalition, T)> = Vec::new();
    let mut stages = Vec::new();
    let mut system = vec![indicator(grand, l)];
    let mut rank = linalg::rank(&system, T::PIVOT_TOL);

    let max_stages = 1usize << l;
    while rank < l {
        if stages.len() >= max_stages || free.is_empty() {
            return Err(Error::Solver(format!("pinned system stuck at rank {rank} of {l}")));
        }
        let stage = Stage { game, free: &free, pinned: &pinned };
        let (z, x) = stage.min_z()?;
        if stages.is_empty() && z > T::GAME_TOL {
            return Err(Error::Domain(format!("the core is empty (smallest max excess {z} > 0)")));
        }
        let tight: Vec<Coalition> = free
            .iter()
            .copied()
            .filter(|&s| z + sum_over(&x, s) - game.value(s) <= tight_tol)
            .collect();
        let fixed = match rule {
            TightSetRule::Literal => tight,
            TightSetRule::Essential => {
                let mut essential = Vec::new();
                for &s in &tight {
                    if stage.max_slack(s, z, tight_tol)? <= tight_tol {
                        essential.push(s);
                    }
                }
                if essential.is_empty() {
                    tight
                } else {
                    essential
                }
            }
        };
        if fixed.is_empty() {
            return Err(Error::Solver("no tight coalition at a stage optimum".into()));
        }
        // Right-hand sides come from the stage optimum so the pinned rows stay
        // mutually consistent; dependent rows add nothing and are dropped.
        for &s in &fixed {
            system.push(indicator(s, l));
            let r = linalg::rank(&system, T::PIVOT_TOL);
            if r > rank {
                rank = r;
                pinned.push((s, sum_over(&x, s)));
            } else {
                system.pop();
            }
        }
        free.retain(|s| !fixed.contains(s));
        stages.push(NucleolusStage { z, fixed, rank });
    }

    let rhs: Vec<T> = std::iter::once(game.grand_value())
        .chain(pinned.iter().map(|&(_, r)| r))
        .collect();
    let x = linalg::solve_full_rank(&system, &rhs, l)
        .ok_or_else(|| Error::Solver("final pinned system is singular".into()))?;
    let trace = NucleolusTrace { stages, allocation: x.clone() };
    Ok((Allocation { rates: x }, trace))
}

fn indicator<T: Scalar>(s: Coalition, l: usize) -> Vec<T> {
    (1..=l).map(|i| if s.contains(i) { T::one() } else { T::zero() }).collect()
}

fn sum_over<T: Scalar>(x: &[T], s: Coalition) -> T {
    s.members().map(|i| x[i - 1]).sum()
}
