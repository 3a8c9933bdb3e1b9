//! Dense two-phase simplex with Bland's rule.
//!
//! Variable bounds are removed by substitution before solving: a finite lower
//! bound shifts the variable, a lone finite upper bound reflects it, a free
//! variable is split into a difference of two nonnegative ones, and a finite
//! upper bound on a shifted variable becomes an extra `≤` row.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// `minimize c·x` subject to linear constraints and per-variable bounds.
/// Variables default to `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub bounds: Vec<(Option<T>, Option<T>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Optimal objective value; meaningful only when `status` is optimal.
    pub objective: T,
    pub x: Vec<T>,
}

impl<T: Scalar> LpSolution<T> {
    fn without(status: LpStatus) -> Self {
        LpSolution { status, objective: T::nan(), x: Vec::new() }
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(objective: Vec<T>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            constraints: Vec::new(),
            bounds: vec![(Some(T::zero()), None); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn set_bounds(&mut self, var: usize, lo: Option<T>, hi: Option<T>) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, None, None)
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::validation("bounds", "one bound pair per variable"));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("objective", "coefficients must be finite"));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::validation(
                    format!("constraints[{i}]"),
                    format!("{} coefficients for {n} variables", c.coeffs.len()),
                ));
            }
            if c.coeffs.iter().any(|a| !a.is_finite()) || !c.rhs.is_finite() {
                return Err(Error::validation(format!("constraints[{i}]"), "coefficients must be finite"));
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for c in &self.constraints {
            let lhs: T = c.coeffs.iter().zip(x).map(|(&a, &v)| a * v).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (&(lo, hi), &v) in self.bounds.iter().zip(x) {
            if let Some(lo) = lo {
                worst = worst.max(lo - v);
            }
            if let Some(hi) = hi {
                worst = worst.max(v - hi);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy)]
enum VarMap<T> {
    Shift { col: usize, lo: T },
    Reflect { col: usize, hi: T },
    Split { pos: usize, neg: usize },
}

const MAX_ITERATIONS: usize = 50_000;

struct Tableau<T> {
    rows: Vec<Vec<T>>, // last entry is the right-hand side
    basis: Vec<usize>,
    ncols: usize,
    tol: T,
}

enum Step {
    Optimal,
    Unbounded,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != T::zero() {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = T::zero();
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[T]) -> Vec<T> {
        let mut d = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != T::zero() {
                for (dj, &a) in d.iter_mut().zip(row.iter()) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn objective(&self, cost: &[T]) -> T {
        self.rows.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[self.ncols]).sum()
    }

    /// Minimises `cost` over the columns allowed to enter, using Bland's rule.
    fn run(&mut self, cost: &[T], allowed: &[bool]) -> Result<Step> {
        for _ in 0..MAX_ITERATIONS {
            let d = self.reduced_costs(cost);
            let Some(enter) = (0..self.ncols).find(|&j| allowed[j] && d[j] < -self.tol) else {
                return Ok(Step::Optimal);
            };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > self.tol {
                    let ratio = row[self.ncols].max(T::zero()) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - self.tol
                                || (ratio <= best + self.tol && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Step::Unbounded);
            };
            self.pivot(r, enter);
        }
        Err(Error::Solver(format!("simplex exceeded {MAX_ITERATIONS} iterations")))
    }
}

/// Solves `lp`. Infeasible and unbounded programs are reported through the
/// status, not as errors.
pub fn lp_solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    lp.validate()?;
    let tol = T::LP_TOL;
    let n = lp.num_vars();

    // substitute bounds
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut extra_rows: Vec<(usize, T)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        match (lo, hi) {
            (Some(lo), Some(hi)) if lo > hi + tol => return Ok(LpSolution::without(LpStatus::Infeasible)),
            (Some(lo), hi) => {
                if let Some(hi) = hi {
                    extra_rows.push((ncols, (hi - lo).max(T::zero())));
                }
                maps.push(VarMap::Shift { col: ncols, lo });
                ncols += 1;
            }
            (None, Some(hi)) => {
                maps.push(VarMap::Reflect { col: ncols, hi });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }
    }
    let structural = ncols;

    // rows over structural columns, with relation and rhs
    let mut rows: Vec<(Vec<T>, Relation, T)> = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![T::zero(); structural];
        let mut rhs = c.rhs;
        for (j, &cj) in c.coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    a[col] += cj;
                    rhs -= cj * lo;
                }
                VarMap::Reflect { col, hi } => {
                    a[col] -= cj;
                    rhs -= cj * hi;
                }
                VarMap::Split { pos, neg } => {
                    a[pos] += cj;
                    a[neg] -= cj;
                }
            }
        }
        rows.push((a, c.relation, rhs));
    }
    for &(col, ub) in &extra_rows {
        let mut a = vec![T::zero(); structural];
        a[col] = T::one();
        rows.push((a, Relation::Le, ub));
    }
    for (a, rel, rhs) in rows.iter_mut() {
        if *rhs < T::zero() {
            a.iter_mut().for_each(|v| *v = -*v);
            *rhs = -*rhs;
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // slack / surplus columns, then artificials
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let total = structural + n_slack + n_art;
    let mut tab = Tableau { rows: Vec::with_capacity(m), basis: Vec::with_capacity(m), ncols: total, tol };
    let (mut s, mut art) = (structural, structural + n_slack);
    for (a, rel, rhs) in &rows {
        let mut row = a.clone();
        row.resize(total + 1, T::zero());
        row[total] = *rhs;
        match rel {
            Relation::Le => {
                row[s] = T::one();
                tab.basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -T::one();
                s += 1;
                row[art] = T::one();
                tab.basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                row[art] = T::one();
                tab.basis.push(art);
                art += 1;
            }
        }
        tab.rows.push(row);
    }
    let is_art = |j: usize| j >= structural + n_slack;

    // phase 1
    if n_art > 0 {
        let cost: Vec<T> = (0..total).map(|j| if is_art(j) { T::one() } else { T::zero() }).collect();
        let allowed = vec![true; total];
        tab.run(&cost, &allowed)?;
        let scale = rows.iter().map(|r| r.2).fold(T::one(), T::max);
        if tab.objective(&cost) > tol * scale {
            return Ok(LpSolution::without(LpStatus::Infeasible));
        }
        // drive remaining artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < tab.rows.len() {
            if is_art(tab.basis[i]) {
                match (0..total).find(|&j| !is_art(j) && tab.rows[i][j].abs() > tol) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // phase 2
    let mut cost = vec![T::zero(); total];
    let mut constant = T::zero();
    for (j, &cj) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shift { col, lo } => {
                cost[col] += cj;
                constant += cj * lo;
            }
            VarMap::Reflect { col, hi } => {
                cost[col] -= cj;
                constant += cj * hi;
            }
            VarMap::Split { pos, neg } => {
                cost[pos] += cj;
                cost[neg] -= cj;
            }
        }
    }
    let allowed: Vec<bool> = (0..total).map(|j| !is_art(j)).collect();
    if let Step::Unbounded = tab.run(&cost, &allowed)? {
        return Ok(LpSolution::without(LpStatus::Unbounded));
    }

    let mut y = vec![T::zero(); total];
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        y[b] = row[total];
    }
    let x: Vec<T> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lo } => lo + y[col],
            VarMap::Reflect { col, hi } => hi - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective = lp.objective.iter().zip(&x).map(|(&c, &v)| c * v).sum::<T>();
    debug_assert!((objective - (tab.objective(&cost) + constant)).abs() <= T::of(1e-6).max(tol));
    Ok(LpSolution { status: LpStatus::Optimal, objective, x })
}
