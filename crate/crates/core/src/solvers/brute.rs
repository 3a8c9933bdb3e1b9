//! Grid-search nucleolus, used to check the LP route on small games.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::game::{Allocation, CoalitionGame};
use crate::scalar::Scalar;

/// Exact lexicographic comparison of two excess vectors.
pub fn lexicographic_less<T: Scalar>(a: &[T], b: &[T]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::Domain(format!("lengths {} and {} differ", a.len(), b.len())));
    }
    Ok(lexicographic_cmp(a, b, T::zero()) == Ordering::Less)
}

/// Lexicographic comparison treating entries within `tol` as equal.
pub fn lexicographic_cmp<T: Scalar>(a: &[T], b: &[T], tol: T) -> Ordering {
    for (&x, &y) in a.iter().zip(b) {
        if x < y - tol {
            return Ordering::Less;
        }
        if x > y + tol {
            return Ordering::Greater;
        }
    }
    a.len().cmp(&b.len())
}

/// Equality tolerance of the oracle's comparison. Excesses of `∅` and `ℒ`
/// are zero up to rounding, and exact comparison would let that rounding
/// pick the winner.
const ORACLE_TIE: f64 = 1e-12;

/// Minimises the sorted excess vector over efficient allocations on a grid
/// of spacing `step` (last coordinate takes the remainder). First minimiser
/// in grid order wins ties.
pub fn brute_force_nucleolus<T: Scalar>(game: &CoalitionGame<T>, step: T) -> Result<Allocation<T>> {
    let l = game.num_agents();
    if l > 3 {
        return Err(Error::Capacity(format!("grid oracle supports at most 3 agents, got {l}")));
    }
    if !(step > T::zero()) {
        return Err(Error::validation("grid_step", "must be positive"));
    }
    let total = game.grand_value();
    let k_max = (total / step).floor().to_usize().unwrap_or(0);
    let tie = T::of(ORACLE_TIE);
    let mut best: Option<(Vec<T>, Allocation<T>)> = None;
    let mut consider = |rates: Vec<T>| {
        let a = Allocation { rates };
        let theta = game.excess_vector_sorted(&a).expect("matching length");
        let better = match &best {
            None => true,
            Some((b, _)) => lexicographic_cmp(&theta, b, tie) == Ordering::Less,
        };
        if better {
            best = Some((theta, a));
        }
    };
    match l {
        1 => consider(vec![total]),
        2 => {
            for i in 0..=k_max {
                let x1 = step * T::of(i as f64);
                consider(vec![x1, (total - x1).max(T::zero())]);
            }
        }
        _ => {
            for i in 0..=k_max {
                let x1 = step * T::of(i as f64);
                for j in 0..=k_max - i {
                    let x2 = step * T::of(j as f64);
                    let x3 = total - x1 - x2;
                    if x3 < -T::SLACK {
                        break;
                    }
                    consider(vec![x1, x2, x3.max(T::zero())]);
                }
            }
        }
    }
    Ok(best.expect("grid is nonempty").1)
}
