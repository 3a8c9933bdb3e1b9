//! Coalitional analysis of many-to-one secret-key generation.
//!
//! Agents observe noisy versions `X_l` of a base-station sequence `X₀` and
//! each wants a key shared with the base station that stays hidden from the
//! other agents. The crate computes the induced coalitional game (value
//! function, core, Shapley value, nucleolus) and simulates a polar-code
//! reconciliation plus universal-hashing protocol that reaches a chosen
//! allocation.

pub mod coalition;
pub mod error;
pub mod game;
pub mod polar;
pub mod protocol;
pub mod scalar;
pub mod solvers;
pub mod source;

pub use coalition::{Coalition, MAX_AGENTS};
pub use error::{Error, Result};
pub use game::{Allocation, CoalitionGame, CoreBounds};
pub use scalar::{binary_entropy, Scalar};
pub use solvers::{
    brute_force_nucleolus, lexicographic_less, lp_solve, nucleolus, shapley_closed_form,
    shapley_permutation, AllocationReport, Method, NucleolusTrace,
};
pub use source::{
    build_degraded_source, closed_form_coalition_value, f_value, DegradedSourceSpec, EntropyQuery,
    JointSource, VarSet,
};

pub type Source = JointSource<f64>;
pub type Source32 = JointSource<f32>;
pub type Game = CoalitionGame<f64>;
pub type Game32 = CoalitionGame<f32>;
pub type Rates = Allocation<f64>;
