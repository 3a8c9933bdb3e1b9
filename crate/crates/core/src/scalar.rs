//! Scalar abstraction shared by the information-theoretic and game-theoretic code.
//!
//! Everything that only needs field arithmetic, comparisons and `log2` is written
//! against [`Scalar`], so the same code runs in `f64` (the default everywhere) or
//! `f32` (cheaper, for LLR-heavy decoding).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// floating point: f32 or f64
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Feasibility / optimality tolerance used by the simplex solver.
    const LP_TOL: Self;
    /// Pivot threshold for Gaussian elimination.
    const PIVOT_TOL: Self;
    /// Default tolerance for game predicates.
    const GAME_TOL: Self;
    /// Rounding slack for probability mass and entropy clamping.
    const SLACK: Self;

    /// Lossy conversion from `f64`. Total for both supported types.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }
}

impl Scalar for f64 {
    const LP_TOL: Self = 1e-9;
    const PIVOT_TOL: Self = 1e-9;
    const GAME_TOL: Self = 1e-9;
    const SLACK: Self = 1e-12;
}

impl Scalar for f32 {
    const LP_TOL: Self = 1e-5;
    const PIVOT_TOL: Self = 1e-5;
    const GAME_TOL: Self = 1e-4;
    const SLACK: Self = 1e-5;
}

/// Binary entropy in bits, with `0·log 0 = 0`.
pub fn binary_entropy<T: Scalar>(p: T) -> T {
    xlog2x(p).neg() - xlog2x(T::one() - p)
}

/// `x·log2(x)`, zero at `x = 0`.
#[inline]
pub fn xlog2x<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.log2()
    }
}
