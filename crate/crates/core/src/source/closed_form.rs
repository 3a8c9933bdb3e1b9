//! Closed-form coalition values for the binary degraded family.

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::scalar::{binary_entropy, xlog2x, Scalar};

use super::DegradedSourceSpec;

/// `f_S(T) = q ∏_{T} p ∏_{S∖T} p̄ + q̄ ∏_{T} p̄ ∏_{S∖T} p`.
///
/// With `q = P(X₀ = 1)` this is `P(X_T = 0, X_{S∖T} = 1)`, so it sums to one
/// over `T ⊆ S`.
pub fn f_value<T: Scalar>(spec: &DegradedSourceSpec, s: Coalition, t: Coalition) -> Result<T> {
    if !t.is_subset_of(s) {
        return Err(Error::Domain(format!("{t} is not a subset of {s}")));
    }
    if !s.is_subset_of(Coalition::grand(spec.num_agents())) {
        return Err(Error::Domain(format!("{s} refers to agents beyond {}", spec.num_agents())));
    }
    Ok(f_unchecked(spec, s, t))
}

fn f_unchecked<T: Scalar>(spec: &DegradedSourceSpec, s: Coalition, t: Coalition) -> T {
    let q = T::of(spec.q);
    let (mut a, mut b) = (q, T::one() - q);
    for i in s.members() {
        let p = T::of(spec.p[i - 1]);
        if t.contains(i) {
            a *= p;
            b *= T::one() - p;
        } else {
            a *= T::one() - p;
            b *= p;
        }
    }
    a + b
}

/// `v(S) = H(X_ℒ) − H(X_{S^c}) − Σ_{i∈S} H_b(p_i)`, written with `f`.
pub fn closed_form_coalition_value<T: Scalar>(spec: &DegradedSourceSpec, s: Coalition) -> Result<T> {
    spec.validate()?;
    let grand = Coalition::grand(spec.num_agents());
    if !s.is_subset_of(grand) {
        return Err(Error::Domain(format!("{s} refers to agents beyond {}", spec.num_agents())));
    }
    if s.is_empty() {
        return Ok(T::zero());
    }
    let sc = s.complement(spec.num_agents());
    let h_all: T = grand.subsets().map(|t| -xlog2x(f_unchecked::<T>(spec, grand, t))).sum();
    let h_rest: T = sc.subsets().map(|t| -xlog2x(f_unchecked::<T>(spec, sc, t))).sum();
    let h_noise: T = s.members().map(|i| binary_entropy(T::of(spec.p[i - 1]))).sum();
    Ok((h_all - h_rest - h_noise).max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec1() -> DegradedSourceSpec {
        DegradedSourceSpec::new(0.4, vec![0.2]).unwrap()
    }

    #[test]
    fn f_examples() {
        let s = Coalition::singleton(1);
        let f: f64 = f_value(&spec1(), s, s).unwrap();
        assert!((f - 0.56).abs() < 1e-15);
        let f: f64 = f_value(&spec1(), s, Coalition::EMPTY).unwrap();
        assert!((f - 0.44).abs() < 1e-15);
        let f: f64 = f_value(&spec1(), Coalition::EMPTY, Coalition::EMPTY).unwrap();
        assert_eq!(f, 1.0);
        assert!(f_value::<f64>(&spec1(), Coalition::EMPTY, s).is_err());
    }

    #[test]
    fn example_values() {
        let spec = DegradedSourceSpec::example();
        let v: f64 = closed_form_coalition_value(&spec, Coalition::from_agents([1, 2])).unwrap();
        assert!((v - 0.28771).abs() < 1e-5);
        let v: f64 = closed_form_coalition_value(&spec, Coalition::grand(3)).unwrap();
        assert!((v - 0.46921).abs() < 1e-5);
        let v: f64 = closed_form_coalition_value(&spec, Coalition::EMPTY).unwrap();
        assert_eq!(v, 0.0);
    }
}
