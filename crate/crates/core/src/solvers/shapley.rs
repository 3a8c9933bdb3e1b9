use crate::coalition::Coalition;
use crate::error::Result;
use crate::game::{Allocation, CoalitionGame};
use crate::scalar::Scalar;
use crate::source::joint::EntropyMemo;
use crate::source::{JointSource, VarSet};

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `|S|!(L−|S|−1)!/L! = 1 / (L·C(L−1, |S|))`, indexed by `|S|`.
fn subset_weights<T: Scalar>(l: usize) -> Vec<T> {
    (0..l).map(|s| T::of(1.0 / (l as f64 * binomial(l - 1, s)))).collect()
}

/// Shapley value via the subset-weighted marginal contributions.
pub fn shapley_permutation<T: Scalar>(game: &CoalitionGame<T>) -> Allocation<T> {
    let l = game.num_agents();
    let w = subset_weights::<T>(l);
    let rates = (1..=l)
        .map(|i| {
            game.grand()
                .without(i)
                .subsets()
                .map(|s| w[s.len()] * (game.value(s.with(i)) - game.value(s)))
                .sum()
        })
        .collect();
    Allocation { rates }
}

/// Shapley value of the source game written with pairwise informations:
/// `R_l = I(X_l; X₀) − (1/L) Σ_{S⊆ℒ∖{l}} C(L−1, |S|)⁻¹ I(X_l; X_S)`.
/// Relies on the degraded structure, which is checked first.
pub fn shapley_closed_form<T: Scalar>(src: &JointSource<T>) -> Result<Allocation<T>> {
    // the same precondition as the value function
    crate::game::value_function(src).map(|_| ())?;
    let l = src.num_agents();
    let w = subset_weights::<T>(l);
    let mut memo = EntropyMemo::new(src);
    let mut rates = Vec::with_capacity(l);
    for i in 1..=l {
        let xi = VarSet::agents(Coalition::singleton(i));
        let mut r = memo.mi(xi, VarSet::X0, VarSet::EMPTY)?;
        for s in src.grand().without(i).subsets() {
            r -= w[s.len()] * memo.mi(xi, VarSet::agents(s), VarSet::EMPTY)?;
        }
        rates.push(r);
    }
    Ok(Allocation { rates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::value_function;
    use crate::source::{build_degraded_source, DegradedSourceSpec};

    #[test]
    fn example_intervals_both_routes() {
        let src = build_degraded_source::<f64>(&DegradedSourceSpec::example()).unwrap();
        let a = shapley_permutation(&value_function(&src).unwrap());
        let b = shapley_closed_form(&src).unwrap();
        let lo = [0.2165, 0.1142, 0.1384];
        for i in 0..3 {
            assert!(a.rates[i] >= lo[i] && a.rates[i] <= lo[i] + 1e-4, "{:?}", a.rates);
        }
        assert!(a.max_abs_diff(&b) < 1e-9);
    }

    #[test]
    fn symmetric_and_single_player() {
        let g = CoalitionGame::<f64>::new(2, vec![0.0, 0.3, 0.3, 1.0]).unwrap();
        assert_eq!(shapley_permutation(&g).rates, vec![0.5, 0.5]);
        let src = build_degraded_source::<f64>(&DegradedSourceSpec::new(0.4, vec![0.2]).unwrap()).unwrap();
        let r = shapley_closed_form(&src).unwrap();
        assert!((r.rates[0] - 0.267659).abs() < 1e-6);
    }

    #[test]
    fn dummy_agent() {
        let spec = DegradedSourceSpec::new(0.4, vec![0.1, 0.5, 0.3]).unwrap();
        let src = build_degraded_source::<f64>(&spec).unwrap();
        let r = shapley_permutation(&value_function(&src).unwrap());
        assert!(r.rates[1].abs() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(0, 0), 1.0);
        let w = subset_weights::<f64>(3);
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-15 && (w[1] - 1.0 / 6.0).abs() < 1e-15);
    }
}
