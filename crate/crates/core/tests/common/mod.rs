//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's entropy code.

#![allow(dead_code)]

use std::collections::HashMap;

/// Joint law of `(X₀, X₁…X_L)` for the binary degraded source, enumerated
/// directly: key is `x0 | x_1 << 1 | … | x_L << L`.
pub fn degraded_joint(q: f64, p: &[f64]) -> Vec<f64> {
    let l = p.len();
    (0..1usize << (l + 1))
        .map(|idx| {
            let x0 = idx & 1;
            let mut pr = if x0 == 1 { q } else { 1.0 - q };
            for (k, &pk) in p.iter().enumerate() {
                let xk = idx >> (k + 1) & 1;
                pr *= if xk == x0 { 1.0 - pk } else { pk };
            }
            pr
        })
        .collect()
}

/// Entropy in bits of the marginal on the index bits selected by `mask`.
pub fn marginal_entropy(joint: &[f64], mask: usize) -> f64 {
    let mut m: HashMap<usize, f64> = HashMap::new();
    for (idx, &pr) in joint.iter().enumerate() {
        *m.entry(idx & mask).or_default() += pr;
    }
    m.values().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

/// `I(A; B | C)` for disjoint bit masks.
pub fn cond_mi(joint: &[f64], a: usize, b: usize, c: usize) -> f64 {
    marginal_entropy(joint, a | c) + marginal_entropy(joint, b | c)
        - marginal_entropy(joint, a | b | c)
        - marginal_entropy(joint, c)
}

/// Mask of agents in coalition bitmask `s` (agent `k` is bit `k − 1`).
pub fn agents_mask(s: u32) -> usize {
    (s as usize) << 1
}

/// `v(S) = I(X_S; X₀ | X_{S^c})` from the raw joint.
pub fn oracle_value(q: f64, p: &[f64], s: u32) -> f64 {
    let l = p.len();
    let joint = degraded_joint(q, p);
    let grand = (1u32 << l) - 1;
    if s == 0 {
        return 0.0;
    }
    cond_mi(&joint, agents_mask(s), 1, agents_mask(grand & !s))
}

/// Shapley value by averaging marginal contributions over all orderings.
pub fn oracle_shapley(l: usize, v: impl Fn(u32) -> f64) -> Vec<f64> {
    let mut perm: Vec<usize> = (0..l).collect();
    let mut phi = vec![0.0; l];
    let mut count = 0usize;
    permute(&mut perm, 0, &mut |order| {
        let mut s = 0u32;
        for &i in order {
            let before = v(s);
            s |= 1 << i;
            phi[i] += v(s) - before;
        }
        count += 1;
    });
    phi.iter().map(|x| x / count as f64).collect()
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}
