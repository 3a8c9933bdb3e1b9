//! Exact secrecy check on instances small enough to enumerate.
//!
//! Single block, `L ≤ 2` agents on a binary degraded source, public messages
//! `A = (U_l[H_l])_l` and independent Toeplitz seeds `F_l`. The distance
//! `V(p_{K,F,A}, p_U·p_F·p_A)` is computed by summing over every source
//! realization and every seed, and compared to the leftover-hash bound
//! evaluated with the exact average conditional min-entropies
//! `H∞(X_S | A) = −log₂ Σ_a max_{x_S} p(x_S, a)`.

use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::polar::{build_index_sets, entropy_profile_exact, polar_transform, BitBlock};

use super::hash::ToeplitzHash;
use super::keylen::leakage_bound;

pub const TINY_MAX_N: usize = 8;
pub const TINY_MAX_AGENTS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TinyInstance {
    pub n: usize,
    pub q: f64,
    pub p: Vec<f64>,
    pub r: Vec<usize>,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecrecyCheck {
    pub distance: f64,
    pub bound: f64,
    /// `H∞(X_S | A)` indexed by coalition bitmask; entry 0 unused.
    pub min_entropy: Vec<f64>,
}

impl SecrecyCheck {
    pub fn holds(&self) -> bool {
        self.distance <= self.bound + 1e-12
    }
}

pub fn empirical_secrecy_check(inst: &TinyInstance) -> Result<SecrecyCheck> {
    let (n, l) = (inst.n, inst.p.len());
    if n > TINY_MAX_N || l > TINY_MAX_AGENTS {
        return Err(Error::Capacity(format!(
            "exact secrecy check needs N ≤ {TINY_MAX_N} and L ≤ {TINY_MAX_AGENTS}, got N = {n}, L = {l}"
        )));
    }
    if l == 0 || inst.r.len() != l {
        return Err(Error::validation("r", "one key length per agent is required"));
    }
    if !(0.0..=1.0).contains(&inst.q) {
        return Err(Error::validation("q", format!("{} is not a probability", inst.q)));
    }
    if let Some(&r) = inst.r.iter().find(|&&r| r > n) {
        return Err(Error::Domain(format!("key length {r} exceeds N = {n}")));
    }
    let sets: Vec<Vec<usize>> = inst
        .p
        .iter()
        .map(|&p| Ok(build_index_sets(&entropy_profile_exact(p, n)?, inst.beta)?.h_set))
        .collect::<Result<_>>()?;

    // p(x_1, …, x_L) with x packed as x_1 | x_2 << N
    let nx = 1usize << (n * l);
    let mut px = vec![0.0f64; nx];
    for (x, slot) in px.iter_mut().enumerate() {
        let mut prob = 1.0;
        for j in 0..n {
            let mut s = 0.0;
            for x0 in 0..2 {
                let mut t = if x0 == 1 { inst.q } else { 1.0 - inst.q };
                for (a, &p) in inst.p.iter().enumerate() {
                    let xb = x >> (a * n + j) & 1;
                    t *= if xb == x0 { 1.0 - p } else { p };
                }
                s += t;
            }
            prob *= s;
        }
        *slot = prob;
    }

    let agent_bits = |x: usize, a: usize| -> Vec<u8> { (0..n).map(|j| (x >> (a * n + j) & 1) as u8).collect() };
    // public message index of each realization
    let a_width: usize = sets.iter().map(|s| s.len()).sum();
    let msg: Vec<usize> = (0..nx)
        .map(|x| {
            let mut idx = 0usize;
            let mut pos = 0;
            for (a, set) in sets.iter().enumerate() {
                let u = polar_transform(&BitBlock::from_bits(&agent_bits(x, a)).expect("power of two"));
                for &i in set {
                    idx |= (u.get(i) as usize) << pos;
                    pos += 1;
                }
            }
            idx
        })
        .collect();
    let na = 1usize << a_width;
    let mut pa = vec![0.0f64; na];
    for x in 0..nx {
        pa[msg[x]] += px[x];
    }

    // min-entropies per coalition
    let mut min_entropy = vec![0.0f64; 1 << l];
    for s in Coalition::grand(l).subsets().filter(|s| !s.is_empty()) {
        let mask: usize = s.members().map(|a| ((1usize << n) - 1) << ((a - 1) * n)).fold(0, |m, b| m | b);
        let mut joint = std::collections::HashMap::<(usize, usize), f64>::new();
        for x in 0..nx {
            *joint.entry((x & mask, msg[x])).or_default() += px[x];
        }
        let mut best = vec![0.0f64; na];
        for (&(_, a), &p) in &joint {
            best[a] = best[a].max(p);
        }
        min_entropy[s.index()] = -best.iter().sum::<f64>().log2();
    }

    // every seed combination, then the exact distance
    let seed_lens: Vec<usize> = inst.r.iter().map(|&r| if r == 0 { 0 } else { n + r - 1 }).collect();
    let total_seed_bits: usize = seed_lens.iter().sum();
    let r_total: usize = inst.r.iter().sum();
    let nk = 1usize << r_total;
    let uniform = 1.0 / nk as f64;
    let pf = 1.0 / (1u64 << total_seed_bits) as f64;
    let mut distance = 0.0;
    let mut pka = vec![0.0f64; nk * na];
    for f in 0usize..1 << total_seed_bits {
        let mut hashes = Vec::with_capacity(l);
        let mut off = 0;
        for (a, &m) in seed_lens.iter().enumerate() {
            let t: Vec<u8> = (0..m).map(|i| (f >> (off + i) & 1) as u8).collect();
            hashes.push(ToeplitzHash::from_bits(n, inst.r[a], &t)?);
            off += m;
        }
        pka.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..nx {
            let mut k = 0usize;
            let mut pos = 0;
            for (a, h) in hashes.iter().enumerate() {
                for bit in h.apply(&agent_bits(x, a))? {
                    k |= (bit as usize) << pos;
                    pos += 1;
                }
            }
            pka[k * na + msg[x]] += px[x];
        }
        let mut d = 0.0;
        for k in 0..nk {
            for a in 0..na {
                d += (pka[k * na + a] - uniform * pa[a]).abs();
            }
        }
        distance += pf * 0.5 * d;
    }

    let bound = leakage_bound(&inst.r, |s| min_entropy[s.index()]);
    Ok(SecrecyCheck { distance, bound, min_entropy })
}
