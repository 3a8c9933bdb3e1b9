//! Per-index conditional entropies `h_i = H(U_i | U^{i−1}, Y)` for
//! `U = X·G`, where `Y` is a BSC(p) observation of `X`.
//!
//! Given `Y`, `U = Y·G ⊕ B·G` with `B` the i.i.d. `Bern(p)` noise, so the
//! profile is that of `V = B·G` and does not depend on the law of `X`. The
//! same holds with no side information and `X ~ Bern(p)` i.i.d., which is
//! the `Y ≡ 0` case.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{xlog2x, Scalar};

use super::bits::BitBlock;
use super::decoder::{bsc_llr, llr_entropy, ScDecoder};
use super::transform::polar_transform_reference;

/// Largest block the exhaustive route enumerates.
pub const EXACT_MAX_N: usize = 16;

/// Samples per parallel work unit; each unit owns one RNG stream.
pub const MC_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ProfileMethod {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub n: usize,
    pub p: f64,
    #[serde(flatten)]
    pub method: ProfileMethod,
    pub h: Vec<f64>,
}

impl EntropyProfile {
    pub fn sum(&self) -> f64 {
        self.h.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.n as f64
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::validation("p", format!("{p} is not a probability")));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Domain(format!("block length {n} is not a power of two")));
    }
    Ok(())
}

/// Exact profile by enumerating all `2^N` noise patterns. Side information
/// does not change the result (see the module notes), so it is not a
/// parameter.
pub fn entropy_profile_exact(p: f64, n: usize) -> Result<EntropyProfile> {
    check_p(p)?;
    check_n(n)?;
    if n > EXACT_MAX_N {
        return Err(Error::Capacity(format!("exact profile needs N ≤ {EXACT_MAX_N}, got {n}")));
    }
    // dist[v] with v₁ as the most significant bit, so prefixes are index >> k
    let mut dist = vec![0.0f64; 1 << n];
    let mut bits = vec![0u8; n];
    for b in 0usize..1 << n {
        let mut ones = 0;
        for (i, bit) in bits.iter_mut().enumerate() {
            *bit = (b >> i & 1) as u8;
            ones += *bit as i32;
        }
        let prob = p.powi(ones) * (1.0 - p).powi(n as i32 - ones);
        let v = polar_transform_reference(&bits);
        let idx = v.iter().fold(0usize, |acc, &x| acc << 1 | x as usize);
        dist[idx] += prob;
    }
    // joint entropies of prefixes, longest first
    let mut prefix_h = vec![0.0; n + 1];
    for k in (1..=n).rev() {
        prefix_h[k] = dist.iter().map(|&q| -xlog2x(q)).sum();
        dist = dist.chunks(2).map(|c| c[0] + c[1]).collect();
    }
    let h = (1..=n).map(|i| (prefix_h[i] - prefix_h[i - 1]).clamp(0.0, 1.0)).collect();
    Ok(EntropyProfile { n, p, method: ProfileMethod::Exact, h })
}

/// Monte Carlo profile: the genie-aided SC recursion gives the exact
/// posterior of `U_i` given the true prefix and `Y`, and `h_i` is the sample
/// mean of its entropy.
///
/// Samples are processed in chunks of [`MC_CHUNK`], chunk `c` drawing from
/// ChaCha8 stream `c` of `seed`, and chunk sums are added in chunk order, so
/// the result does not depend on the thread count.
pub fn entropy_profile_mc(p: f64, n: usize, samples: usize, seed: u64) -> Result<EntropyProfile> {
    entropy_profile_mc_with::<f64>(p, n, samples, seed)
}

pub fn entropy_profile_mc_with<T: Scalar>(
    p: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<EntropyProfile> {
    check_p(p)?;
    check_n(n)?;
    if samples == 0 {
        return Err(Error::validation("samples", "at least one sample is required"));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let llr0 = bsc_llr::<T>(p);
    let partial: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut dec = ScDecoder::<T>::new(n).expect("checked length");
            let mut acc = vec![0.0f64; n];
            // Y = 0, so X = B and every channel LLR is λ₀
            let channel = vec![llr0; n];
            for _ in 0..count {
                let b = BitBlock::random(n, p, &mut rng).expect("checked length");
                let u = super::transform::polar_transform(&b);
                dec.run(&channel, |i, llr| {
                    let ui = u.get(i);
                    acc[i] += llr_entropy(llr);
                    ui
                });
            }
            acc
        })
        .collect();
    let mut h = vec![0.0f64; n];
    for acc in &partial {
        for (hi, a) in h.iter_mut().zip(acc) {
            *hi += a;
        }
    }
    h.iter_mut().for_each(|x| *x = (*x / samples as f64).clamp(0.0, 1.0));
    Ok(EntropyProfile { n, p, method: ProfileMethod::MonteCarlo { samples, seed }, h })
}
