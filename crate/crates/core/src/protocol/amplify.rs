//! Privacy amplification with public Toeplitz seeds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::BitBlock;

use super::hash::sample_hash;
use super::transcript::{HashSeed, Transcript};

/// Agent keys `K_l` and the base station's reconstructions `K̂_l`, one bit per
/// byte, in agent order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyMaterial {
    pub agents: Vec<usize>,
    pub keys: Vec<Vec<u8>>,
    pub reconstructed: Vec<Vec<u8>>,
}

impl KeyMaterial {
    /// Agents whose reconstruction differs from their key.
    pub fn mismatches(&self) -> Vec<usize> {
        self.agents
            .iter()
            .zip(self.keys.iter().zip(&self.reconstructed))
            .filter(|(_, (k, kh))| k != kh)
            .map(|(&a, _)| a)
            .collect()
    }
}

/// `K_l = F_l(X_l)` and `K̂_l = F_l(X̂_l)` with `F_l` the Toeplitz hash drawn
/// from `seeds[k]`. The seeds are appended to the transcript.
pub fn privacy_amplify(
    agents: &[usize],
    xs: &[BitBlock],
    estimates: &[BitBlock],
    lengths: &[usize],
    seeds: &[u64],
    transcript: &mut Transcript,
) -> Result<KeyMaterial> {
    let k = agents.len();
    if xs.len() != k || estimates.len() != k || lengths.len() != k || seeds.len() != k {
        return Err(Error::Domain("per-agent inputs have different lengths".into()));
    }
    let mut keys = Vec::with_capacity(k);
    let mut reconstructed = Vec::with_capacity(k);
    for i in 0..k {
        let h = sample_hash(seeds[i], xs[i].len(), lengths[i])?;
        keys.push(h.apply_words(xs[i].words()));
        reconstructed.push(h.apply_words(estimates[i].words()));
        transcript.hash_seeds.push(HashSeed { agent: agents[i] as u8, seed: seeds[i] });
    }
    Ok(KeyMaterial { agents: agents.to_vec(), keys, reconstructed })
}
