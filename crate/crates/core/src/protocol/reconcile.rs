//! Multi-block reconciliation to the base station.
//!
//! For each block the agents, in ascending order, publish the bits of
//! `U_l = X_l·G` on their high-entropy set, and the base station decodes
//! `X̆_l` from them and its own `X₀`. Under degradedness `X_l − X₀ − X_{1:l−1}`,
//! so the estimates of earlier agents carry no extra information about
//! `X_l` once `X₀` is known and the decoder uses `X₀` alone.
//!
//! A final round then publishes, per agent, the bits of `X_l^{NB}·G_{NB}` on a
//! residual set of the form `{j·N + i : i ∈ F_l, 0 ≤ j < B}`. Since
//! `G_{NB} = G_B ⊗ G_N` with the block index in the high bits, these bits
//! determine `U_{l,b}[F_l]` for every block, and the base station re-decodes
//! each block with `H ∪ F_l` known.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::transform::polar_transform_reference;
use crate::polar::{channel_llrs, polar_transform, BitBlock, KnownBits, PolarIndexSets, ScDecoder};

use super::transcript::{Message, Transcript, FINAL_BLOCK};

/// Agent `agent` (1-based) observes `X₀` through a BSC(`p`).
#[derive(Debug, Clone, PartialEq)]
pub struct AgentLink {
    pub agent: usize,
    pub p: f64,
    pub sets: PolarIndexSets,
}

/// Residual set for the final round of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalRoundPlan {
    /// Per-block positions `F_l`, outside the high-entropy set.
    pub residual: Vec<usize>,
    /// First-pass bit error rate seen during calibration.
    pub p_hat: f64,
}

impl FinalRoundPlan {
    pub fn empty() -> Self {
        FinalRoundPlan { residual: Vec::new(), p_hat: 0.0 }
    }

    /// Positions of `X^{NB}·G_{NB}` published in the final round, ascending.
    pub fn published_indices(&self, n: usize, b: usize) -> Vec<usize> {
        let mut f = self.residual.clone();
        f.sort_unstable();
        (0..b).flat_map(|j| f.iter().map(move |&i| j * n + i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconciliation {
    pub transcript: Transcript,
    /// Per-block estimates `X̆_l`, concatenated.
    pub first_pass: Vec<BitBlock>,
    /// Final-round estimates `X̂_l`.
    pub estimates: Vec<BitBlock>,
}

/// Runs the reconciliation. `xs[k]` is the sequence of `links[k].agent`;
/// all sequences have length `N·B` with `N` the length implied by the
/// index sets. With `final_round = None` the second layer equals the first.
pub fn reconcile(
    x0: &BitBlock,
    xs: &[BitBlock],
    links: &[AgentLink],
    final_round: Option<&[FinalRoundPlan]>,
    n: usize,
    b: usize,
) -> Result<Reconciliation> {
    if xs.len() != links.len() {
        return Err(Error::Domain(format!("{} sequences for {} agents", xs.len(), links.len())));
    }
    if let Some(plans) = final_round {
        if plans.len() != links.len() {
            return Err(Error::Domain(format!("{} final-round plans for {} agents", plans.len(), links.len())));
        }
    }
    if x0.len() != n * b || xs.iter().any(|x| x.len() != n * b) {
        return Err(Error::Domain(format!("sequences must have N·B = {} bits", n * b)));
    }
    let mut transcript = Transcript::default();
    let x0_blocks = x0.split(b)?;
    let x_blocks: Vec<Vec<BitBlock>> = xs.iter().map(|x| x.split(b)).collect::<Result<_>>()?;
    let mut dec = ScDecoder::<f64>::new(n)?;
    let mut first: Vec<Vec<BitBlock>> = vec![Vec::with_capacity(b); links.len()];
    for (j, y) in x0_blocks.iter().enumerate() {
        for (k, link) in links.iter().enumerate() {
            let u = polar_transform(&x_blocks[k][j]);
            let bits = u.select(&link.sets.h_set);
            let known = KnownBits::new(n, &link.sets.h_set, &bits)?;
            first[k].push(dec.decode(&channel_llrs(y, link.p), &known));
            transcript.blocks.push(Message { agent: link.agent as u8, block: j as u16, bits });
        }
    }
    let first_pass: Vec<BitBlock> = first.iter().map(|v| BitBlock::concat(v)).collect::<Result<_>>()?;
    let estimates = match final_round {
        None => first_pass.clone(),
        Some(plans) => {
            let mut out = Vec::with_capacity(links.len());
            for (k, plan) in plans.iter().enumerate() {
                let published = plan.published_indices(n, b);
                let bits = polar_transform(&xs[k]).select(&published);
                transcript.final_round.push(Message { agent: links[k].agent as u8, block: FINAL_BLOCK, bits: bits.clone() });
                if plan.residual.is_empty() {
                    out.push(first_pass[k].clone());
                    continue;
                }
                let extra = split_residual(&plan.residual, &bits, b);
                let blocks = x0_blocks
                    .iter()
                    .enumerate()
                    .map(|(j, y)| redecode(&mut dec, y, &links[k], &x_blocks[k][j], &plan.residual, &extra[j]))
                    .collect::<Result<Vec<_>>>()?;
                out.push(BitBlock::concat(&blocks)?);
            }
            out
        }
    };
    Ok(Reconciliation { transcript, first_pass, estimates })
}

/// Undoes the across-block transform: from the published bits (ordered by
/// block-level index `j`, then by sorted residual position) recovers
/// `U_b[F]` for every block `b`, in the order of the sorted residual set.
fn split_residual(residual: &[usize], published: &[u8], b: usize) -> Vec<Vec<u8>> {
    let f = residual.len();
    let mut per_block = vec![vec![0u8; f]; b];
    for i in 0..f {
        let column: Vec<u8> = (0..b).map(|j| published[j * f + i]).collect();
        for (blk, &v) in polar_transform_reference(&column).iter().enumerate() {
            per_block[blk][i] = v;
        }
    }
    per_block
}

/// SC decoding of one block with the high-entropy bits and the residual
/// bits known. The agent's own block supplies the `H` bits, which the base
/// station already holds from the per-block messages.
fn redecode(
    dec: &mut ScDecoder<f64>,
    y: &BitBlock,
    link: &AgentLink,
    x_block: &BitBlock,
    residual: &[usize],
    residual_bits: &[u8],
) -> Result<BitBlock> {
    let n = y.len();
    let mut sorted = residual.to_vec();
    sorted.sort_unstable();
    let u = polar_transform(x_block);
    let mut idx = link.sets.h_set.clone();
    let mut vals = u.select(&link.sets.h_set);
    idx.extend_from_slice(&sorted);
    vals.extend_from_slice(residual_bits);
    let known = KnownBits::new(n, &idx, &vals)?;
    Ok(dec.decode(&channel_llrs(y, link.p), &known))
}

/// Re-decodes one block with `H ∪ residual` known, the values taken from
/// the true block. Used to size residual sets during calibration.
pub fn redecode_with_residual(
    dec: &mut ScDecoder<f64>,
    y: &BitBlock,
    link: &AgentLink,
    x_block: &BitBlock,
    residual: &[usize],
) -> Result<BitBlock> {
    let mut sorted = residual.to_vec();
    sorted.sort_unstable();
    let bits = polar_transform(x_block).select(&sorted);
    redecode(dec, y, link, x_block, &sorted, &bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::{build_index_sets, entropy_profile_exact};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn link(agent: usize, p: f64, n: usize) -> AgentLink {
        let prof = entropy_profile_exact(p, n).unwrap();
        AgentLink { agent, p, sets: build_index_sets(&prof, 0.3).unwrap() }
    }

    #[test]
    fn perfect_links_send_nothing_and_never_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x0 = BitBlock::random(64, 0.4, &mut rng).unwrap();
        let links = vec![link(1, 0.0, 16), link(2, 0.0, 16)];
        let plans = vec![FinalRoundPlan::empty(); 2];
        let rec = reconcile(&x0, &[x0.clone(), x0.clone()], &links, Some(&plans), 16, 4).unwrap();
        assert!(rec.transcript.blocks.iter().all(|m| m.bits.is_empty()));
        assert_eq!(rec.transcript.blocks.len(), 8);
        assert!(rec.estimates.iter().all(|e| *e == x0));
    }

    #[test]
    fn message_lengths_follow_the_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x0 = BitBlock::random(32, 0.4, &mut rng).unwrap();
        let x1 = x0.xor(&BitBlock::random(32, 0.2, &mut rng).unwrap()).unwrap();
        let links = vec![link(1, 0.2, 16)];
        let rec = reconcile(&x0, &[x1], &links, None, 16, 2).unwrap();
        for m in &rec.transcript.blocks {
            assert_eq!(m.bits.len(), links[0].sets.h_set.len());
        }
        assert!(rec.transcript.final_round.is_empty());
        assert_eq!(rec.first_pass, rec.estimates);
    }

    #[test]
    fn final_round_with_full_set_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x0 = BitBlock::random(32, 0.4, &mut rng).unwrap();
        let x1 = x0.xor(&BitBlock::random(32, 0.45, &mut rng).unwrap()).unwrap();
        // an empty per-block set forces errors in the first pass
        let links = vec![AgentLink {
            agent: 1,
            p: 0.45,
            sets: PolarIndexSets { h_set: vec![], v_set: vec![], delta: 0.1, beta: 0.3 },
        }];
        let plans = vec![FinalRoundPlan { residual: (0..16).collect(), p_hat: 0.3 }];
        let rec = reconcile(&x0, &[x1.clone()], &links, Some(&plans), 16, 2).unwrap();
        assert_ne!(rec.first_pass[0], x1);
        assert_eq!(rec.estimates[0], x1);
        assert_eq!(rec.transcript.final_round[0].bits.len(), 32);
    }

    #[test]
    fn residual_bits_are_the_long_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = BitBlock::random(64, 0.5, &mut rng).unwrap();
        let plan = FinalRoundPlan { residual: vec![9, 2], p_hat: 0.0 };
        let idx = plan.published_indices(16, 4);
        assert_eq!(idx, vec![2, 9, 18, 25, 34, 41, 50, 57]);
        let per_block = split_residual(&plan.residual, &polar_transform(&x).select(&idx), 4);
        for (j, blk) in x.split(4).unwrap().iter().enumerate() {
            assert_eq!(per_block[j], polar_transform(blk).select(&[2, 9]));
        }
    }
}
