//! Public transcript of a protocol run and its binary frame format.
//!
//! Each frame is `[payload bit count: u32 LE][agent: u8][block: u16 LE]`
//! followed by the payload bits packed little-endian. Reconciliation
//! messages carry their block index; final-round messages use
//! [`FINAL_BLOCK`] and hash seeds use [`SEED_BLOCK`] with a 64-bit payload.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::{pack_bits, unpack_bits};

pub const FINAL_BLOCK: u16 = 0xFFFF;
pub const SEED_BLOCK: u16 = 0xFFFE;

/// One public message: agent ids are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub agent: u8,
    pub block: u16,
    pub bits: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashSeed {
    pub agent: u8,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub blocks: Vec<Message>,
    pub final_round: Vec<Message>,
    pub hash_seeds: Vec<HashSeed>,
}

fn push_frame(out: &mut Vec<u8>, agent: u8, block: u16, bits: &[u8]) {
    out.extend_from_slice(&(bits.len() as u32).to_le_bytes());
    out.push(agent);
    out.extend_from_slice(&block.to_le_bytes());
    out.extend_from_slice(&pack_bits(bits.iter().copied()));
}

impl Transcript {
    /// Total number of public bits, seeds excluded.
    pub fn message_bits(&self) -> usize {
        self.blocks.iter().chain(&self.final_round).map(|m| m.bits.len()).sum()
    }

    pub fn to_frames(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for m in self.blocks.iter().chain(&self.final_round) {
            push_frame(&mut out, m.agent, m.block, &m.bits);
        }
        for s in &self.hash_seeds {
            let bits: Vec<u8> = (0..64).map(|i| (s.seed >> i & 1) as u8).collect();
            push_frame(&mut out, s.agent, SEED_BLOCK, &bits);
        }
        out
    }

    pub fn from_frames(mut bytes: &[u8]) -> Result<Self> {
        let mut t = Transcript::default();
        while !bytes.is_empty() {
            if bytes.len() < 7 {
                return Err(Error::Domain("truncated frame header".into()));
            }
            let len = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
            let agent = bytes[4];
            let block = u16::from_le_bytes([bytes[5], bytes[6]]);
            let nbytes = len.div_ceil(8);
            if bytes.len() < 7 + nbytes {
                return Err(Error::Domain(format!("frame of {len} bits is truncated")));
            }
            let bits = unpack_bits(&bytes[7..7 + nbytes], len);
            bytes = &bytes[7 + nbytes..];
            match block {
                SEED_BLOCK => {
                    if len != 64 {
                        return Err(Error::Domain(format!("seed frame has {len} bits")));
                    }
                    let seed = bits.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (b as u64) << i);
                    t.hash_seeds.push(HashSeed { agent, seed });
                }
                FINAL_BLOCK => t.final_round.push(Message { agent, block, bits }),
                _ => t.blocks.push(Message { agent, block, bits }),
            }
        }
        Ok(t)
    }
}
