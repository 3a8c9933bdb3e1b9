//! Packed bit vectors. Bit `i` (0-based) lives in word `i / 64` at position
//! `i % 64`; byte serialisation is little-endian, so index 1 of the block is
//! bit 0 of byte 0.

use rand::Rng;

use crate::error::{Error, Result};

/// A block of `N = 2^n` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitBlock {
    len: usize,
    words: Vec<u64>,
}

impl BitBlock {
    pub fn zeros(len: usize) -> Result<Self> {
        check_len(len)?;
        Ok(BitBlock { len, words: vec![0; len.div_ceil(64)] })
    }

    /// Builds a block from one `0`/`1` byte per bit.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut b = Self::zeros(bits.len())?;
        for (i, &v) in bits.iter().enumerate() {
            if v > 1 {
                return Err(Error::Domain(format!("bit {i} has value {v}")));
            }
            b.words[i / 64] |= (v as u64) << (i % 64);
        }
        Ok(b)
    }

    /// Builds a block from packed bytes, little-endian within each byte.
    pub fn from_packed(len: usize, bytes: &[u8]) -> Result<Self> {
        let mut b = Self::zeros(len)?;
        if bytes.len() < len.div_ceil(8) {
            return Err(Error::Domain(format!("{} bytes cannot hold {len} bits", bytes.len())));
        }
        for (k, &byte) in bytes.iter().take(len.div_ceil(8)).enumerate() {
            b.words[k / 8] |= (byte as u64) << (8 * (k % 8));
        }
        b.mask_tail();
        Ok(b)
    }

    /// Independent `Bern(p)` bits.
    pub fn random<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Result<Self> {
        let mut b = Self::zeros(len)?;
        for i in 0..len {
            if rng.random::<f64>() < p {
                b.words[i / 64] |= 1 << (i % 64);
            }
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn log2_len(&self) -> u32 {
        self.len.trailing_zeros()
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        (self.words[i / 64] >> (i % 64) & 1) as u8
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: u8) {
        let m = 1u64 << (i % 64);
        if v & 1 == 1 {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn to_packed(&self) -> Vec<u8> {
        pack_bits(self.iter())
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &BitBlock) -> Result<BitBlock> {
        if self.len != other.len {
            return Err(Error::Domain(format!("lengths {} and {} differ", self.len, other.len)));
        }
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        Ok(BitBlock { len: self.len, words })
    }

    /// Bits at the given positions, in order.
    pub fn select(&self, indices: &[usize]) -> Vec<u8> {
        indices.iter().map(|&i| self.get(i)).collect()
    }

    /// Concatenation of equal-length blocks.
    pub fn concat(blocks: &[BitBlock]) -> Result<BitBlock> {
        let total: usize = blocks.iter().map(|b| b.len).sum();
        let mut out = Self::zeros(total)?;
        let mut pos = 0;
        for b in blocks {
            for i in 0..b.len {
                out.set(pos + i, b.get(i));
            }
            pos += b.len;
        }
        Ok(out)
    }

    /// Splits into `parts` blocks of equal power-of-two length.
    pub fn split(&self, parts: usize) -> Result<Vec<BitBlock>> {
        if parts == 0 || self.len % parts != 0 {
            return Err(Error::Domain(format!("cannot split {} bits into {parts} blocks", self.len)));
        }
        let n = self.len / parts;
        (0..parts)
            .map(|k| {
                let mut b = Self::zeros(n)?;
                for i in 0..n {
                    b.set(i, self.get(k * n + i));
                }
                Ok(b)
            })
            .collect()
    }

    fn mask_tail(&mut self) {
        if self.len % 64 != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (self.len % 64)) - 1;
            }
        }
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Domain(format!("block length {len} is not a power of two")));
    }
    Ok(())
}

/// Packs bits (one per item) into bytes, little-endian within each byte.
pub fn pack_bits(bits: impl IntoIterator<Item = u8>) -> Vec<u8> {
    let mut out = Vec::new();
    for (i, b) in bits.into_iter().enumerate() {
        if i % 8 == 0 {
            out.push(0);
        }
        *out.last_mut().expect("pushed above") |= (b & 1) << (i % 8);
    }
    out
}

/// Inverse of [`pack_bits`].
pub fn unpack_bits(bytes: &[u8], len: usize) -> Vec<u8> {
    (0..len).map(|i| bytes[i / 8] >> (i % 8) & 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn little_endian_packing() {
        let b = BitBlock::from_bits(&[1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(b.to_packed(), vec![0x01, 0x02]);
        assert_eq!(BitBlock::from_packed(16, &[0x01, 0x02]).unwrap(), b);
        assert_eq!(unpack_bits(&pack_bits([1, 1, 0, 1, 0]), 5), vec![1, 1, 0, 1, 0]);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(BitBlock::zeros(6).is_err());
        assert!(BitBlock::zeros(0).is_err());
        assert!(BitBlock::from_bits(&[0, 2]).is_err());
    }

    #[test]
    fn split_and_concat() {
        let bits: Vec<u8> = (0..256).map(|i| ((i * 7) % 3 == 0) as u8).collect();
        let b = BitBlock::from_bits(&bits).unwrap();
        let parts = b.split(4).unwrap();
        assert_eq!(parts.len(), 4);
        assert_eq!(BitBlock::concat(&parts).unwrap(), b);
    }
}
