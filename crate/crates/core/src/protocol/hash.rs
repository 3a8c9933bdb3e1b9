//! Binary Toeplitz hashing, a two-universal family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// `r × n` Toeplitz matrix `T[i][j] = t[i − j + n − 1]` over GF(2), stored as
/// the reversed diagonal sequence so that row `i` is the window
/// `s[r−1−i .. r−1−i+n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzHash {
    n: usize,
    r: usize,
    s: Vec<u64>,
}

fn words_of(bits: impl IntoIterator<Item = u8>, len: usize) -> Vec<u64> {
    let mut w = vec![0u64; len.div_ceil(64) + 1];
    for (i, b) in bits.into_iter().enumerate() {
        w[i / 64] |= ((b & 1) as u64) << (i % 64);
    }
    w
}

impl ToeplitzHash {
    /// Builds the matrix from its `n + r − 1` diagonal bits `t`.
    pub fn from_bits(n: usize, r: usize, t: &[u8]) -> Result<Self> {
        if r > n {
            return Err(Error::Domain(format!("output length {r} exceeds input length {n}")));
        }
        let m = if r == 0 { 0 } else { n + r - 1 };
        if t.len() != m {
            return Err(Error::Domain(format!("need {m} seed bits, got {}", t.len())));
        }
        let s = words_of(t.iter().rev().copied(), m);
        Ok(ToeplitzHash { n, r, s })
    }

    pub fn input_len(&self) -> usize {
        self.n
    }

    pub fn output_len(&self) -> usize {
        self.r
    }

    /// Number of seed bits, `n + r − 1` (zero when `r = 0`).
    pub fn seed_len(&self) -> usize {
        if self.r == 0 {
            0
        } else {
            self.n + self.r - 1
        }
    }

    /// The diagonal bits `t` this matrix was built from.
    pub fn seed_bits(&self) -> Vec<u8> {
        let m = self.seed_len();
        let mut t: Vec<u8> = (0..m).map(|i| (self.s[i / 64] >> (i % 64) & 1) as u8).collect();
        t.reverse();
        t
    }

    #[inline]
    fn window_word(&self, off: usize, k: usize) -> u64 {
        let bit = off + 64 * k;
        let (a, sh) = (bit / 64, bit % 64);
        let lo = self.s.get(a).copied().unwrap_or(0) >> sh;
        if sh == 0 {
            lo
        } else {
            lo | self.s.get(a + 1).copied().unwrap_or(0) << (64 - sh)
        }
    }

    /// `T·x` for `x` packed into words (bit `j` of `x` at word `j/64`, position
    /// `j%64`), with bits beyond `n` ignored.
    pub fn apply_words(&self, x: &[u64]) -> Vec<u8> {
        let nw = self.n.div_ceil(64);
        let tail = if self.n % 64 == 0 { !0u64 } else { (1u64 << (self.n % 64)) - 1 };
        (0..self.r)
            .map(|i| {
                let off = self.r - 1 - i;
                let mut acc = 0u64;
                for k in 0..nw {
                    let mut w = self.window_word(off, k) & x.get(k).copied().unwrap_or(0);
                    if k == nw - 1 {
                        w &= tail;
                    }
                    acc ^= w;
                }
                (acc.count_ones() & 1) as u8
            })
            .collect()
    }

    /// `T·x` for `x` given one bit per byte.
    pub fn apply(&self, x: &[u8]) -> Result<Vec<u8>> {
        if x.len() != self.n {
            return Err(Error::Domain(format!("input has {} bits, expected {}", x.len(), self.n)));
        }
        Ok(self.apply_words(&words_of(x.iter().copied(), self.n)))
    }
}

/// Draws a Toeplitz hash from the public seed.
pub fn sample_hash(seed: u64, n: usize, r: usize) -> Result<ToeplitzHash> {
    if r > n {
        return Err(Error::Domain(format!("output length {r} exceeds input length {n}")));
    }
    let m = if r == 0 { 0 } else { n + r - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t: Vec<u8> = (0..m).map(|_| rng.random::<bool>() as u8).collect();
    ToeplitzHash::from_bits(n, r, &t)
}
