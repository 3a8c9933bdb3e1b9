//! Successive-cancellation decoding with side information.
//!
//! LLRs are `log P(x = 0 | ·) / P(x = 1 | ·)`. Writing `x = u·G` as
//! `(v_a ⊕ v_b, v_b)` with `v_a`, `v_b` the transforms of the two halves of
//! `u`, the left half sees `f(λ₁, λ₂)` and the right half
//! `λ₂ + (1 − 2 v_a) λ₁`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::bits::BitBlock;

/// Channel LLRs are clamped to this magnitude so that `p = 0` stays finite.
pub const LLR_CLAMP: f64 = 50.0;

/// Exact check-node update `2 atanh(tanh(a/2) tanh(b/2))`, in a form that
/// does not overflow for large arguments.
#[inline]
pub fn check_node<T: Scalar>(a: T, b: T) -> T {
    let s = if (a < T::zero()) != (b < T::zero()) { -T::one() } else { T::one() };
    s * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

/// `log((1 − p) / p)` clamped to `±LLR_CLAMP`.
pub fn bsc_llr<T: Scalar>(p: f64) -> T {
    let l = if p <= 0.0 {
        LLR_CLAMP
    } else if p >= 1.0 {
        -LLR_CLAMP
    } else {
        ((1.0 - p) / p).ln().clamp(-LLR_CLAMP, LLR_CLAMP)
    };
    T::of(l)
}

/// Channel LLRs of `x` given side information `y` through a BSC(p).
pub fn channel_llrs<T: Scalar>(y: &BitBlock, p: f64) -> Vec<T> {
    let l = bsc_llr::<T>(p);
    y.iter().map(|b| if b == 0 { l } else { -l }).collect()
}

/// Posterior entropy (bits) of a binary variable with the given LLR.
pub fn llr_entropy<T: Scalar>(llr: T) -> f64 {
    let a = llr.as_f64().abs();
    // P(less likely value) = 1 / (1 + e^{|λ|})
    let q = (-a).exp() / (1.0 + (-a).exp());
    crate::scalar::binary_entropy(q)
}

/// SC decoder with per-level scratch buffers, reusable across blocks of the
/// same length.
#[derive(Debug, Clone)]
pub struct ScDecoder<T> {
    n: usize,
    levels: Vec<Vec<T>>,
    u: Vec<u8>,
    x: Vec<u8>,
}

impl<T: Scalar> ScDecoder<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Domain(format!("block length {n} is not a power of two")));
        }
        let depth = n.trailing_zeros() as usize;
        Ok(ScDecoder {
            n,
            levels: (0..=depth).map(|k| vec![T::zero(); 1 << k]).collect(),
            u: vec![0; n],
            x: vec![0; n],
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Runs the SC recursion. `decide(i, λ_i)` returns the bit taken for
    /// `u_i` given its LLR at the leaf. Returns `(u, x)` with `x = u·G`.
    pub fn run<F>(&mut self, channel: &[T], mut decide: F) -> (&[u8], &[u8])
    where
        F: FnMut(usize, T) -> u8,
    {
        assert_eq!(channel.len(), self.n, "channel LLR length");
        let depth = self.levels.len() - 1;
        self.levels[depth].copy_from_slice(channel);
        let mut x = std::mem::take(&mut self.x);
        self.node(depth, 0, &mut x, &mut decide);
        self.x = x;
        (&self.u, &self.x)
    }

    fn node<F>(&mut self, k: usize, offset: usize, x: &mut [u8], decide: &mut F)
    where
        F: FnMut(usize, T) -> u8,
    {
        if k == 0 {
            let bit = decide(offset, self.levels[0][0]) & 1;
            self.u[offset] = bit;
            x[0] = bit;
            return;
        }
        let h = 1 << (k - 1);
        {
            let (lo, hi) = self.levels.split_at_mut(k);
            let (parent, child) = (&hi[0], &mut lo[k - 1]);
            for i in 0..h {
                child[i] = check_node(parent[i], parent[i + h]);
            }
        }
        let (xa, xb) = x.split_at_mut(h);
        self.node(k - 1, offset, xa, decide);
        {
            let (lo, hi) = self.levels.split_at_mut(k);
            let (parent, child) = (&hi[0], &mut lo[k - 1]);
            for i in 0..h {
                child[i] = if xa[i] == 0 { parent[i + h] + parent[i] } else { parent[i + h] - parent[i] };
            }
        }
        self.node(k - 1, offset + h, xb, decide);
        for i in 0..h {
            xa[i] ^= xb[i];
        }
    }

    /// Decodes with the bits of `u` on `known` fixed to `values`. Free bits
    /// take the likelier value, `0` on an exact tie.
    pub fn decode(&mut self, channel: &[T], known: &KnownBits) -> BitBlock {
        let (_, x) = self.run(channel, |i, llr| match known.get(i) {
            Some(v) => v,
            None => (llr < T::zero()) as u8,
        });
        BitBlock::from_bits(x).expect("power-of-two length")
    }
}

/// Values of `u` on a subset of positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownBits {
    values: Vec<Option<u8>>,
}

impl KnownBits {
    pub fn new(n: usize, indices: &[usize], bits: &[u8]) -> Result<Self> {
        if indices.len() != bits.len() {
            return Err(Error::Domain(format!(
                "{} indices but {} values",
                indices.len(),
                bits.len()
            )));
        }
        let mut values = vec![None; n];
        for (&i, &b) in indices.iter().zip(bits) {
            if i >= n {
                return Err(Error::Domain(format!("index {i} is out of range for N = {n}")));
            }
            values[i] = Some(b & 1);
        }
        Ok(KnownBits { values })
    }

    pub fn none(n: usize) -> Self {
        KnownBits { values: vec![None; n] }
    }

    #[inline]
    pub fn get(&self, i: usize) -> Option<u8> {
        self.values[i]
    }
}

/// Decodes `x̂` from side information `y` (BSC(p) relation) and the values
/// of `u = x·G` on `indices`.
pub fn sc_decode(indices: &[usize], values: &[u8], y: &BitBlock, p: f64) -> Result<BitBlock> {
    let known = KnownBits::new(y.len(), indices, values)?;
    let mut dec = ScDecoder::<f64>::new(y.len())?;
    Ok(dec.decode(&channel_llrs(y, p), &known))
}
