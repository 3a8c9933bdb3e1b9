use super::bits::BitBlock;

/// Masks selecting positions `i` with bit `h` of `i` clear, for `h = 1…32`.
const LOW_HALF: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// `u = x · G_n` with `G_n = [[1,0],[1,1]]^{⊗n}`, no bit reversal.
///
/// Butterfly `u[i] ^= u[i + h]` for `h = 1, 2, …, N/2`, done with shifts
/// inside a word and whole-word XORs across words. `G_n` is its own inverse
/// over GF(2), so this also maps `u` back to `x`.
pub fn polar_transform(x: &BitBlock) -> BitBlock {
    let mut u = x.clone();
    polar_transform_in_place(&mut u);
    u
}

pub fn polar_transform_in_place(b: &mut BitBlock) {
    let n = b.len();
    let words = b.words_mut();
    for (k, &mask) in LOW_HALF.iter().enumerate() {
        let h = 1usize << k;
        if h >= n {
            return;
        }
        for w in words.iter_mut() {
            *w ^= (*w >> h) & mask;
        }
    }
    let mut hw = 1;
    while hw < words.len() {
        for start in (0..words.len()).step_by(2 * hw) {
            for i in start..start + hw {
                words[i] ^= words[i + hw];
            }
        }
        hw *= 2;
    }
}

/// Bit-at-a-time reference butterfly.
pub fn polar_transform_reference(x: &[u8]) -> Vec<u8> {
    let mut u = x.to_vec();
    let mut h = 1;
    while h < u.len() {
        for i in 0..u.len() {
            if i & h == 0 {
                u[i] ^= u[i + h];
            }
        }
        h *= 2;
    }
    u
}
