//! Benchmark-only crate; see `benches/kernels.rs`.
//!
//! Shared inputs for the benchmarks live here so criterion targets
//! stay small.

use collider_core::digits::BigNat;

/// A reproducible pseudo-random big natural with the given bit count,
/// from a splitmix-style word generator (no RNG dependency).
pub fn synthetic_bignat(bits: u64, seed: u64) -> BigNat {
    let words = bits.div_ceil(64);
    let mut state = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut limbs = Vec::with_capacity(words as usize);
    for _ in 0..words {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        limbs.push(z ^ (z >> 31));
    }
    let mut n = BigNat::new(limbs.iter().flat_map(|&w| [w as u32, (w >> 32) as u32]).collect());
    let excess = n.bits().saturating_sub(bits);
    if excess > 0 {
        n >>= excess;
    }
    n
}
