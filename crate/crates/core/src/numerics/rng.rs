//! Deterministic randomness keyed on input data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::matrix::CMatrix;

/// FNV-1a over the bit patterns of a sequence of floats.
pub fn hash_floats(values: impl IntoIterator<Item = f64>) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for v in values {
        for byte in v.to_bits().to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}

pub fn hash_matrices(mats: &[&CMatrix]) -> u64 {
    hash_floats(
        mats.iter()
            .flat_map(|m| m.as_slice().iter().flat_map(|z| [z.re, z.im])),
    )
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
