//! Counter-based standard normals: the value at `(seed, stream, index)` does not depend on
//! which other values were drawn or in which order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Standard normal number addressed by `(seed, stream, index)` (Box–Muller on two words).
pub fn normal_at(seed: u64, stream: u64, index: u64) -> f64 {
    normals(seed, stream, index, 1)[0]
}

/// `normal_at(seed, stream, start..start+len)`.
pub fn normals(seed: u64, stream: u64, start: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(4 * start as u128);
    (0..len)
        .map(|_| {
            let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
            let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
        .collect()
}
