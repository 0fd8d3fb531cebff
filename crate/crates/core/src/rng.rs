//! Seeded, platform-independent random streams.
//!
//! Every consumer draws from ChaCha8 keyed by `seed_from_u64(seed)` with an
//! explicit stream number, and converts words to floats with the 53-bit
//! mantissa construction below, so values never depend on the platform or on
//! the float-sampling code of a particular `rand` release.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform in `[0, 1)`.
pub(crate) fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub(crate) fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + unit(rng) * (hi - lo)
}

/// Standard normal via Box-Muller (one value per call).
pub(crate) fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - unit(rng);
    let u2 = unit(rng);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub(crate) fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    ((unit(rng) * n as f64) as usize).min(n.saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_words_are_frozen() {
        // first outputs of stream 0 and 1 for seed 42; a change here changes every cohort
        let mut r0 = stream(42, 0);
        let mut r1 = stream(42, 1);
        let a: Vec<u64> = (0..3).map(|_| r0.next_u64()).collect();
        let b: Vec<u64> = (0..3).map(|_| r1.next_u64()).collect();
        assert_ne!(a, b);
        let mut again = stream(42, 0);
        assert_eq!(a[0], again.next_u64());
        assert_eq!(a, FROZEN.to_vec());
    }

    const FROZEN: [u64; 3] = [
        12578764544318200737,
        17529487244874322312,
        7886285670807131020,
    ];

    #[test]
    fn unit_interval() {
        let mut r = stream(7, 3);
        for _ in 0..10_000 {
            let u = unit(&mut r);
            assert!((0.0..1.0).contains(&u));
        }
    }
}
