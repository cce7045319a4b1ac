//! Seeded random data for the verification suites.
//!
//! Everything is ChaCha8-based so that a (config, seed) pair reproduces the
//! same windows and the same reports byte for byte on any platform.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rational::Rat;
use crate::sequence::Interval;
use crate::window::Window;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small nonzero rational with numerator in `[-9, 9]` and denominator in
/// `[1, 9]`.
pub fn random_nonzero_rat(rng: &mut ChaCha8Rng) -> Rat {
    loop {
        let n = rng.gen_range(-9i64..=9);
        if n == 0 {
            continue;
        }
        let d = rng.gen_range(1i64..=9);
        return Rat::new(n, d);
    }
}

/// Small rational, possibly zero.
pub fn random_rat(rng: &mut ChaCha8Rng) -> Rat {
    let n = rng.gen_range(-9i64..=9);
    let d = rng.gen_range(1i64..=9);
    Rat::new(n, d)
}

/// Window with random small rational data; every `a_n` is nonzero.
pub fn random_window(rng: &mut ChaCha8Rng, iv: Interval) -> Window {
    let a = (0..iv.len()).map(|_| random_nonzero_rat(rng)).collect();
    let b = (0..iv.len()).map(|_| random_rat(rng)).collect();
    Window::new(iv, a, b).expect("a_n were drawn nonzero")
}

/// Window close to the free one: `a_n = 1 + small`, `b_n = small`. Useful as
/// a negative control that is well conditioned but off every Darboux locus.
pub fn random_near_free_window(rng: &mut ChaCha8Rng, iv: Interval) -> Window {
    let a = (0..iv.len())
        .map(|_| Rat::one() + Rat::new(rng.gen_range(-3i64..=3), 17))
        .collect();
    let b = (0..iv.len())
        .map(|_| Rat::new(rng.gen_range(-3i64..=3), 13))
        .collect();
    Window::new(iv, a, b).expect("a_n stay near 1")
}
