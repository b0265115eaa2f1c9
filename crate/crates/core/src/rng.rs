//! Deterministic, splittable random streams.
//!
//! Every particle (and every Monte Carlo replicate) owns an independent
//! ChaCha8 stream addressed by `(seed, stream id)`. A stream is consumed in
//! fixed-size *sessions*: the caller keeps a session counter and rebuilds a
//! cheap generator positioned at `session * SESSION_WORDS`. Draws therefore
//! depend only on the owning id and its own session history, never on how
//! events from different particles interleave.

#[allow(unused_imports)]
use num_traits::Float;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// 32-bit words reserved per session (64 words = 32 `u64` draws).
const SESSION_WORDS: u128 = 64;

const TWO_PI: f64 = core::f64::consts::TAU;

/// Derives an independent child seed (SplitMix64 of seed and index).
pub fn derive(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x1234_5678_9abc_def1);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Expands a 64-bit seed into a 256-bit ChaCha key (SplitMix64 steps).
pub fn expand_seed(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        chunk.copy_from_slice(&(z ^ (z >> 31)).to_le_bytes());
    }
    key
}

/// One session worth of randomness from stream `stream` of the keyed family.
pub fn session(key: &[u8; 32], stream: u64, counter: u64) -> Draws {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(counter) * SESSION_WORDS);
    Draws { rng }
}

/// A positioned generator handing out the primitive draws the engine needs.
pub struct Draws {
    rng: ChaCha8Rng,
}

impl Draws {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on (0, 1]; never returns 0 so logs are safe.
    pub fn uniform_oc(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform on [0, 1).
    pub fn uniform_co(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Exponential with the given rate (inverse-CDF, one draw).
    pub fn exponential(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        -self.uniform_oc().ln() / rate
    }

    /// Standard normal via Box-Muller (two draws, exact in distribution).
    pub fn std_normal(&mut self) -> f64 {
        let r = (-2.0 * self.uniform_oc().ln()).sqrt();
        r * (TWO_PI * self.uniform_co()).cos()
    }

    /// Pair of independent standard normals from one Box-Muller transform.
    pub fn std_normal_pair(&mut self) -> (f64, f64) {
        let r = (-2.0 * self.uniform_oc().ln()).sqrt();
        let angle = TWO_PI * self.uniform_co();
        (r * angle.cos(), r * angle.sin())
    }
}
