//! Deterministic xorshift64* generator used for every random draw in the
//! simulator.
//!
//! Recurrence: `x ^= x >> 12; x ^= x << 25; x ^= x >> 27`, output
//! `x * 2685821657736338717 (mod 2^64)`. Seed 0 is remapped to
//! [`ZERO_SEED_REMAP`] since the all-zero state is a fixed point.

const MULTIPLIER: u64 = 2_685_821_657_736_338_717;
pub const ZERO_SEED_REMAP: u64 = 0x9E37_79B9_7F4A_7C15;

/// Domain tags keep plaintext, noise and countermeasure streams of the same
/// trace index independent, so changing a countermeasure does not perturb
/// the noise of paired runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamDomain {
    Plaintext = 0x706c_6169_6e74_7874,
    Noise = 0x6e6f_6973_6500_0000,
    Countermeasure = 0x636f_756e_7465_7200,
    Seed = 0x7365_6564_0000_0000,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Xorshift64Star {
    state: u64,
}

// splitmix64 finalizer
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Xorshift64Star {
    pub fn new(seed: u64) -> Self {
        let state = if seed == 0 { ZERO_SEED_REMAP } else { seed };
        Self { state }
    }

    /// Independent stream for item `index` of a run seeded with `seed`.
    ///
    /// The starting state is `mix64(mix64(seed ^ domain) + golden * (index + 1))`,
    /// which scatters neighbouring indices across the generator's period.
    pub fn substream(seed: u64, domain: StreamDomain, index: u64) -> Self {
        let base = mix64(seed ^ domain as u64);
        let start = mix64(base.wrapping_add(
            0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)),
        ));
        Self::new(start)
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(MULTIPLIER)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (rejection sampling, no modulo bias).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let zone = u64::MAX - (u64::MAX % bound) - 1;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }

    pub fn next_u8(&mut self) -> u8 {
        (self.next_u64() >> 56) as u8
    }

    /// Bernoulli draw: true with probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Standard normal via Box-Muller, cosine branch only:
    /// `u1 = (a >> 11 + 1) / 2^53` in (0, 1], `u2 = (b >> 11) / 2^53`,
    /// `z = sqrt(-2 ln u1) * cos(2 pi u2)`. Two generator outputs per draw.
    pub fn gaussian(&mut self) -> f64 {
        let scale = 1.0 / (1u64 << 53) as f64;
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * scale;
        let u2 = (self.next_u64() >> 11) as f64 * scale;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Functional form of the recurrence: returns the output and the next state.
pub fn prng_next(state: Xorshift64Star) -> (u64, Xorshift64Star) {
    let mut next = state;
    let v = next.next_u64();
    (v, next)
}
