use crate::rng::{StreamDomain, Xorshift64Star};
use crate::{Error, Result};

pub const DEFAULT_BIT_FOLDS: usize = 1000;
pub const DEFAULT_ADC_FOLDS: usize = 10;

/// Analog level before quantization, as fractions of the ADC full scale.
/// Draws outside `[0, 1]` clip to the rails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcProfile {
    pub mean: f64,
    pub sigma: f64,
}

impl Default for AdcProfile {
    fn default() -> Self {
        Self { mean: 0.5, sigma: 0.15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    /// Each draw is 1 with probability `p`.
    BiasedBits { p: f64 },
    /// Each draw is a `k`-bit ADC word.
    AdcWords { k: u32, profile: AdcProfile },
}

#[derive(Debug, Clone)]
pub struct SeedSource {
    kind: SourceKind,
    rng: Xorshift64Star,
}

impl SeedSource {
    pub fn new(kind: SourceKind, seed: u64) -> Result<Self> {
        match kind {
            SourceKind::BiasedBits { p } if !(0.0..=1.0).contains(&p) => {
                return Err(Error::config(format!("bit probability {p} outside [0, 1]")));
            }
            SourceKind::AdcWords { k, .. } if !(1..=16).contains(&k) => {
                return Err(Error::config(format!("ADC width {k} outside 1..=16")));
            }
            SourceKind::AdcWords { profile, .. }
                if !profile.mean.is_finite() || !(profile.sigma >= 0.0 && profile.sigma.is_finite()) =>
            {
                return Err(Error::config("ADC profile needs finite mean and sigma >= 0"));
            }
            _ => {}
        }
        Ok(Self { kind, rng: Xorshift64Star::substream(seed, StreamDomain::Seed, 0) })
    }

    pub fn biased_bits(p: f64, seed: u64) -> Result<Self> {
        Self::new(SourceKind::BiasedBits { p }, seed)
    }

    pub fn adc_words(k: u32, profile: AdcProfile, seed: u64) -> Result<Self> {
        Self::new(SourceKind::AdcWords { k, profile }, seed)
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    /// Bits per draw.
    pub fn width(&self) -> u32 {
        match self.kind {
            SourceKind::BiasedBits { .. } => 1,
            SourceKind::AdcWords { k, .. } => k,
        }
    }

    /// One raw draw, right-aligned.
    pub fn draw(&mut self) -> u64 {
        match self.kind {
            SourceKind::BiasedBits { p } => self.rng.bernoulli(p) as u64,
            SourceKind::AdcWords { k, profile } => {
                let full = (1u64 << k) as f64;
                let v = (profile.mean + profile.sigma * self.rng.gaussian()).clamp(0.0, 1.0);
                ((v * full) as u64).min((1u64 << k) - 1)
            }
        }
    }
}

fn check_n(n: u32) -> Result<()> {
    if !(1..=64).contains(&n) {
        return Err(Error::config(format!("seed width {n} outside 1..=64")));
    }
    Ok(())
}

fn low_mask(n: u32) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Concatenates `ceil(n / width)` draws, most recent draw lowest, keeps the
/// low `n` bits, and XOR-folds `m` such values.
fn assemble(source: &mut SeedSource, n: u32, m: usize) -> Result<u64> {
    check_n(n)?;
    if m == 0 {
        return Err(Error::config("fold count must be at least 1"));
    }
    let w = source.width();
    let draws = n.div_ceil(w);
    let mut folded = 0u64;
    for _ in 0..m {
        let mut v = 0u64;
        for _ in 0..draws {
            v = v.checked_shl(w).unwrap_or(0) | source.draw();
        }
        folded ^= v & low_mask(n);
    }
    Ok(folded)
}

/// `n` single-bit draws shifted into one value, XOR-folded over `m` values.
pub fn assemble_seed_from_bits(source: &mut SeedSource, n: u32, m: usize) -> Result<u64> {
    if !matches!(source.kind, SourceKind::BiasedBits { .. }) {
        return Err(Error::config("bit assembly needs a biased-bit source"));
    }
    assemble(source, n, m)
}

/// `ceil(n / k)` ADC words concatenated and truncated to `n` bits,
/// XOR-folded over `m` values.
pub fn assemble_seed_from_adc(source: &mut SeedSource, n: u32, m: usize) -> Result<u64> {
    if !matches!(source.kind, SourceKind::AdcWords { .. }) {
        return Err(Error::config("ADC assembly needs an ADC source"));
    }
    assemble(source, n, m)
}

/// Probability that the XOR of `m` independent Bernoulli(`p`) bits is 1.
pub fn fold_bias(p: f64, m: usize) -> f64 {
    (1.0 - (1.0 - 2.0 * p).powi(m as i32)) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_sources() {
        let mut ones = SeedSource::biased_bits(1.0, 3).unwrap();
        assert_eq!(assemble_seed_from_bits(&mut ones, 16, 1).unwrap(), 0xffff);
        assert_eq!(assemble_seed_from_bits(&mut ones, 16, 7).unwrap(), 0xffff);
        assert_eq!(assemble_seed_from_bits(&mut ones, 16, 8).unwrap(), 0);
        assert_eq!(assemble_seed_from_bits(&mut ones, 64, 1).unwrap(), u64::MAX);
        let mut zeros = SeedSource::biased_bits(0.0, 3).unwrap();
        assert_eq!(assemble_seed_from_bits(&mut zeros, 32, 5).unwrap(), 0);
    }

    #[test]
    fn adc_word_count() {
        // A rail-clipped source emits all-ones words; two 10-bit words give
        // 20 bits, of which the low 16 survive.
        let high = AdcProfile { mean: 2.0, sigma: 0.0 };
        let mut s = SeedSource::adc_words(10, high, 1).unwrap();
        assert_eq!(assemble_seed_from_adc(&mut s, 16, 1).unwrap(), 0xffff);
        let before = s.rng.clone();
        assemble_seed_from_adc(&mut s, 16, 1).unwrap();
        let mut replay = before;
        replay.gaussian();
        replay.gaussian();
        assert_eq!(s.rng, replay, "two words per 16-bit value");

        let mut one = SeedSource::adc_words(16, AdcProfile::default(), 2).unwrap();
        let before = one.rng.clone();
        assemble_seed_from_adc(&mut one, 16, 1).unwrap();
        let mut replay = before;
        replay.gaussian();
        assert_eq!(one.rng, replay, "k = n draws a single word");
    }

    #[test]
    fn adc_levels_clip_and_quantize() {
        let low = AdcProfile { mean: -1.0, sigma: 0.0 };
        let mut s = SeedSource::adc_words(10, low, 1).unwrap();
        assert_eq!(s.draw(), 0);
        let mid = AdcProfile { mean: 0.5, sigma: 0.0 };
        let mut s = SeedSource::adc_words(10, mid, 1).unwrap();
        assert_eq!(s.draw(), 512);
        let mut s = SeedSource::adc_words(4, AdcProfile::default(), 9).unwrap();
        assert!((0..1000).all(|_| s.draw() < 16));
    }

    #[test]
    fn fold_of_one_p_tenth_bit() {
        let law = fold_bias(0.1, 10);
        assert!((law - 0.4463).abs() < 1e-4, "{law}");
        let mut s = SeedSource::biased_bits(0.1, 11).unwrap();
        let n = 100_000;
        let ones: u64 = (0..n).map(|_| assemble_seed_from_bits(&mut s, 1, 10).unwrap()).sum();
        assert!((ones as f64 / n as f64 - law).abs() < 0.02);
    }

    #[test]
    fn fold_bias_brute_force() {
        // Direct sum over the binomial distribution of the number of ones.
        fn odd_mass(p: f64, m: usize) -> f64 {
            let mut total = 0.0;
            let mut c = 1.0f64;
            for j in 0..=m {
                if j > 0 {
                    c = c * (m - j + 1) as f64 / j as f64;
                }
                if j % 2 == 1 {
                    total += c * p.powi(j as i32) * (1.0 - p).powi((m - j) as i32);
                }
            }
            total
        }
        for &p in &[0.0, 0.05, 0.1, 0.3, 0.5, 0.9, 1.0] {
            for &m in &[1, 2, 3, 10, 25] {
                assert!((fold_bias(p, m) - odd_mass(p, m)).abs() < 1e-12, "p={p} m={m}");
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(SeedSource::biased_bits(1.5, 0).is_err());
        assert!(SeedSource::adc_words(0, AdcProfile::default(), 0).is_err());
        assert!(SeedSource::adc_words(17, AdcProfile::default(), 0).is_err());
        let mut s = SeedSource::biased_bits(0.5, 0).unwrap();
        assert!(assemble_seed_from_bits(&mut s, 0, 1).is_err());
        assert!(assemble_seed_from_bits(&mut s, 65, 1).is_err());
        assert!(assemble_seed_from_bits(&mut s, 8, 0).is_err());
        assert!(assemble_seed_from_adc(&mut s, 8, 1).is_err());
    }
}
