use super::hamming_weight;
use super::schedule::{
    build_event_schedule, inject_random_instructions, shuffle_sbox_events, CipherId,
    EventSchedule, EventTag, ScheduleProfile,
};
use crate::cipher::Block128;
use crate::rng::{StreamDomain, Xorshift64Star};
use crate::{Error, Execution, Result};

/// Amplitude and noise of the simulated measurement. Defaults are tuned so
/// an unprotected AES key byte settles within a few dozen traces; they are
/// not measured hardware values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Volts per unit of Hamming weight.
    pub alpha: f64,
    pub baseline: f64,
    /// Standard deviation of additive Gaussian noise, volts.
    pub sigma: f64,
    /// Noise-only samples following each event burst.
    pub filler_gap: usize,
    pub samples_per_event: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { alpha: 1.0, baseline: 0.0, sigma: 1.0, filler_gap: 3, samples_per_event: 1 }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::config(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        if self.samples_per_event == 0 {
            return Err(Error::config("samples_per_event must be at least 1"));
        }
        if !self.baseline.is_finite() {
            return Err(Error::config("baseline must be finite"));
        }
        Ok(())
    }

    /// Samples per event slot: the burst followed by the gap.
    pub fn slot_len(&self) -> usize {
        self.samples_per_event + self.filler_gap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Injection {
    pub n_max: usize,
    pub position: EventTag,
}

impl Injection {
    /// Dummy instructions between the trigger and the first S-box lookup.
    pub fn before_sbox(n_max: usize) -> Self {
        Self { n_max, position: EventTag::SboxLoad }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Countermeasures {
    pub injection: Option<Injection>,
    pub shuffle_sbox: bool,
    /// Single-pole smoothing of the device's consumption (a power-line
    /// filter). Acts on the leakage before measurement noise is added.
    pub lowpass: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub cipher: CipherId,
    pub profile: ScheduleProfile,
    pub noise: NoiseConfig,
    pub countermeasures: Countermeasures,
    pub key: Block128,
}

impl SynthConfig {
    pub fn new(profile: ScheduleProfile, key: Block128) -> Self {
        Self {
            cipher: profile.cipher_id(),
            profile,
            noise: NoiseConfig::default(),
            countermeasures: Countermeasures::default(),
            key,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if let Some(lambda) = self.countermeasures.lowpass {
            check_lambda(lambda)?;
        }
        Ok(())
    }

    /// Schedule for one plaintext with the configured countermeasures; all
    /// countermeasure randomness comes from `rng`.
    pub fn schedule(&self, plaintext: &Block128, rng: &mut Xorshift64Star) -> Result<EventSchedule> {
        let mut s = build_event_schedule(self.cipher, plaintext, &self.key, &self.profile)?;
        if self.countermeasures.shuffle_sbox {
            s = shuffle_sbox_events(s, rng)?;
        }
        if let Some(inj) = self.countermeasures.injection {
            s = inject_random_instructions(s, inj.n_max, inj.position, rng)?;
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    pub samples: Vec<f32>,
    pub plaintext: Block128,
}

impl AsRef<[f32]> for PowerTrace {
    fn as_ref(&self) -> &[f32] {
        &self.samples
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSetMeta {
    pub seed: u64,
    pub config: SynthConfig,
}

/// Traces of equal length, each paired with its plaintext.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    pub cipher: CipherId,
    pub traces: Vec<PowerTrace>,
    /// Generation parameters; absent for sets loaded from disk.
    pub meta: Option<TraceSetMeta>,
}

impl TraceSet {
    pub fn new(cipher: CipherId, traces: Vec<PowerTrace>) -> Result<Self> {
        let m = traces.first().map(|t| t.samples.len()).ok_or_else(|| Error::config("empty trace set"))?;
        if let Some(bad) = traces.iter().position(|t| t.samples.len() != m) {
            return Err(Error::InvalidOperand(format!(
                "trace {bad} has {} samples, expected {m}",
                traces[bad].samples.len()
            )));
        }
        Ok(Self { cipher, traces, meta: None })
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn samples_per_trace(&self) -> usize {
        self.traces.first().map_or(0, |t| t.samples.len())
    }

    pub fn plaintexts(&self) -> impl Iterator<Item = &Block128> {
        self.traces.iter().map(|t| &t.plaintext)
    }
}

/// Noise-free leakage levels of the in-window events: each slot is
/// `samples_per_event` samples of `baseline + alpha * HW(value)` followed by
/// `filler_gap` samples of `baseline`. Slots past the schedule's own events
/// up to its capacity hold the baseline (right padding).
fn leakage_levels(schedule: &EventSchedule, noise: &NoiseConfig) -> Vec<f64> {
    let slot = noise.slot_len();
    let events = schedule.window_events();
    debug_assert!(!events.is_empty(), "empty capture window");
    let mut levels = Vec::with_capacity(schedule.capacity() * slot);
    for s in 0..schedule.capacity() {
        let level = match events.get(s) {
            Some(e) => noise.baseline + noise.alpha * hamming_weight(e.value as u64) as f64,
            None => noise.baseline,
        };
        levels.extend(std::iter::repeat_n(level, noise.samples_per_event));
        levels.extend(std::iter::repeat_n(noise.baseline, noise.filler_gap));
    }
    levels
}

fn add_noise(levels: &[f64], sigma: f64, rng: &mut Xorshift64Star) -> Vec<f32> {
    levels.iter().map(|&l| (l + sigma * rng.gaussian()) as f32).collect()
}

/// Renders the schedule and adds measurement noise: one Gaussian per
/// sample, in sample order, whatever sigma is.
pub fn synthesize_trace(
    schedule: &EventSchedule,
    noise: &NoiseConfig,
    rng: &mut Xorshift64Star,
) -> PowerTrace {
    let samples = add_noise(&leakage_levels(schedule, noise), noise.sigma, rng);
    PowerTrace { samples, plaintext: *schedule.plaintext() }
}

fn lowpass_in_place(x: &mut [f64], lambda: f64) {
    for t in 1..x.len() {
        x[t] = lambda * x[t - 1] + (1.0 - lambda) * x[t];
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::config(format!("lowpass lambda must be in [0, 1), got {lambda}")))
    }
}

/// `y[0] = x[0]`, `y[t] = lambda * y[t-1] + (1 - lambda) * x[t]`.
pub fn lowpass_filter(trace: &PowerTrace, lambda: f64) -> Result<PowerTrace> {
    check_lambda(lambda)?;
    let mut x: Vec<f64> = trace.samples.iter().map(|&v| v as f64).collect();
    lowpass_in_place(&mut x, lambda);
    Ok(PowerTrace { samples: x.into_iter().map(|v| v as f32).collect(), plaintext: trace.plaintext })
}

/// Uniform random plaintexts; block `i` comes from its own substream.
pub fn random_plaintexts(seed: u64, n: usize) -> Vec<Block128> {
    (0..n)
        .map(|i| {
            let mut g = Xorshift64Star::substream(seed, StreamDomain::Plaintext, i as u64);
            Block128(std::array::from_fn(|_| g.next_u8()))
        })
        .collect()
}

pub fn synthesize_trace_set(config: &SynthConfig, plaintexts: &[Block128], seed: u64) -> Result<TraceSet> {
    synthesize_trace_set_with(config, plaintexts, seed, Execution::default())
}

/// One trace per plaintext. Trace `i` draws its countermeasure randomness
/// and its noise from substreams keyed by `(seed, i)`, so any subset of
/// indices can be regenerated bit-identically and the parallel path equals
/// the sequential one.
pub fn synthesize_trace_set_with(
    config: &SynthConfig,
    plaintexts: &[Block128],
    seed: u64,
    exec: Execution,
) -> Result<TraceSet> {
    config.validate()?;
    if plaintexts.is_empty() {
        return Err(Error::config("at least one plaintext is required"));
    }
    let traces = exec.map_range(0..plaintexts.len(), |i| -> Result<PowerTrace> {
        let mut cm_rng = Xorshift64Star::substream(seed, StreamDomain::Countermeasure, i as u64);
        let mut noise_rng = Xorshift64Star::substream(seed, StreamDomain::Noise, i as u64);
        let schedule = config.schedule(&plaintexts[i], &mut cm_rng)?;
        let mut levels = leakage_levels(&schedule, &config.noise);
        if let Some(lambda) = config.countermeasures.lowpass {
            lowpass_in_place(&mut levels, lambda);
        }
        let samples = add_noise(&levels, config.noise.sigma, &mut noise_rng);
        Ok(PowerTrace { samples, plaintext: plaintexts[i] })
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>>>()?;
    let mut set = TraceSet::new(config.cipher, traces)?;
    set.meta = Some(TraceSetMeta { seed, config: *config });
    Ok(set)
}
