use std::fmt::{self, Write as _};
use std::io::{self, Write};
use std::str::FromStr;

use super::protocols::expected_lane_byte;
use crate::cipher::Block128;
use crate::cpa::{geometric_grid, sweep_traces_with, CpaOptions, SelectionModel};
use crate::leakage::{
    build_event_schedule, random_plaintexts, synthesize_trace_set_with, EventTag, Injection, ScheduleProfile,
    SynthConfig,
};
use crate::{Error, Execution, Result};

/// Simulator knob varied by an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountermeasureAxis {
    /// Maximum number of random fillers before the S-box accesses.
    Injection,
    /// 0 = off, anything else = S-box order shuffled per trace.
    Shuffle,
    /// Low-pass coefficient lambda; 0 = unfiltered.
    Lowpass,
    /// Additive noise standard deviation.
    Sigma,
}

impl CountermeasureAxis {
    pub fn name(self) -> &'static str {
        match self {
            CountermeasureAxis::Injection => "injection",
            CountermeasureAxis::Shuffle => "shuffle",
            CountermeasureAxis::Lowpass => "lowpass",
            CountermeasureAxis::Sigma => "sigma",
        }
    }
}

impl fmt::Display for CountermeasureAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CountermeasureAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "injection" => Ok(CountermeasureAxis::Injection),
            "shuffle" => Ok(CountermeasureAxis::Shuffle),
            "lowpass" | "lambda" | "filter" => Ok(CountermeasureAxis::Lowpass),
            "sigma" | "noise" => Ok(CountermeasureAxis::Sigma),
            _ => Err(Error::config(format!("unknown countermeasure axis {s:?}"))),
        }
    }
}

/// `base` with the axis set to `level`.
pub fn apply_level(base: &SynthConfig, axis: CountermeasureAxis, level: f64) -> Result<SynthConfig> {
    let mut c = *base;
    match axis {
        CountermeasureAxis::Injection => {
            if !(level >= 0.0 && level.fract() == 0.0) {
                return Err(Error::config(format!("injection level {level} is not a count")));
            }
            c.countermeasures.injection = (level > 0.0).then(|| Injection::before_sbox(level as usize));
        }
        CountermeasureAxis::Shuffle => c.countermeasures.shuffle_sbox = level != 0.0,
        CountermeasureAxis::Lowpass => c.countermeasures.lowpass = (level != 0.0).then_some(level),
        CountermeasureAxis::Sigma => c.noise.sigma = level,
    }
    c.validate()?;
    Ok(c)
}

/// Samples the ranking looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisWindow {
    Full,
    /// From the first S-box access to the end of the trace. Excludes the
    /// plaintext loads and AddRoundKey stores, which no hiding
    /// countermeasure moves and which give some wrong guesses a fixed
    /// correlation that the diluted true peak cannot outgrow.
    SboxRegion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub base: SynthConfig,
    pub axis: CountermeasureAxis,
    pub levels: Vec<f64>,
    /// Paired across levels: seed `s` gives the same plaintexts and noise
    /// streams at every level.
    pub seeds: Vec<u64>,
    /// Trace budget per level, or a single budget shared by all levels.
    pub budgets: Vec<usize>,
    /// Step of the geometric trace-count grid.
    pub grid_ratio: f64,
    pub model: SelectionModel,
    pub target_byte: usize,
    pub window: AnalysisWindow,
    pub exec: Execution,
}

impl ExperimentConfig {
    /// Attacks byte 0 with the S-box selection; AES profiles with S-box
    /// events are analysed in the S-box region.
    pub fn new(base: SynthConfig, axis: CountermeasureAxis, levels: Vec<f64>, seeds: Vec<u64>, budget: usize) -> Self {
        let window = match base.profile {
            ScheduleProfile::Aes { sbox: true, .. } => AnalysisWindow::SboxRegion,
            _ => AnalysisWindow::Full,
        };
        Self {
            base,
            axis,
            levels,
            seeds,
            budgets: vec![budget],
            grid_ratio: 1.05,
            model: SelectionModel::aes_sbox(),
            target_byte: 0,
            window,
            exec: Execution::default(),
        }
    }

    fn budget(&self, level_index: usize) -> usize {
        if self.budgets.len() == 1 {
            self.budgets[0]
        } else {
            self.budgets[level_index]
        }
    }

    fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.seeds.is_empty() {
            return Err(Error::config("experiment needs at least one level and one seed"));
        }
        if !(self.budgets.len() == 1 || self.budgets.len() == self.levels.len()) {
            return Err(Error::config("give one budget, or one per level"));
        }
        if self.budgets.iter().any(|&b| b < 2) {
            return Err(Error::config("trace budget must be at least 2"));
        }
        if self.window == AnalysisWindow::SboxRegion {
            sbox_region_start(&self.base)?;
        }
        if self.target_byte >= self.model.lanes() {
            return Err(Error::config(format!("target byte {} out of range", self.target_byte)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelOutcome {
    pub level: f64,
    pub budget: usize,
    /// Minimal stable trace count per seed; `None` when the budget ran out.
    pub per_seed: Vec<Option<usize>>,
    /// Median over seeds, infinite when a not-reached seed is the median.
    pub median: f64,
}

/// Median with not-reached entries ranked above every count.
pub fn median_traces(values: &[Option<usize>]) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|x| x.map_or(f64::INFINITY, |n| n as f64)).collect();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    pub axis: CountermeasureAxis,
    pub seeds: Vec<u64>,
    pub outcomes: Vec<LevelOutcome>,
}

impl ExperimentTable {
    pub fn medians(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.median).collect()
    }

    /// Medians divided by the first level's median.
    pub fn ratios(&self) -> Vec<f64> {
        let m = self.medians();
        m.iter().map(|x| x / m[0]).collect()
    }

    /// True when no level had a seed exhaust its budget.
    pub fn all_reached(&self) -> bool {
        self.outcomes.iter().all(|o| o.per_seed.iter().all(Option::is_some))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:>10} {:>8} {:>10} {:>8}", self.axis.name(), "budget", "median", "ratio");
        for seed in &self.seeds {
            let _ = write!(s, " {:>9}", format!("seed {seed}"));
        }
        s.push('\n');
        for (o, r) in self.outcomes.iter().zip(self.ratios()) {
            let _ = write!(s, "{:>10} {:>8} {:>10} {:>8.2}", o.level, o.budget, o.median, r);
            for v in &o.per_seed {
                let _ = write!(s, " {:>9}", v.map_or("-".into(), |n| n.to_string()));
            }
            s.push('\n');
        }
        s
    }

    /// One row per level; not-reached cells are empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "{},budget,median", self.axis.name())?;
        for seed in &self.seeds {
            write!(out, ",seed_{seed}")?;
        }
        writeln!(out)?;
        for o in &self.outcomes {
            write!(out, "{},{},{}", o.level, o.budget, o.median)?;
            for v in &o.per_seed {
                match v {
                    Some(n) => write!(out, ",{n}")?,
                    None => write!(out, ",")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// First sample of the S-box region. Injection only adds fillers before
/// it and shuffling only permutes after it, so the base schedule fixes it.
fn sbox_region_start(base: &SynthConfig) -> Result<usize> {
    let s = build_event_schedule(base.cipher, &Block128::ZERO, &base.key, &base.profile)?;
    let slots = s
        .slot_range(EventTag::SboxLoad)
        .ok_or_else(|| Error::config("profile has no S-box events to analyse"))?;
    Ok(slots.start * base.noise.slot_len())
}

fn run_cell(cfg: &ExperimentConfig, level: f64, budget: usize, seed: u64) -> Result<Option<usize>> {
    let synth = apply_level(&cfg.base, cfg.axis, level)?;
    let ts = synthesize_trace_set_with(&synth, &random_plaintexts(seed, budget), seed, Execution::Sequential)?;
    let grid = geometric_grid(2, budget, cfg.grid_ratio)?;
    let samples = match cfg.window {
        AnalysisWindow::Full => None,
        AnalysisWindow::SboxRegion => Some(sbox_region_start(&cfg.base)?..ts.samples_per_trace()),
    };
    let opts = CpaOptions { exec: Execution::Sequential, samples, ..CpaOptions::default() };
    let traj = sweep_traces_with(&ts.traces, &cfg.model, cfg.target_byte, &grid, &opts)?;
    let truth = expected_lane_byte(&cfg.model, &cfg.base.key, cfg.target_byte);
    Ok(traj.minimal_stable(truth as usize))
}

/// Minimal stable trace counts for every (level, seed) cell and their
/// medians per level. Cells are independent and run on `cfg.exec`.
pub fn countermeasure_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTable> {
    cfg.validate()?;
    for &level in &cfg.levels {
        apply_level(&cfg.base, cfg.axis, level)?;
    }
    let seeds = cfg.seeds.len();
    let cells = cfg.exec.map_range(0..cfg.levels.len() * seeds, |c| {
        let (li, si) = (c / seeds, c % seeds);
        run_cell(cfg, cfg.levels[li], cfg.budget(li), cfg.seeds[si])
    });
    let mut cells = cells.into_iter();
    let mut outcomes = Vec::with_capacity(cfg.levels.len());
    for (li, &level) in cfg.levels.iter().enumerate() {
        let per_seed = cells.by_ref().take(seeds).collect::<Result<Vec<_>>>()?;
        outcomes.push(LevelOutcome { level, budget: cfg.budget(li), median: median_traces(&per_seed), per_seed });
    }
    Ok(ExperimentTable { axis: cfg.axis, seeds: cfg.seeds.clone(), outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leakage::ScheduleProfile;

    fn base() -> SynthConfig {
        SynthConfig::new(ScheduleProfile::AES_FULL, Block128::from_hex("677689798898a65765f765775b87688c").unwrap())
    }

    #[test]
    fn levels_map_onto_knobs() {
        let b = base();
        let c = apply_level(&b, CountermeasureAxis::Injection, 3.0).unwrap();
        assert_eq!(c.countermeasures.injection.unwrap().n_max, 3);
        assert_eq!(apply_level(&b, CountermeasureAxis::Injection, 0.0).unwrap(), b);
        assert!(apply_level(&b, CountermeasureAxis::Injection, 1.5).is_err());
        assert!(apply_level(&b, CountermeasureAxis::Shuffle, 1.0).unwrap().countermeasures.shuffle_sbox);
        assert_eq!(apply_level(&b, CountermeasureAxis::Lowpass, 0.5).unwrap().countermeasures.lowpass, Some(0.5));
        assert!(apply_level(&b, CountermeasureAxis::Lowpass, 1.0).is_err());
        assert_eq!(apply_level(&b, CountermeasureAxis::Sigma, 2.0).unwrap().noise.sigma, 2.0);
        assert!(apply_level(&b, CountermeasureAxis::Sigma, -1.0).is_err());
    }

    #[test]
    fn sbox_region_follows_profile() {
        assert_eq!(sbox_region_start(&base()).unwrap(), 32 * 4);
        let no_loads = SynthConfig::new("aes-no-loads".parse().unwrap(), base().key);
        assert_eq!(sbox_region_start(&no_loads).unwrap(), 16 * 4);
        let xor_only = SynthConfig::new("aes-xor-only".parse().unwrap(), base().key);
        assert!(sbox_region_start(&xor_only).is_err());
        let cfg = ExperimentConfig::new(xor_only, CountermeasureAxis::Sigma, vec![1.0], vec![1], 50);
        assert_eq!(cfg.window, AnalysisWindow::Full);
    }

    #[test]
    fn medians_treat_missing_as_infinite() {
        assert_eq!(median_traces(&[Some(5), None, Some(1)]), 5.0);
        assert_eq!(median_traces(&[None, None, Some(1)]), f64::INFINITY);
        assert_eq!(median_traces(&[Some(2), Some(4)]), 3.0);
    }

    #[test]
    fn small_experiment_runs_and_is_deterministic() {
        let mut cfg = ExperimentConfig::new(base(), CountermeasureAxis::Sigma, vec![0.5, 2.0], vec![1, 2, 3], 400);
        cfg.grid_ratio = 1.2;
        let t = countermeasure_experiment(&cfg).unwrap();
        assert!(t.all_reached());
        assert!(t.medians()[0] <= t.medians()[1]);
        cfg.exec = Execution::Sequential;
        assert_eq!(countermeasure_experiment(&cfg).unwrap(), t);
        assert!(t.render().lines().count() == 3);
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("sigma,budget,median,seed_1,seed_2,seed_3\n"));
    }

    #[test]
    fn exhausted_budget_is_not_reached() {
        let mut cfg = ExperimentConfig::new(base(), CountermeasureAxis::Sigma, vec![20.0], vec![1], 4);
        cfg.grid_ratio = 1.5;
        let t = countermeasure_experiment(&cfg).unwrap();
        assert_eq!(t.outcomes[0].per_seed, vec![None]);
        assert!(!t.all_reached());
    }

    #[test]
    fn config_errors() {
        let cfg = ExperimentConfig::new(base(), CountermeasureAxis::Sigma, vec![], vec![1], 100);
        assert!(countermeasure_experiment(&cfg).is_err());
        let mut cfg = ExperimentConfig::new(base(), CountermeasureAxis::Sigma, vec![1.0, 2.0], vec![1], 100);
        cfg.budgets = vec![10, 20, 30];
        assert!(countermeasure_experiment(&cfg).is_err());
    }
}
