use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tracelab_core::attack::DEFAULT_LOW_CONFIDENCE_GAP;

pub const DEMO_KEY: &str = "677689798898a65765f765775b87688c";

#[derive(Debug, Parser)]
#[command(name = "tracelab", version, about = "Simulated power traces and correlation power analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a trace set and write it to a file.
    Synth(SynthArgs),
    /// CPA attack on an AES trace file.
    Attack(AttackArgs),
    /// Two-phase Speck attack on a phase-1 and a phase-2 trace file.
    SpeckAttack(SpeckAttackArgs),
    /// Rankings of one lane on growing trace prefixes.
    Sweep(SweepArgs),
    /// Paired AES sets with and without plaintext loads, attacked with the
    /// xor selection.
    ZeroKeyDemo(ZeroKeyArgs),
    /// Minimal stable trace counts across countermeasure levels.
    CounterExperiment(ExperimentArgs),
    /// Seed assembly from a simulated biased source plus uniformity tests.
    Randtest(RandArgs),
    /// Encrypt one block.
    Cipher(CipherArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CipherArg {
    Aes,
    Speck,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Leakage per bit of Hamming weight.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub baseline: f64,
    /// Standard deviation of the additive measurement noise.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Quiet samples after each event.
    #[arg(long, default_value_t = 3)]
    pub filler_gap: usize,
    #[arg(long, default_value_t = 1)]
    pub samples_per_event: usize,
}

#[derive(Debug, Args)]
pub struct CountermeasureArgs {
    /// Up to this many random fillers before the S-box accesses.
    #[arg(long, default_value_t = 0)]
    pub inject: usize,
    /// Shuffle the order of the sixteen S-box accesses.
    #[arg(long)]
    pub shuffle: bool,
    /// Power-line low-pass coefficient in [0, 1).
    #[arg(long)]
    pub lowpass: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = CipherArg::Aes)]
    pub cipher: CipherArg,
    /// Speck attack phase the capture window serves (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub phase: u8,
    /// Speck register width in bits (8 or 16).
    #[arg(long, default_value_t = 8)]
    pub limb_bits: u32,
    /// Explicit schedule profile, e.g. aes-no-loads or speck-r1-operands.
    #[arg(long)]
    pub profile: Option<String>,
    /// 128-bit key in hex.
    #[arg(long)]
    pub key: String,
    #[arg(short = 'n', long, default_value_t = 500)]
    pub traces: usize,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub countermeasures: CountermeasureArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Correct key, used only to grade the result.
    #[arg(long)]
    pub true_key: Option<String>,
    /// Write the text report here as well as to stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write every ranked guess as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Ranked guesses shown per lane.
    #[arg(long, default_value_t = 5)]
    pub rows: usize,
    /// positive (largest signed coefficient) or absolute.
    #[arg(long, default_value = "positive")]
    pub polarity: String,
    /// Median lane gap below which a phase is flagged.
    #[arg(long, default_value_t = DEFAULT_LOW_CONFIDENCE_GAP)]
    pub low_confidence_gap: f64,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// aes-sbox or aes-xor.
    #[arg(long, default_value = "aes-sbox")]
    pub selection: String,
    /// Rank only samples START..END.
    #[arg(long)]
    pub window: Option<String>,
    /// Write the correlation-vs-time surface of --lane as CSV.
    #[arg(long)]
    pub correlation_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub lane: usize,
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Debug, Args)]
pub struct SpeckAttackArgs {
    #[arg(long)]
    pub phase1: PathBuf,
    #[arg(long)]
    pub phase2: PathBuf,
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// aes-sbox, aes-xor, speck-r1 or speck-r2.
    #[arg(long, default_value = "aes-sbox")]
    pub selection: String,
    /// Phase-1 K2 in hex, required by speck-r2.
    #[arg(long)]
    pub k2: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub lane: usize,
    /// Trace counts: "10,20,50", "lin:START:END:STEP" or
    /// "geom:START:END:RATIO". Defaults to geom:2:N:1.1.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value = "positive")]
    pub polarity: String,
    #[arg(long)]
    pub window: Option<String>,
    /// Trajectory CSV (rows = guesses, columns = trace counts).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Key used to report the minimal stable trace count.
    #[arg(long)]
    pub true_key: Option<String>,
}

#[derive(Debug, Args)]
pub struct ZeroKeyArgs {
    #[arg(long, default_value = DEMO_KEY)]
    pub key: String,
    #[arg(short = 'n', long, default_value_t = 500)]
    pub traces: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Correlation-vs-time CSV of --lane on the set with loads.
    #[arg(long)]
    pub curves_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub lane: usize,
    /// Also save the paired sets.
    #[arg(long)]
    pub save_with: Option<PathBuf>,
    #[arg(long)]
    pub save_without: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// injection, shuffle, lowpass or sigma.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated levels.
    #[arg(long)]
    pub levels: String,
    #[arg(long, default_value = "1,2,3,4,5")]
    pub seeds: String,
    /// One trace budget, or one per level.
    #[arg(long, default_value = "20000")]
    pub budget: String,
    #[arg(long, default_value = DEMO_KEY)]
    pub key: String,
    #[arg(long, default_value = "aes-full")]
    pub profile: String,
    /// Noise of the base configuration.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.05)]
    pub grid_ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub lane: usize,
    #[arg(long, default_value = "aes-sbox")]
    pub selection: String,
    /// full or sbox; defaults to sbox for AES profiles with S-box events.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RandArgs {
    /// prng, bits:P or adc:K.
    #[arg(long, default_value = "bits:0.01")]
    pub source: String,
    #[arg(long, default_value_t = 0.5)]
    pub adc_mean: f64,
    #[arg(long, default_value_t = 0.15)]
    pub adc_sigma: f64,
    /// Seed width in bits.
    #[arg(short = 'n', long, default_value_t = 16)]
    pub bits: u32,
    /// Fold count; defaults to 1000 for bit sources and 10 for ADC sources.
    #[arg(short = 'm', long)]
    pub folds: Option<usize>,
    /// Number of seeds generated.
    #[arg(long, default_value_t = 20000)]
    pub count: usize,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    #[arg(long, default_value_t = 0.01)]
    pub significance: f64,
    /// Samples fed to the spectral test.
    #[arg(long, default_value_t = 4096)]
    pub spectral_samples: usize,
    #[arg(long, default_value_t = 10.0)]
    pub flatness_threshold: f64,
    /// Comma-separated subset of chi,spectral.
    #[arg(long, default_value = "chi,spectral")]
    pub tests: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub histogram_csv: Option<PathBuf>,
    #[arg(long)]
    pub spectrum_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CipherArgs {
    #[arg(long, value_enum)]
    pub alg: CipherArg,
    #[arg(long)]
    pub key: String,
    #[arg(long)]
    pub pt: String,
}
