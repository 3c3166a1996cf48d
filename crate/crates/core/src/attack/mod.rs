//! End-to-end attack protocols on synthetic trace sets: the single-phase AES
//! attack, the two-phase Speck attack with key reversal, the zero-key
//! diagnostic and countermeasure experiments.

mod experiment;
mod protocols;
mod report;
mod zero_key;

pub use experiment::{
    apply_level, countermeasure_experiment, AnalysisWindow, median_traces, CountermeasureAxis, ExperimentConfig,
    ExperimentTable, LevelOutcome,
};
pub use protocols::{
    attack_aes, attack_aes_with, attack_speck_full, attack_speck_full_with, attack_speck_phase1,
    attack_speck_phase2, expected_lane_byte, speck_phase1_with, speck_phase2_with, AttackOptions,
    DEFAULT_LOW_CONFIDENCE_GAP,
};
pub use report::{AttackReport, PhaseReport, PhaseTarget};
pub use zero_key::{zero_key_diagnostic, LanePeaks, ZeroKeyDiagnostic};
