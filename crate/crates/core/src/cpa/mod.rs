//! Correlation power analysis: selection functions, hypothesis matrices,
//! streaming Pearson correlation, guess ranking and trace-count sweeps.

mod correlation;
mod ranking;
mod selection;
mod sweep;

pub use correlation::{pearson_correlate, pearson_correlate_with, CorrelationMatrix, CpaAccumulator};
pub use ranking::{rank_guesses, rank_guesses_in, GuessScore, KeyRanking, Polarity};
pub use selection::{apply_selection, build_hypotheses, HypothesisMatrix, SelectionKind, SelectionModel};
pub use sweep::{geometric_grid, minimal_stable_traces, sweep_traces, sweep_traces_with, SweepPoint, SweepTrajectory};

use std::ops::Range;

use crate::leakage::{PowerTrace, TraceSet};
use crate::{Error, Execution, Result};

/// Knobs shared by the attack entry points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CpaOptions {
    pub polarity: Polarity,
    pub exec: Execution,
    /// Restrict ranking to these sample columns.
    pub samples: Option<Range<usize>>,
}

pub fn attack_byte(traceset: &TraceSet, model: &SelectionModel, byte_index: usize) -> Result<KeyRanking> {
    attack_byte_with(&traceset.traces, model, byte_index, &CpaOptions::default())
}

/// build_hypotheses -> pearson_correlate -> rank_guesses.
pub fn attack_byte_with(
    traces: &[PowerTrace],
    model: &SelectionModel,
    byte_index: usize,
    opts: &CpaOptions,
) -> Result<KeyRanking> {
    let c = correlate_byte(traces, model, byte_index, opts.exec)?;
    match &opts.samples {
        Some(r) => rank_guesses_in(&c, opts.polarity, r.clone()),
        None => rank_guesses(&c, opts.polarity),
    }
}

/// Full correlation surface for one lane.
pub fn correlate_byte(
    traces: &[PowerTrace],
    model: &SelectionModel,
    byte_index: usize,
    exec: Execution,
) -> Result<CorrelationMatrix> {
    if traces.is_empty() {
        return Err(Error::InsufficientData { needed: 2, got: 0 });
    }
    let h = build_hypotheses(traces, model, byte_index)?;
    pearson_correlate_with(traces, &h, exec)
}
