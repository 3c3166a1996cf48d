use std::time::Instant;

use super::report::{AttackReport, PhaseReport, PhaseTarget};
use crate::cipher::{recover_k1, Block128};
use crate::cpa::{attack_byte_with, CpaOptions, SelectionKind, SelectionModel};
use crate::leakage::{CipherId, TraceSet};
use crate::{Error, Result};

pub const DEFAULT_LOW_CONFIDENCE_GAP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct AttackOptions {
    pub cpa: CpaOptions,
    /// A phase is flagged when its median lane gap is below this.
    pub low_confidence_gap: f64,
}

impl Default for AttackOptions {
    fn default() -> Self {
        Self { cpa: CpaOptions::default(), low_confidence_gap: DEFAULT_LOW_CONFIDENCE_GAP }
    }
}

/// True subkey byte that lane `lane` of `model` targets under `key`.
pub fn expected_lane_byte(model: &SelectionModel, key: &Block128, lane: usize) -> u8 {
    let target = match model.kind {
        SelectionKind::AesSbox | SelectionKind::AesXor => PhaseTarget::AesKey,
        SelectionKind::SpeckR1 => PhaseTarget::SpeckK2,
        SelectionKind::SpeckR2 => PhaseTarget::SpeckKPrime,
    };
    target.expected_bytes(key)[lane]
}

fn expect_cipher(ts: &TraceSet, cipher: CipherId) -> Result<()> {
    if ts.cipher != cipher {
        return Err(Error::config(format!("expected a {cipher} trace set, got {}", ts.cipher)));
    }
    Ok(())
}

fn run_phase(
    ts: &TraceSet,
    model: &SelectionModel,
    target: PhaseTarget,
    opts: &AttackOptions,
) -> Result<PhaseReport> {
    let start = Instant::now();
    let lanes = (0..model.lanes())
        .map(|lane| attack_byte_with(&ts.traces, model, lane, &opts.cpa))
        .collect::<Result<Vec<_>>>()?;
    let mut report = PhaseReport {
        target,
        selection: model.kind,
        lanes,
        traces: ts.len(),
        elapsed: start.elapsed(),
        low_confidence: false,
        correct: None,
    };
    report.low_confidence = report.median_gap() < opts.low_confidence_gap;
    Ok(report)
}

pub fn attack_aes(ts: &TraceSet) -> Result<AttackReport> {
    attack_aes_with(ts, SelectionKind::AesSbox, &AttackOptions::default())
}

/// Sixteen independent lane attacks; the key is the concatenated best
/// guesses.
pub fn attack_aes_with(ts: &TraceSet, selection: SelectionKind, opts: &AttackOptions) -> Result<AttackReport> {
    expect_cipher(ts, CipherId::Aes128)?;
    if !matches!(selection, SelectionKind::AesSbox | SelectionKind::AesXor) {
        return Err(Error::config(format!("{selection} is not an AES selection function")));
    }
    let phase = run_phase(ts, &SelectionModel::new(selection), PhaseTarget::AesKey, opts)?;
    let key = Block128(phase.recovered_bytes().try_into().expect("16 AES lanes"));
    Ok(AttackReport { phases: vec![phase], recovered_key: key, success: None, notes: Vec::new() })
}

pub fn speck_phase1_with(ts: &TraceSet, opts: &AttackOptions) -> Result<PhaseReport> {
    expect_cipher(ts, CipherId::SpeckPhase1)?;
    run_phase(ts, &SelectionModel::speck_r1(), PhaseTarget::SpeckK2, opts)
}

/// Recovers K2 from a phase-1 set.
pub fn attack_speck_phase1(ts: &TraceSet) -> Result<u64> {
    Ok(speck_phase1_with(ts, &AttackOptions::default())?.recovered_word())
}

/// Attacks K' with hypotheses built from the phase-1 `k2`.
pub fn speck_phase2_with(ts: &TraceSet, k2: u64, opts: &AttackOptions) -> Result<PhaseReport> {
    expect_cipher(ts, CipherId::SpeckPhase2)?;
    run_phase(ts, &SelectionModel::speck_r2(k2), PhaseTarget::SpeckKPrime, opts)
}

/// Returns `(K', K1)` with `K1` obtained by reversing one key-schedule step.
pub fn attack_speck_phase2(ts: &TraceSet, k2: u64) -> Result<(u64, u64)> {
    let k_prime = speck_phase2_with(ts, k2, &AttackOptions::default())?.recovered_word();
    Ok((k_prime, recover_k1(k_prime, k2)))
}

pub fn attack_speck_full(ts1: &TraceSet, ts2: &TraceSet) -> Result<AttackReport> {
    attack_speck_full_with(ts1, ts2, &AttackOptions::default())
}

/// Phase 1, then phase 2 seeded with the recovered K2; the key is
/// `K1 || K2` in cipher key layout.
pub fn attack_speck_full_with(ts1: &TraceSet, ts2: &TraceSet, opts: &AttackOptions) -> Result<AttackReport> {
    let p1 = speck_phase1_with(ts1, opts)?;
    let k2 = p1.recovered_word();
    let p2 = speck_phase2_with(ts2, k2, opts)?;
    let k1 = recover_k1(p2.recovered_word(), k2);
    Ok(AttackReport {
        phases: vec![p1, p2],
        recovered_key: Block128::from_words(k1, k2),
        success: None,
        notes: Vec::new(),
    })
}
