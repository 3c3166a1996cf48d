use std::fmt::Write as _;
use std::ops::Range;

use crate::cipher::Block128;
use crate::cpa::{correlate_byte, rank_guesses, rank_guesses_in, CpaOptions, KeyRanking, SelectionModel};
use crate::leakage::{CipherId, EventTag, ScheduleProfile, TraceSet, TraceSetMeta};
use crate::rng::{StreamDomain, Xorshift64Star};
use crate::{Error, Result};

/// Correlation-vs-time peaks of one lane on the set with loads.
#[derive(Debug, Clone, PartialEq)]
pub struct LanePeaks {
    pub lane: usize,
    /// Top guess of the set without loads.
    pub candidate: u8,
    /// Separated peaks of the candidate's curve, in sample order.
    pub candidate_peaks: Vec<usize>,
    /// Peak sample of guess 0.
    pub zero_peak: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroKeyDiagnostic {
    /// Samples covered by plaintext-load events in the set with loads.
    pub load_window: Range<usize>,
    /// xor selection, ranked inside the load window.
    pub with_loads: Vec<KeyRanking>,
    /// xor selection, ranked over the whole trace.
    pub with_loads_full: Vec<KeyRanking>,
    /// xor selection on the set without loads.
    pub without_loads: Vec<KeyRanking>,
    pub peaks: Vec<LanePeaks>,
}

impl ZeroKeyDiagnostic {
    fn top(r: &[KeyRanking]) -> Block128 {
        Block128(std::array::from_fn(|i| r[i].best().guess as u8))
    }

    pub fn with_loads_key(&self) -> Block128 {
        Self::top(&self.with_loads)
    }

    pub fn with_loads_full_key(&self) -> Block128 {
        Self::top(&self.with_loads_full)
    }

    pub fn without_loads_key(&self) -> Block128 {
        Self::top(&self.without_loads)
    }

    /// Lanes whose top guess with loads is 0.
    pub fn zero_lanes(&self) -> usize {
        self.with_loads.iter().filter(|r| r.best().guess == 0).count()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "load window: samples {}..{}", self.load_window.start, self.load_window.end);
        let _ = writeln!(s, "with loads (load window): {}", self.with_loads_key());
        let _ = writeln!(s, "with loads (full trace):  {}", self.with_loads_full_key());
        let _ = writeln!(s, "without loads:            {}", self.without_loads_key());
        let _ = writeln!(s, "lanes reporting zero with loads: {}/16", self.zero_lanes());
        let _ = writeln!(s, "{:>4} {:>9} {:>18} {:>9}", "lane", "candidate", "candidate peaks", "zero peak");
        for p in &self.peaks {
            let peaks: Vec<String> = p.candidate_peaks.iter().map(usize::to_string).collect();
            let zero = p.zero_peak.map_or("-".into(), |z| z.to_string());
            let _ = writeln!(s, "{:>4} {:>9} {:>18} {:>9}", p.lane, format!("{:02x}", p.candidate), peaks.join(" "), zero);
        }
        s
    }
}

fn meta(ts: &TraceSet) -> Result<&TraceSetMeta> {
    ts.meta.as_ref().ok_or_else(|| Error::config("zero-key diagnostic needs synthesized trace sets"))
}

fn check_paired(with: &TraceSet, without: &TraceSet) -> Result<()> {
    let (a, b) = (meta(with)?, meta(without)?);
    if with.cipher != CipherId::Aes128 || without.cipher != CipherId::Aes128 {
        return Err(Error::config("zero-key diagnostic needs AES trace sets"));
    }
    let loads = |p: &ScheduleProfile| match *p {
        ScheduleProfile::Aes { plaintext_loads, sbox } => Some((plaintext_loads, sbox)),
        _ => None,
    };
    let paired_profiles = match (loads(&a.config.profile), loads(&b.config.profile)) {
        (Some((true, s1)), Some((false, s2))) => s1 == s2,
        _ => false,
    };
    let same = a.seed == b.seed
        && a.config.key == b.config.key
        && a.config.noise == b.config.noise
        && a.config.countermeasures == b.config.countermeasures
        && with.len() == without.len()
        && with.plaintexts().eq(without.plaintexts());
    if !(paired_profiles && same) {
        return Err(Error::config(
            "trace sets are not paired: they must share key, seed, noise and plaintexts and differ only in plaintext loads",
        ));
    }
    Ok(())
}

fn load_window(with: &TraceSet) -> Result<Range<usize>> {
    let m = meta(with)?;
    let mut rng = Xorshift64Star::substream(m.seed, StreamDomain::Countermeasure, 0);
    let schedule = m.config.schedule(&with.traces[0].plaintext, &mut rng)?;
    let slots = schedule
        .slot_range(EventTag::PlaintextLoad)
        .ok_or_else(|| Error::config("set with loads has no plaintext-load events in its window"))?;
    let len = m.config.noise.slot_len();
    Ok(slots.start * len..slots.end * len)
}

/// Argmax of each run of samples where `curve` is at least half its maximum.
fn separated_peaks(curve: &[f64]) -> Vec<usize> {
    let max = curve.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    let mut run: Option<usize> = None;
    for (i, &v) in curve.iter().enumerate() {
        if v >= 0.5 * max {
            run = Some(match run {
                Some(b) if curve[b] >= v => b,
                _ => i,
            });
        } else if let Some(b) = run.take() {
            peaks.push(b);
        }
    }
    peaks.extend(run);
    peaks
}

/// Runs the xor selection on paired AES sets that differ only in whether
/// the plaintext loads fall inside the capture window.
///
/// With loads, the reported ranking is taken inside the load window, where
/// guess 0 predicts the loaded plaintext exactly; the full-trace ranking is
/// kept alongside. Without loads, the ranking is over the whole trace.
pub fn zero_key_diagnostic(with_loads: &TraceSet, without_loads: &TraceSet) -> Result<ZeroKeyDiagnostic> {
    check_paired(with_loads, without_loads)?;
    let window = load_window(with_loads)?;
    let model = SelectionModel::aes_xor();
    let opts = CpaOptions::default();
    let mut diag = ZeroKeyDiagnostic {
        load_window: window.clone(),
        with_loads: Vec::with_capacity(16),
        with_loads_full: Vec::with_capacity(16),
        without_loads: Vec::with_capacity(16),
        peaks: Vec::with_capacity(16),
    };
    for lane in 0..16 {
        let c_with = correlate_byte(&with_loads.traces, &model, lane, opts.exec)?;
        let c_without = correlate_byte(&without_loads.traces, &model, lane, opts.exec)?;
        diag.with_loads.push(rank_guesses_in(&c_with, opts.polarity, window.clone())?);
        let full = rank_guesses(&c_with, opts.polarity)?;
        let without = rank_guesses(&c_without, opts.polarity)?;
        let candidate = without.best().guess;
        diag.peaks.push(LanePeaks {
            lane,
            candidate: candidate as u8,
            candidate_peaks: separated_peaks(c_with.row(candidate)),
            zero_peak: full.score_of(0).map(|s| s.peak_sample),
        });
        diag.with_loads_full.push(full);
        diag.without_loads.push(without);
    }
    Ok(diag)
}
