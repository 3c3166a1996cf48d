use std::fmt::Write as _;
use std::io::{self, Write};
use std::time::Duration;

use crate::cipher::{speck_key_schedule, Block128};
use crate::cpa::{KeyRanking, SelectionKind};

/// What the lanes of one attack phase recover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseTarget {
    /// AES key bytes in block order.
    AesKey,
    /// Speck K2, lane 0 least significant.
    SpeckK2,
    /// Speck round-1 key K', lane 0 least significant.
    SpeckKPrime,
}

impl PhaseTarget {
    pub fn name(self) -> &'static str {
        match self {
            PhaseTarget::AesKey => "aes key",
            PhaseTarget::SpeckK2 => "speck K2",
            PhaseTarget::SpeckKPrime => "speck K'",
        }
    }

    /// Lane bytes this phase should recover under `key`.
    pub fn expected_bytes(self, key: &Block128) -> Vec<u8> {
        let (k1, k2) = key.words();
        let lanes = |w: u64| (0..8).map(|i| (w >> (8 * i)) as u8).collect();
        match self {
            PhaseTarget::AesKey => key.0.to_vec(),
            PhaseTarget::SpeckK2 => lanes(k2),
            PhaseTarget::SpeckKPrime => lanes(speck_key_schedule(k1, k2).round_keys[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub target: PhaseTarget,
    pub selection: SelectionKind,
    pub lanes: Vec<KeyRanking>,
    pub traces: usize,
    pub elapsed: Duration,
    /// Median lane gap fell below the configured threshold.
    pub low_confidence: bool,
    /// Per-lane correctness, filled in by [`AttackReport::grade`].
    pub correct: Option<Vec<bool>>,
}

impl PhaseReport {
    pub fn recovered_bytes(&self) -> Vec<u8> {
        self.lanes.iter().map(|r| r.best().guess as u8).collect()
    }

    /// Lanes assembled into a word, lane 0 least significant.
    pub fn recovered_word(&self) -> u64 {
        self.recovered_bytes()
            .iter()
            .enumerate()
            .fold(0, |w, (i, &b)| w | (b as u64) << (8 * i))
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.lanes.iter().map(KeyRanking::gap).collect()
    }

    pub fn median_gap(&self) -> f64 {
        let mut g = self.gaps();
        g.sort_by(f64::total_cmp);
        match g.len() {
            0 => 0.0,
            n if n % 2 == 1 => g[n / 2],
            n => (g[n / 2 - 1] + g[n / 2]) / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub phases: Vec<PhaseReport>,
    pub recovered_key: Block128,
    /// Only known when the harness supplies the true key.
    pub success: Option<bool>,
    /// Free-form header lines, e.g. the command line that produced the run.
    pub notes: Vec<String>,
}

impl AttackReport {
    pub fn grade(&mut self, true_key: &Block128) {
        for p in &mut self.phases {
            let expected = p.target.expected_bytes(true_key);
            p.correct = Some(p.recovered_bytes().iter().zip(&expected).map(|(a, b)| a == b).collect());
        }
        self.success = Some(self.recovered_key == *true_key);
    }

    /// Correct lanes over all phases, once graded.
    pub fn lanes_correct(&self) -> Option<(usize, usize)> {
        let mut ok = 0;
        let mut total = 0;
        for p in &self.phases {
            let c = p.correct.as_ref()?;
            ok += c.iter().filter(|&&x| x).count();
            total += c.len();
        }
        Some((ok, total))
    }

    pub fn low_confidence(&self) -> bool {
        self.phases.iter().any(|p| p.low_confidence)
    }

    pub fn total_traces(&self) -> usize {
        self.phases.iter().map(|p| p.traces).sum()
    }

    /// Fixed-width table: one column per lane, one row per rank.
    pub fn render_table(&self, rows: usize) -> String {
        const CELL: usize = 12;
        let mut s = String::new();
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        for p in &self.phases {
            let _ = writeln!(
                s,
                "{} ({}), {} traces, {:.3} s{}",
                p.target.name(),
                p.selection,
                p.traces,
                p.elapsed.as_secs_f64(),
                if p.low_confidence { ", LOW CONFIDENCE" } else { "" }
            );
            let _ = write!(s, "{:>6}", "rank");
            for lane in 0..p.lanes.len() {
                let _ = write!(s, "{:>CELL$}", format!("lane {lane}"));
            }
            s.push('\n');
            for r in 0..rows {
                let _ = write!(s, "{:>6}", r + 1);
                for lane in &p.lanes {
                    let cell = match lane.entries().get(r) {
                        Some(e) => format!("{:02x} {:+.4}", e.guess, e.score),
                        None => "-".into(),
                    };
                    let _ = write!(s, "{cell:>CELL$}");
                }
                s.push('\n');
            }
            let _ = write!(s, "{:>6}", "gap");
            for g in p.gaps() {
                let _ = write!(s, "{:>CELL$}", format!("{g:.4}"));
            }
            s.push('\n');
            if let Some(c) = &p.correct {
                let _ = write!(s, "{:>6}", "ok");
                for &x in c {
                    let _ = write!(s, "{:>CELL$}", if x { "yes" } else { "NO" });
                }
                s.push('\n');
            }
            s.push('\n');
        }
        let _ = writeln!(s, "recovered key: {}", self.recovered_key);
        if let Some((ok, total)) = self.lanes_correct() {
            let _ = writeln!(s, "lanes correct: {ok}/{total}");
        }
        if let Some(ok) = self.success {
            let _ = writeln!(s, "success: {}", if ok { "yes" } else { "no" });
        }
        s
    }

    /// Every ranked guess of every lane.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "phase,lane,rank,guess,score,peak_sample")?;
        for p in &self.phases {
            for (lane, r) in p.lanes.iter().enumerate() {
                for (rank, e) in r.entries().iter().enumerate() {
                    writeln!(
                        out,
                        "{},{lane},{},{},{},{}",
                        p.target.name(),
                        rank + 1,
                        e.guess,
                        e.score,
                        e.peak_sample
                    )?;
                }
            }
        }
        Ok(())
    }
}
