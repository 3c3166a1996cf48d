use std::io::{self, Write};

use super::correlation::CpaAccumulator;
use super::ranking::{rank_guesses_in, KeyRanking};
use super::selection::{build_hypotheses, SelectionModel};
use super::CpaOptions;
use crate::leakage::{PowerTrace, TraceSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub count: usize,
    /// `None` when the first `count` traces are degenerate.
    pub ranking: Option<KeyRanking>,
}

/// Rankings of one lane on growing trace prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTrajectory {
    pub byte_index: usize,
    pub points: Vec<SweepPoint>,
}

impl SweepTrajectory {
    fn ranks_first(p: &SweepPoint, guess: usize) -> bool {
        p.ranking.as_ref().is_some_and(|r| r.best().guess == guess)
    }

    /// Smallest grid count from which `true_guess` ranks first at that point
    /// and every later one.
    pub fn minimal_stable(&self, true_guess: usize) -> Option<usize> {
        let mut stable_from = None;
        for p in &self.points {
            if Self::ranks_first(p, true_guess) {
                stable_from.get_or_insert(p.count);
            } else {
                stable_from = None;
            }
        }
        stable_from
    }

    pub fn scores_of(&self, guess: usize) -> Vec<Option<f64>> {
        self.points
            .iter()
            .map(|p| p.ranking.as_ref().and_then(|r| r.score_of(guess)).map(|s| s.score))
            .collect()
    }

    /// Rows are guesses, columns grid counts; missing scores are empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "guess")?;
        for p in &self.points {
            write!(out, ",{}", p.count)?;
        }
        writeln!(out)?;
        for g in 0..256 {
            write!(out, "{g}")?;
            for s in self.scores_of(g) {
                match s {
                    Some(v) => write!(out, ",{v}")?,
                    None => write!(out, ",")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Ascending counts from `start` to `end` (both included), each at least
/// `ratio` times the previous one and at least one larger.
pub fn geometric_grid(start: usize, end: usize, ratio: f64) -> Result<Vec<usize>> {
    if start == 0 || start > end || !(ratio > 1.0) {
        return Err(Error::config(format!("bad grid {start}..={end} with ratio {ratio}")));
    }
    let mut grid = vec![start];
    let mut x = start as f64;
    loop {
        x *= ratio;
        let last = *grid.last().unwrap();
        let next = (x.round() as usize).max(last + 1);
        if next >= end {
            break;
        }
        grid.push(next);
        x = x.max(next as f64);
    }
    if *grid.last().unwrap() != end {
        grid.push(end);
    }
    Ok(grid)
}

pub fn sweep_traces(
    traceset: &TraceSet,
    model: &SelectionModel,
    byte_index: usize,
    grid: &[usize],
) -> Result<SweepTrajectory> {
    sweep_traces_with(&traceset.traces, model, byte_index, grid, &CpaOptions::default())
}

/// Attacks the first `n` traces for each `n` in `grid`. A single
/// accumulator is fed in trace order, so the last point equals a direct
/// attack on the same prefix.
pub fn sweep_traces_with(
    traces: &[PowerTrace],
    model: &SelectionModel,
    byte_index: usize,
    grid: &[usize],
    opts: &CpaOptions,
) -> Result<SweepTrajectory> {
    let Some(&max) = grid.last() else {
        return Err(Error::config("sweep grid is empty"));
    };
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
        return Err(Error::config("sweep grid must be strictly ascending and positive"));
    }
    if max > traces.len() {
        return Err(Error::config(format!(
            "sweep grid reaches {max} traces but only {} are available",
            traces.len()
        )));
    }
    let m = traces[0].samples.len();
    let window = opts.samples.clone().unwrap_or(0..m);
    let mut acc = CpaAccumulator::new(m, 256);
    let mut done = 0;
    let mut points = Vec::with_capacity(grid.len());
    for &count in grid {
        let batch = &traces[done..count];
        let h = build_hypotheses(batch, model, byte_index)?;
        acc.update(batch, h.values(), opts.exec)?;
        done = count;
        let ranking = if count < 2 {
            None
        } else {
            match rank_guesses_in(&acc.correlation(), opts.polarity, window.clone()) {
                Ok(r) => Some(r),
                Err(Error::DegenerateData(_)) => None,
                Err(e) => return Err(e),
            }
        };
        points.push(SweepPoint { count, ranking });
    }
    Ok(SweepTrajectory { byte_index, points })
}

pub fn minimal_stable_traces(
    traceset: &TraceSet,
    model: &SelectionModel,
    byte_index: usize,
    grid: &[usize],
    true_guess: u8,
) -> Result<Option<usize>> {
    Ok(sweep_traces(traceset, model, byte_index, grid)?.minimal_stable(true_guess as usize))
}
