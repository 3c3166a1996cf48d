use std::io::{self, Write};

use super::selection::HypothesisMatrix;
use crate::{Error, Execution, Result};

/// Relative threshold under which a variance term counts as zero.
const ZERO_VARIANCE: f64 = 1e-12;

/// Streaming form of the sample Pearson coefficient, built from the five
/// sums `ΣW, ΣW², ΣH, ΣH², ΣWH`.
///
/// The canonical accumulation order is ascending trace index. The parallel
/// path splits work over guesses only, so every sum is still accumulated in
/// that order and results are bit-identical to the sequential path.
#[derive(Debug, Clone, PartialEq)]
pub struct CpaAccumulator {
    samples: usize,
    guesses: usize,
    count: usize,
    sum_w: Vec<f64>,
    sum_w2: Vec<f64>,
    sum_h: Vec<f64>,
    sum_h2: Vec<f64>,
    sum_wh: Vec<f64>,
}

impl CpaAccumulator {
    pub fn new(samples: usize, guesses: usize) -> Self {
        Self {
            samples,
            guesses,
            count: 0,
            sum_w: vec![0.0; samples],
            sum_w2: vec![0.0; samples],
            sum_h: vec![0.0; guesses],
            sum_h2: vec![0.0; guesses],
            sum_wh: vec![0.0; samples * guesses],
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Folds in a batch of traces; `hyp` holds `rows.len() x guesses`
    /// hypothesis values, row-major.
    pub fn update<R: AsRef<[f32]> + Sync>(&mut self, rows: &[R], hyp: &[f32], exec: Execution) -> Result<()> {
        let (m, k) = (self.samples, self.guesses);
        if hyp.len() != rows.len() * k {
            return Err(Error::InvalidOperand(format!(
                "{} hypothesis values for {} traces x {k} guesses",
                hyp.len(),
                rows.len()
            )));
        }
        if let Some(bad) = rows.iter().position(|r| r.as_ref().len() != m) {
            return Err(Error::InvalidOperand(format!(
                "trace {bad} has {} samples, expected {m}",
                rows[bad].as_ref().len()
            )));
        }
        for (i, r) in rows.iter().enumerate() {
            for (j, &w) in r.as_ref().iter().enumerate() {
                let w = w as f64;
                self.sum_w[j] += w;
                self.sum_w2[j] += w * w;
            }
            for (g, &h) in hyp[i * k..(i + 1) * k].iter().enumerate() {
                let h = h as f64;
                self.sum_h[g] += h;
                self.sum_h2[g] += h * h;
            }
        }
        exec.for_each_row(&mut self.sum_wh, m, |g, acc| {
            for (i, r) in rows.iter().enumerate() {
                let h = hyp[i * k + g] as f64;
                if h == 0.0 {
                    continue;
                }
                for (a, &w) in acc.iter_mut().zip(r.as_ref()) {
                    *a += h * w as f64;
                }
            }
        });
        self.count += rows.len();
        Ok(())
    }

    /// Current correlation estimate. Entries whose trace column or guess has
    /// zero variance are undefined (NaN).
    pub fn correlation(&self) -> CorrelationMatrix {
        let n = self.count as f64;
        let var = |s: f64, s2: f64| {
            let d = n * s2 - s * s;
            if d <= ZERO_VARIANCE * n * s2.abs() {
                None
            } else {
                Some(d)
            }
        };
        let col_var: Vec<Option<f64>> =
            (0..self.samples).map(|j| var(self.sum_w[j], self.sum_w2[j])).collect();
        let mut values = vec![f64::NAN; self.samples * self.guesses];
        for g in 0..self.guesses {
            let Some(dh) = var(self.sum_h[g], self.sum_h2[g]) else {
                continue;
            };
            let row = &mut values[g * self.samples..(g + 1) * self.samples];
            for (j, out) in row.iter_mut().enumerate() {
                if let Some(dw) = col_var[j] {
                    let num = n * self.sum_wh[g * self.samples + j] - self.sum_w[j] * self.sum_h[g];
                    *out = (num / (dw * dh).sqrt()).clamp(-1.0, 1.0);
                }
            }
        }
        CorrelationMatrix { guesses: self.guesses, samples: self.samples, values }
    }
}

/// `guesses x samples` correlation surface; NaN marks undefined entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    guesses: usize,
    samples: usize,
    values: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn guesses(&self) -> usize {
        self.guesses
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn get(&self, guess: usize, sample: usize) -> Option<f64> {
        let v = self.values[guess * self.samples + sample];
        (!v.is_nan()).then_some(v)
    }

    /// Row-major values including NaN markers.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Raw row including NaN markers.
    pub fn row(&self, guess: usize) -> &[f64] {
        &self.values[guess * self.samples..(guess + 1) * self.samples]
    }

    pub fn scaled(&self, factor: f64) -> CorrelationMatrix {
        CorrelationMatrix {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// One row per guess, header of sample indices; undefined entries empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "guess")?;
        for j in 0..self.samples {
            write!(out, ",{j}")?;
        }
        writeln!(out)?;
        for g in 0..self.guesses {
            write!(out, "{g}")?;
            for &v in self.row(g) {
                if v.is_nan() {
                    write!(out, ",")?;
                } else {
                    write!(out, ",{v}")?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn pearson_correlate<R: AsRef<[f32]> + Sync>(rows: &[R], h: &HypothesisMatrix) -> Result<CorrelationMatrix> {
    pearson_correlate_with(rows, h, Execution::default())
}

pub fn pearson_correlate_with<R: AsRef<[f32]> + Sync>(
    rows: &[R],
    h: &HypothesisMatrix,
    exec: Execution,
) -> Result<CorrelationMatrix> {
    if rows.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: rows.len() });
    }
    if rows.len() != h.rows() {
        return Err(Error::InvalidOperand(format!(
            "{} traces but {} hypothesis rows",
            rows.len(),
            h.rows()
        )));
    }
    let mut acc = CpaAccumulator::new(rows[0].as_ref().len(), h.guesses());
    acc.update(rows, h.values(), exec)?;
    Ok(acc.correlation())
}
