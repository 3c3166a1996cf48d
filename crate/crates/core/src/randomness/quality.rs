use std::io::{self, Write};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

pub const DEFAULT_SIGNIFICANCE: f64 = 0.01;
pub const DEFAULT_FLATNESS_THRESHOLD: f64 = 10.0;
const MIN_SPECTRAL_SAMPLES: usize = 256;

/// Equal-width bin counts over `[lo, hi]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.bins() as f64;
        (self.lo + w * i as f64, self.lo + w * (i + 1) as f64)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "bin_start,bin_end,count")?;
        for (i, c) in self.counts.iter().enumerate() {
            let (a, b) = self.bin_edges(i);
            writeln!(out, "{a},{b},{c}")?;
        }
        Ok(())
    }
}

/// Histogram over the observed value range. A constant input lands in bin 0.
pub fn histogram(samples: &[f64], bins: usize) -> Result<Histogram> {
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if samples.is_empty() {
        return histogram_in(samples, bins, 0.0, 1.0);
    }
    histogram_in(samples, bins, lo, hi)
}

/// Histogram over an explicit range. Values outside it are an error so the
/// counts always sum to the sample count.
pub fn histogram_in(samples: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::config("histogram needs at least one bin"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::config(format!("bad histogram range [{lo}, {hi}]")));
    }
    let mut counts = vec![0u64; bins];
    let width = (hi - lo) / bins as f64;
    for &v in samples {
        if !(lo..=hi).contains(&v) {
            return Err(Error::InvalidOperand(format!("value {v} outside [{lo}, {hi}]")));
        }
        let i = if width > 0.0 { (((v - lo) / width) as usize).min(bins - 1) } else { 0 };
        counts[i] += 1;
    }
    Ok(Histogram { lo, hi, counts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub critical: f64,
    pub significance: f64,
    pub pass: bool,
    pub histogram: Histogram,
}

impl std::fmt::Display for ChiSquareReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "chi-square {:.3} (df {}, critical {:.3} at {}) {}",
            self.statistic,
            self.degrees_of_freedom,
            self.critical,
            self.significance,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Upper critical value of the chi-square distribution.
pub fn chi_square_critical(df: usize, significance: f64) -> Result<f64> {
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::config(format!("significance {significance} outside (0, 1)")));
    }
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::config(e.to_string()))?;
    Ok(dist.inverse_cdf(1.0 - significance))
}

/// Pearson goodness of fit against the uniform distribution on `[lo, hi]`.
pub fn chi_square_uniformity(
    samples: &[f64],
    bins: usize,
    lo: f64,
    hi: f64,
    significance: f64,
) -> Result<ChiSquareReport> {
    if bins < 2 {
        return Err(Error::config("chi-square needs at least two bins"));
    }
    if samples.len() < 10 * bins {
        return Err(Error::InsufficientData { needed: 10 * bins, got: samples.len() });
    }
    let histogram = histogram_in(samples, bins, lo, hi)?;
    let expected = samples.len() as f64 / bins as f64;
    let statistic = histogram
        .counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum::<f64>();
    let df = bins - 1;
    let critical = chi_square_critical(df, significance)?;
    Ok(ChiSquareReport {
        statistic,
        degrees_of_freedom: df,
        critical,
        significance,
        pass: statistic < critical,
        histogram,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Largest over mean magnitude, DC excluded.
    pub metric: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Magnitudes of frequency bins `1..=len/2`.
    pub magnitudes: Vec<f64>,
}

impl SpectralReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "frequency_index,magnitude")?;
        for (i, m) in self.magnitudes.iter().enumerate() {
            writeln!(out, "{},{m}", i + 1)?;
        }
        Ok(())
    }
}

impl std::fmt::Display for SpectralReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "spectral max/mean {:.3} (threshold {}) {}",
            self.metric,
            self.threshold,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

pub fn spectral_flatness(samples: &[f64]) -> Result<SpectralReport> {
    spectral_flatness_with(samples, DEFAULT_FLATNESS_THRESHOLD)
}

/// A constant input has no spectrum outside DC and scores infinity.
pub fn spectral_flatness_with(samples: &[f64], threshold: f64) -> Result<SpectralReport> {
    if samples.len() < MIN_SPECTRAL_SAMPLES {
        return Err(Error::InsufficientData { needed: MIN_SPECTRAL_SAMPLES, got: samples.len() });
    }
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    let magnitudes: Vec<f64> = buf[1..=samples.len() / 2].iter().map(|c| c.norm()).collect();
    let constant = samples.iter().all(|&v| v == samples[0]);
    let metric = if constant {
        f64::INFINITY
    } else {
        let mean = magnitudes.iter().sum::<f64>() / magnitudes.len() as f64;
        magnitudes.iter().copied().fold(0.0, f64::max) / mean
    };
    Ok(SpectralReport { metric, threshold, pass: metric < threshold, magnitudes })
}
