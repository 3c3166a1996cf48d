use std::ops::Range;
use std::str::FromStr;

use super::correlation::CorrelationMatrix;
use crate::{Error, Result};

/// How a guess's correlation trace is reduced to one peak score.
///
/// `Positive` takes the largest signed coefficient and is the default:
/// under XOR-type selection functions a guess and its bitwise complement
/// have exactly opposite coefficients, so only the sign separates them.
/// `Absolute` takes the largest magnitude, which tolerates an inverted
/// probe but cannot split complementary guesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarity {
    #[default]
    Positive,
    Absolute,
}

impl FromStr for Polarity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" | "pos" => Ok(Polarity::Positive),
            "absolute" | "abs" => Ok(Polarity::Absolute),
            _ => Err(Error::config(format!("unknown polarity {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuessScore {
    pub guess: usize,
    pub score: f64,
    /// Sample index where the peak occurs.
    pub peak_sample: usize,
}

/// Guesses ordered by descending peak score, ties to the smaller guess.
/// Guesses with no defined coefficient are left out.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyRanking {
    entries: Vec<GuessScore>,
}

impl KeyRanking {
    pub fn entries(&self) -> &[GuessScore] {
        &self.entries
    }

    pub fn best(&self) -> &GuessScore {
        &self.entries[0]
    }

    /// Best minus second-best score (the best score itself when only one
    /// guess is defined).
    pub fn gap(&self) -> f64 {
        match self.entries.as_slice() {
            [a, b, ..] => a.score - b.score,
            [a] => a.score,
            [] => 0.0,
        }
    }

    pub fn rank_of(&self, guess: usize) -> Option<usize> {
        self.entries.iter().position(|e| e.guess == guess)
    }

    pub fn score_of(&self, guess: usize) -> Option<&GuessScore> {
        self.entries.iter().find(|e| e.guess == guess)
    }

    /// Score of `guess` minus the best score among all other guesses.
    /// Positive exactly when `guess` ranks first with a strict lead.
    pub fn margin_of(&self, guess: usize) -> Option<f64> {
        let own = self.score_of(guess)?.score;
        let other = self.entries.iter().find(|e| e.guess != guess).map_or(0.0, |e| e.score);
        Some(own - other)
    }
}

pub fn rank_guesses(c: &CorrelationMatrix, polarity: Polarity) -> Result<KeyRanking> {
    rank_guesses_in(c, polarity, 0..c.samples())
}

/// Ranking restricted to the sample columns in `samples`.
pub fn rank_guesses_in(c: &CorrelationMatrix, polarity: Polarity, samples: Range<usize>) -> Result<KeyRanking> {
    if samples.end > c.samples() || samples.is_empty() {
        return Err(Error::config(format!(
            "sample window {samples:?} outside 0..{}",
            c.samples()
        )));
    }
    let mut entries: Vec<GuessScore> = (0..c.guesses())
        .filter_map(|g| {
            let row = &c.row(g)[samples.clone()];
            row.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_nan())
                .map(|(j, &v)| {
                    let s = match polarity {
                        Polarity::Positive => v,
                        Polarity::Absolute => v.abs(),
                    };
                    (j, s)
                })
                // first maximum wins on equal scores
                .fold(None, |best: Option<(usize, f64)>, (j, s)| match best {
                    Some((_, bs)) if bs >= s => best,
                    _ => Some((j, s)),
                })
                .map(|(j, s)| GuessScore { guess: g, score: s, peak_sample: samples.start + j })
        })
        .collect();
    if entries.is_empty() {
        return Err(Error::DegenerateData("every correlation coefficient is undefined".into()));
    }
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.guess.cmp(&b.guess)));
    Ok(KeyRanking { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpa::{pearson_correlate, HypothesisMatrix};

    // Guess 0 and 2 copy trace column 0 (an exact tie), guess 1 negates
    // column 1, guess 3 is constant, guess 4 is a noisy copy of column 1.
    fn surface() -> CorrelationMatrix {
        let w: Vec<Vec<f32>> = (0..16).map(|i| vec![(i % 5) as f32, (i * 3 % 7) as f32]).collect();
        let mut hv = Vec::new();
        for (i, r) in w.iter().enumerate() {
            hv.extend([r[0], -r[1], r[0], 1.0, r[1] + (i % 2) as f32]);
        }
        let h = HypothesisMatrix::from_values(16, 5, hv).unwrap();
        pearson_correlate(&w, &h).unwrap()
    }

    #[test]
    fn tie_breaks_to_smaller_guess_and_excludes_undefined() {
        let c = surface();
        let r = rank_guesses(&c, Polarity::Positive).unwrap();
        assert_eq!(r.entries().len(), 4, "guess 3 is constant");
        assert_eq!(r.best().guess, 0);
        assert_eq!(r.entries()[1].guess, 2);
        assert_eq!(r.gap(), 0.0);
        assert_eq!(r.best().peak_sample, 0);
        assert_eq!(r.entries()[2].guess, 4);
        assert_eq!(r.entries()[2].peak_sample, 1);
    }

    #[test]
    fn absolute_polarity_sees_negative_peaks() {
        let c = surface();
        let abs = rank_guesses(&c, Polarity::Absolute).unwrap();
        assert!((abs.score_of(1).unwrap().score - 1.0).abs() < 1e-9);
        let pos = rank_guesses(&c, Polarity::Positive).unwrap();
        assert!(pos.score_of(1).unwrap().score < 0.9);
    }

    #[test]
    fn window_restriction() {
        let c = surface();
        let r = rank_guesses_in(&c, Polarity::Positive, 1..2).unwrap();
        assert_eq!(r.best().guess, 4);
        assert!(rank_guesses_in(&c, Polarity::Positive, 1..3).is_err());
    }

    #[test]
    fn scaling_does_not_change_order() {
        let c = surface();
        let a = rank_guesses(&c, Polarity::Absolute).unwrap();
        let b = rank_guesses(&c.scaled(0.37), Polarity::Absolute).unwrap();
        let ga: Vec<_> = a.entries().iter().map(|e| e.guess).collect();
        let gb: Vec<_> = b.entries().iter().map(|e| e.guess).collect();
        assert_eq!(ga, gb);
    }

    #[test]
    fn single_defined_guess_ranks_first() {
        let w: Vec<Vec<f32>> = (0..8).map(|i| vec![i as f32]).collect();
        let mut hv = Vec::new();
        for i in 0..8 {
            hv.extend([1.0, (i * i) as f32, 2.0]);
        }
        let h = HypothesisMatrix::from_values(8, 3, hv).unwrap();
        let r = rank_guesses(&pearson_correlate(&w, &h).unwrap(), Polarity::Positive).unwrap();
        assert_eq!(r.entries().len(), 1);
        assert_eq!(r.best().guess, 1);
        assert_eq!(r.margin_of(1), Some(r.best().score));
    }

    #[test]
    fn all_undefined_is_degenerate() {
        let w: Vec<Vec<f32>> = (0..8).map(|_| vec![1.0, 2.0]).collect();
        let h = HypothesisMatrix::from_values(8, 2, (0..16).map(|x| x as f32).collect()).unwrap();
        let c = pearson_correlate(&w, &h).unwrap();
        assert!(matches!(rank_guesses(&c, Polarity::Positive), Err(Error::DegenerateData(_))));
    }
}
