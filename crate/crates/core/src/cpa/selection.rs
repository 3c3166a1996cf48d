use std::fmt;
use std::str::FromStr;

use crate::cipher::{sbox, speck_round1_values, speck_round2_target, Block128};
use crate::leakage::{hamming_weight, PowerTrace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionKind {
    /// `SBOX(p_b ^ g)`
    AesSbox,
    /// `p_b ^ g`
    AesXor,
    /// `T_b ^ g` with `T = ROR(PT1, 8) + PT2`
    SpeckR1,
    /// `U_b ^ g` with `U = ROR(R1, 8) + Y1`, computed from a recovered K2
    SpeckR2,
}

impl SelectionKind {
    pub fn name(self) -> &'static str {
        match self {
            SelectionKind::AesSbox => "aes-sbox",
            SelectionKind::AesXor => "aes-xor",
            SelectionKind::SpeckR1 => "speck-r1",
            SelectionKind::SpeckR2 => "speck-r2",
        }
    }
}

impl fmt::Display for SelectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aes-sbox" | "sbox" => Ok(SelectionKind::AesSbox),
            "aes-xor" | "xor" => Ok(SelectionKind::AesXor),
            "speck-r1" => Ok(SelectionKind::SpeckR1),
            "speck-r2" => Ok(SelectionKind::SpeckR2),
            _ => Err(Error::config(format!("unknown selection function {s:?}"))),
        }
    }
}

/// Selection function `I = f(d, k)` plus whatever recovered key material
/// it needs to compute its key-independent operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionModel {
    pub kind: SelectionKind,
    /// Phase-1 K2, required by [`SelectionKind::SpeckR2`].
    pub k2: Option<u64>,
}

impl SelectionModel {
    pub fn new(kind: SelectionKind) -> Self {
        Self { kind, k2: None }
    }

    pub fn aes_sbox() -> Self {
        Self::new(SelectionKind::AesSbox)
    }

    pub fn aes_xor() -> Self {
        Self::new(SelectionKind::AesXor)
    }

    pub fn speck_r1() -> Self {
        Self::new(SelectionKind::SpeckR1)
    }

    pub fn speck_r2(k2: u64) -> Self {
        Self { kind: SelectionKind::SpeckR2, k2: Some(k2) }
    }

    /// Number of 8-bit subkeys the model attacks.
    pub fn lanes(&self) -> usize {
        match self.kind {
            SelectionKind::AesSbox | SelectionKind::AesXor => 16,
            SelectionKind::SpeckR1 | SelectionKind::SpeckR2 => 8,
        }
    }

    fn check(&self, byte_index: usize) -> Result<()> {
        if byte_index >= self.lanes() {
            return Err(Error::config(format!(
                "byte index {byte_index} out of range for {} ({} lanes)",
                self.kind,
                self.lanes()
            )));
        }
        if self.kind == SelectionKind::SpeckR2 && self.k2.is_none() {
            return Err(Error::config("speck-r2 selection needs the phase-1 K2"));
        }
        Ok(())
    }

    /// Key-independent operand byte of lane `byte_index` for `plaintext`.
    /// Speck lane 0 is the least significant byte of the 64-bit word.
    pub fn operand(&self, plaintext: &Block128, byte_index: usize) -> Result<u8> {
        self.check(byte_index)?;
        Ok(self.operand_unchecked(plaintext, byte_index))
    }

    fn operand_unchecked(&self, plaintext: &Block128, byte_index: usize) -> u8 {
        let lane = |w: u64| (w >> (8 * byte_index)) as u8;
        match self.kind {
            SelectionKind::AesSbox | SelectionKind::AesXor => plaintext.0[byte_index],
            SelectionKind::SpeckR1 => {
                let (p1, p2) = plaintext.words();
                lane(speck_round1_values(p1, p2, 0).t)
            }
            SelectionKind::SpeckR2 => {
                let (p1, p2) = plaintext.words();
                let r = speck_round1_values(p1, p2, self.k2.unwrap_or(0));
                lane(speck_round2_target(r.r1, r.y1))
            }
        }
    }

    /// Predicted intermediate from operand and subkey guess.
    #[inline]
    pub fn combine(&self, operand: u8, guess: u8) -> u8 {
        match self.kind {
            SelectionKind::AesSbox => sbox(operand ^ guess),
            _ => operand ^ guess,
        }
    }
}

pub fn apply_selection(
    model: &SelectionModel,
    plaintext: &Block128,
    guess: u8,
    byte_index: usize,
) -> Result<u8> {
    Ok(model.combine(model.operand(plaintext, byte_index)?, guess))
}

/// Hypothetical leakage, `rows x guesses`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisMatrix {
    rows: usize,
    guesses: usize,
    values: Vec<f32>,
    pub byte_index: usize,
}

impl HypothesisMatrix {
    pub fn from_values(rows: usize, guesses: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != rows * guesses || guesses == 0 {
            return Err(Error::InvalidOperand(format!(
                "{} values do not form a {rows}x{guesses} matrix",
                values.len()
            )));
        }
        Ok(Self { rows, guesses, values, byte_index: 0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn guesses(&self) -> usize {
        self.guesses
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.guesses..(i + 1) * self.guesses]
    }

    pub fn get(&self, row: usize, guess: usize) -> f32 {
        self.values[row * self.guesses + guess]
    }
}

/// `h[i][g] = HW(f(d_i, g))` for all 256 guesses.
pub fn build_hypotheses(
    traces: &[PowerTrace],
    model: &SelectionModel,
    byte_index: usize,
) -> Result<HypothesisMatrix> {
    model.check(byte_index)?;
    let mut values = Vec::with_capacity(traces.len() * 256);
    for t in traces {
        let d = model.operand_unchecked(&t.plaintext, byte_index);
        values.extend((0..=255u8).map(|g| hamming_weight(model.combine(d, g) as u64) as f32));
    }
    Ok(HypothesisMatrix { rows: traces.len(), guesses: 256, values, byte_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::speck_key_schedule;
    use crate::leakage::random_plaintexts;
    use crate::rng::Xorshift64Star;

    #[test]
    fn trivial_selection_values() {
        let mut p = Block128::ZERO;
        p.0[4] = 0x3c;
        assert_eq!(apply_selection(&SelectionModel::aes_xor(), &p, 0x3c, 4).unwrap(), 0);
        assert_eq!(apply_selection(&SelectionModel::aes_sbox(), &Block128::ZERO, 0, 0).unwrap(), 0x63);
    }

    #[test]
    fn missing_context_and_bad_lane() {
        let m = SelectionModel::new(SelectionKind::SpeckR2);
        assert!(matches!(apply_selection(&m, &Block128::ZERO, 0, 0), Err(Error::Config(_))));
        assert!(matches!(apply_selection(&SelectionModel::speck_r1(), &Block128::ZERO, 0, 8), Err(Error::Config(_))));
        assert!(matches!("aes-mul".parse::<SelectionKind>(), Err(Error::Config(_))));
    }

    #[test]
    fn speck_selections_match_cipher_intermediates() {
        let mut g = Xorshift64Star::new(8);
        for p in random_plaintexts(44, 1000) {
            let (k1, k2) = (g.next_u64(), g.next_u64());
            let (p1, p2) = p.words();
            let r = speck_round1_values(p1, p2, k2);
            let kp = speck_key_schedule(k1, k2).round_keys[1];
            let r2 = speck_round2_target(r.r1, r.y1) ^ kp;
            let r1_model = SelectionModel::speck_r1();
            let r2_model = SelectionModel::speck_r2(k2);
            for b in 0..8 {
                let kb = (k2 >> (8 * b)) as u8;
                assert_eq!(apply_selection(&r1_model, &p, kb, b).unwrap(), (r.r1 >> (8 * b)) as u8);
                let kpb = (kp >> (8 * b)) as u8;
                assert_eq!(apply_selection(&r2_model, &p, kpb, b).unwrap(), (r2 >> (8 * b)) as u8);
            }
        }
    }

    fn trace(p: Block128) -> PowerTrace {
        PowerTrace { samples: vec![0.0], plaintext: p }
    }

    #[test]
    fn single_zero_plaintext_row_is_weight_of_guess() {
        let h = build_hypotheses(&[trace(Block128::ZERO)], &SelectionModel::aes_xor(), 0).unwrap();
        for g in 0..256 {
            assert_eq!(h.get(0, g), (g as u8).count_ones() as f32);
        }
    }

    #[test]
    fn identical_plaintexts_give_identical_rows() {
        let p = random_plaintexts(1, 1)[0];
        let h = build_hypotheses(&[trace(p), trace(p), trace(p)], &SelectionModel::aes_sbox(), 5).unwrap();
        assert_eq!(h.row(0), h.row(1));
        assert_eq!(h.row(1), h.row(2));
    }

    #[test]
    fn hypotheses_match_naive_recomputation() {
        let traces: Vec<_> = random_plaintexts(2, 50).into_iter().map(trace).collect();
        let model = SelectionModel::aes_sbox();
        let h = build_hypotheses(&traces, &model, 9).unwrap();
        let mut g = Xorshift64Star::new(6);
        for _ in 0..500 {
            let i = g.below(50) as usize;
            let guess = g.below(256) as usize;
            let naive = sbox(traces[i].plaintext.0[9] ^ guess as u8).count_ones() as f32;
            assert_eq!(h.get(i, guess), naive);
        }
    }
}
