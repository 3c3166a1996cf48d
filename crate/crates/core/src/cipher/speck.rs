//! Speck-128/128: 64-bit words, rotation amounts 8 and 3, 32 rounds.
//!
//! Key layout: K1 is the high word (key bytes 0..8), K2 the low word and the
//! first round key. Plaintext PT1 is the high word, PT2 the low word.

use super::limb::{LimbInt, LimbWidth, RotateDirection};

pub const SPECK128_ROUNDS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeckKeySchedule {
    pub round_keys: [u64; SPECK128_ROUNDS],
}

/// Expands (K1, K2). The round index is XORed into the `l` word each step,
/// as in the designers' reference code.
pub fn speck_key_schedule(k1: u64, k2: u64) -> SpeckKeySchedule {
    let mut round_keys = [0u64; SPECK128_ROUNDS];
    let (mut l, mut k) = (k1, k2);
    round_keys[0] = k;
    for i in 0..SPECK128_ROUNDS - 1 {
        l = l.rotate_right(8).wrapping_add(k) ^ i as u64;
        k = k.rotate_left(3) ^ l;
        round_keys[i + 1] = k;
    }
    SpeckKeySchedule { round_keys }
}

#[inline]
fn round(x: u64, y: u64, rk: u64) -> (u64, u64) {
    let x = x.rotate_right(8).wrapping_add(y) ^ rk;
    let y = y.rotate_left(3) ^ x;
    (x, y)
}

pub fn speck128_encrypt(pt1: u64, pt2: u64, schedule: &SpeckKeySchedule) -> (u64, u64) {
    schedule
        .round_keys
        .iter()
        .fold((pt1, pt2), |(x, y), &rk| round(x, y, rk))
}

/// Same cipher computed on limb arrays, the way an 8- or 16-bit
/// microcontroller without native 64-bit words would run it.
pub fn speck128_encrypt_limbs(
    pt1: u64,
    pt2: u64,
    schedule: &SpeckKeySchedule,
    width: LimbWidth,
) -> (u64, u64) {
    let mut x = LimbInt::from_u64(pt1, width);
    let mut y = LimbInt::from_u64(pt2, width);
    for &rk in &schedule.round_keys {
        let rk = LimbInt::from_u64(rk, width);
        // Shapes always agree here, so the limb ops cannot fail.
        x = x
            .rotate(8, RotateDirection::Right)
            .and_then(|r| r.add(&y))
            .and_then(|s| s.xor(&rk))
            .expect("uniform limb width");
        y = y
            .rotate(3, RotateDirection::Left)
            .and_then(|r| r.xor(&x))
            .expect("uniform limb width");
    }
    (x.to_u64(), y.to_u64())
}

/// Inverts the first key-schedule step: from K' = round_keys[1] and K2
/// back to K1. Wrapping subtraction absorbs the carry lost in the forward
/// addition.
pub fn recover_k1(k_prime: u64, k2: u64) -> u64 {
    let d = k_prime ^ k2.rotate_left(3);
    let e = d.wrapping_sub(k2);
    e.rotate_left(8)
}

/// Round-1 intermediates: `t` is key independent, `r1 = t ^ K2`,
/// `y1 = ROL(pt2, 3) ^ r1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpeckRound1 {
    pub t: u64,
    pub r1: u64,
    pub y1: u64,
}

pub fn speck_round1_values(pt1: u64, pt2: u64, k2: u64) -> SpeckRound1 {
    let t = pt1.rotate_right(8).wrapping_add(pt2);
    let r1 = t ^ k2;
    let y1 = pt2.rotate_left(3) ^ r1;
    SpeckRound1 { t, r1, y1 }
}

/// The value XORed with K' in round 2; `R2 = u ^ K'`.
pub fn speck_round2_target(r1: u64, y1: u64) -> u64 {
    r1.rotate_right(8).wrapping_add(y1)
}
