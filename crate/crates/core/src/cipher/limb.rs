//! Fixed-width multi-limb representation of a 64-bit word, as used by the
//! 8-bit and 16-bit Speck implementations.
//!
//! Limb 0 holds the most significant bits. Addition therefore walks from the
//! last index toward index 0, carrying into the left neighbour and dropping
//! the carry out of limb 0.

use std::fmt;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimbWidth {
    W8,
    W16,
}

impl LimbWidth {
    pub fn bits(self) -> u32 {
        match self {
            LimbWidth::W8 => 8,
            LimbWidth::W16 => 16,
        }
    }

    pub fn limbs_per_word(self) -> usize {
        (64 / self.bits()) as usize
    }

    pub fn mask(self) -> u16 {
        match self {
            LimbWidth::W8 => 0x00ff,
            LimbWidth::W16 => 0xffff,
        }
    }

    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            8 => Ok(LimbWidth::W8),
            16 => Ok(LimbWidth::W16),
            other => Err(Error::InvalidOperand(format!("unsupported limb width {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotateDirection {
    Left,
    Right,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LimbInt {
    limbs: [u16; 8],
    width: LimbWidth,
}

impl fmt::Debug for LimbInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LimbInt{:?}({:?})", self.width, self.limbs())
    }
}

impl LimbInt {
    pub fn from_u64(value: u64, width: LimbWidth) -> Self {
        let bits = width.bits();
        let n = width.limbs_per_word();
        let mut limbs = [0u16; 8];
        for (i, limb) in limbs.iter_mut().take(n).enumerate() {
            let shift = 64 - bits * (i as u32 + 1);
            *limb = ((value >> shift) as u16) & width.mask();
        }
        Self { limbs, width }
    }

    /// Builds from explicit limbs, most significant first.
    pub fn from_limbs(limbs: &[u16], width: LimbWidth) -> Result<Self> {
        if limbs.len() != width.limbs_per_word() {
            return Err(Error::InvalidOperand(format!(
                "{} limbs of {} bits do not make 64 bits",
                limbs.len(),
                width.bits()
            )));
        }
        if let Some(bad) = limbs.iter().find(|&&l| l & !width.mask() != 0) {
            return Err(Error::InvalidOperand(format!(
                "limb {bad:#x} exceeds {} bits",
                width.bits()
            )));
        }
        let mut out = [0u16; 8];
        out[..limbs.len()].copy_from_slice(limbs);
        Ok(Self { limbs: out, width })
    }

    pub fn to_u64(&self) -> u64 {
        let bits = self.width.bits();
        self.limbs()
            .iter()
            .fold(0u64, |acc, &l| (acc << bits) | l as u64)
    }

    pub fn limbs(&self) -> &[u16] {
        &self.limbs[..self.width.limbs_per_word()]
    }

    pub fn width(&self) -> LimbWidth {
        self.width
    }

    fn check_shape(&self, other: &LimbInt) -> Result<()> {
        if self.width != other.width {
            return Err(Error::InvalidOperand(format!(
                "limb width mismatch: {} vs {} bits",
                self.width.bits(),
                other.width.bits()
            )));
        }
        Ok(())
    }

    /// `(self + other) mod 2^64`, limb by limb with carry propagation.
    pub fn add(&self, other: &LimbInt) -> Result<LimbInt> {
        self.check_shape(other)?;
        let bits = self.width.bits();
        let mask = self.width.mask() as u32;
        let mut out = *self;
        let mut carry = 0u32;
        for i in (0..self.width.limbs_per_word()).rev() {
            let sum = self.limbs[i] as u32 + other.limbs[i] as u32 + carry;
            out.limbs[i] = (sum & mask) as u16;
            carry = sum >> bits;
        }
        Ok(out)
    }

    pub fn xor(&self, other: &LimbInt) -> Result<LimbInt> {
        self.check_shape(other)?;
        Ok(self.zip_with(other, |a, b| a ^ b))
    }

    fn or(&self, other: &LimbInt) -> LimbInt {
        self.zip_with(other, |a, b| a | b)
    }

    fn zip_with(&self, other: &LimbInt, f: impl Fn(u16, u16) -> u16) -> LimbInt {
        let mut out = *self;
        for (o, &b) in out.limbs.iter_mut().zip(&other.limbs) {
            *o = f(*o, b);
        }
        out
    }

    /// Logical shift toward the least significant end by `k` bits (k <= 64):
    /// whole limbs first, then the remaining bits with the spill of the more
    /// significant neighbour ORed in.
    fn shift_right(&self, k: u32) -> LimbInt {
        let n = self.width.limbs_per_word();
        let bits = self.width.bits();
        let mask = self.width.mask();
        let whole = ((k / bits) as usize).min(n);
        let rem = k % bits;
        let mut moved = [0u16; 8];
        moved[whole..n].copy_from_slice(&self.limbs[..n - whole]);
        let mut out = LimbInt { limbs: [0; 8], width: self.width };
        for i in 0..n {
            let mut v = moved[i] >> rem;
            if rem > 0 && i > 0 {
                v |= (moved[i - 1] << (bits - rem)) & mask;
            }
            out.limbs[i] = v & mask;
        }
        out
    }

    fn shift_left(&self, k: u32) -> LimbInt {
        let n = self.width.limbs_per_word();
        let bits = self.width.bits();
        let mask = self.width.mask();
        let whole = ((k / bits) as usize).min(n);
        let rem = k % bits;
        let mut moved = [0u16; 8];
        moved[..n - whole].copy_from_slice(&self.limbs[whole..n]);
        let mut out = LimbInt { limbs: [0; 8], width: self.width };
        for i in 0..n {
            let mut v = (moved[i] << rem) & mask;
            if rem > 0 && i + 1 < n {
                v |= moved[i + 1] >> (bits - rem);
            }
            out.limbs[i] = v;
        }
        out
    }

    /// Bit rotation as the OR of two opposite shifts. `r` must be below 64.
    pub fn rotate(&self, r: u32, direction: RotateDirection) -> Result<LimbInt> {
        if r >= 64 {
            return Err(Error::InvalidOperand(format!("rotation {r} out of range 0..64")));
        }
        Ok(match direction {
            RotateDirection::Right => self.shift_right(r).or(&self.shift_left(64 - r)),
            RotateDirection::Left => self.shift_left(r).or(&self.shift_right(64 - r)),
        })
    }
}
