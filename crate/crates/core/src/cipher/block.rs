use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// A 16-byte block or key. Hex I/O is lowercase, byte 0 first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Block128(pub [u8; 16]);

impl Block128 {
    pub const ZERO: Block128 = Block128([0; 16]);

    /// Parses 32 hex digits. Whitespace is ignored so keys can be written
    /// as space-separated byte lists ("67 76 89 ...").
    pub fn from_hex(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bytes = hex::decode(&compact).map_err(|e| Error::Hex(format!("{s:?}: {e}")))?;
        let arr: [u8; 16] = bytes
            .try_into()
            .map_err(|v: Vec<u8>| Error::Hex(format!("expected 16 bytes, got {}", v.len())))?;
        Ok(Block128(arr))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }

    /// Big-endian halves: bytes 0..8 are the high word (Speck PT1 / K1),
    /// bytes 8..16 the low word (PT2 / K2).
    pub fn words(&self) -> (u64, u64) {
        let hi = u64::from_be_bytes(self.0[..8].try_into().unwrap());
        let lo = u64::from_be_bytes(self.0[8..].try_into().unwrap());
        (hi, lo)
    }

    pub fn from_words(hi: u64, lo: u64) -> Self {
        let mut b = [0u8; 16];
        b[..8].copy_from_slice(&hi.to_be_bytes());
        b[8..].copy_from_slice(&lo.to_be_bytes());
        Block128(b)
    }
}

impl fmt::Display for Block128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Block128 {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Block128::from_hex(s)
    }
}

impl From<[u8; 16]> for Block128 {
    fn from(b: [u8; 16]) -> Self {
        Block128(b)
    }
}
