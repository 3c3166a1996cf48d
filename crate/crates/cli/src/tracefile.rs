//! Binary trace-set files.
//!
//! Layout, all integers little-endian:
//!
//! | field             | type      |
//! |-------------------|-----------|
//! | magic             | `b"SCAT"` |
//! | version           | u16 = 1   |
//! | cipher id         | u8        |
//! | data length       | u16 = 16  |
//! | trace count       | u32       |
//! | samples per trace | u32       |
//!
//! followed by one record per trace: 16 plaintext bytes, then the samples
//! as IEEE-754 binary32. Keys are never stored.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use tracelab_core::cipher::Block128;
use tracelab_core::leakage::{CipherId, PowerTrace, TraceSet};

pub const MAGIC: [u8; 4] = *b"SCAT";
pub const VERSION: u16 = 1;
pub const DATA_LEN: u16 = 16;
pub const HEADER_LEN: usize = 17;

#[derive(Debug, thiserror::Error)]
pub enum TraceFileError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("corrupt trace file at byte {offset}: {reason}")]
    Corrupt { offset: u64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub cipher: CipherId,
    pub num_traces: u32,
    pub samples_per_trace: u32,
}

impl Header {
    pub fn record_len(&self) -> usize {
        DATA_LEN as usize + 4 * self.samples_per_trace as usize
    }

    pub fn file_len(&self) -> u64 {
        HEADER_LEN as u64 + self.num_traces as u64 * self.record_len() as u64
    }
}

pub fn encode(set: &TraceSet) -> Result<Vec<u8>, TraceFileError> {
    let m = set.samples_per_trace();
    let (Ok(n32), Ok(m32)) = (u32::try_from(set.len()), u32::try_from(m)) else {
        return Err(TraceFileError::Format("trace set too large for the file format".into()));
    };
    let header = Header { cipher: set.cipher, num_traces: n32, samples_per_trace: m32 };
    let mut out = Vec::with_capacity(header.file_len() as usize);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(set.cipher as u8);
    out.extend_from_slice(&DATA_LEN.to_le_bytes());
    out.extend_from_slice(&n32.to_le_bytes());
    out.extend_from_slice(&m32.to_le_bytes());
    for t in &set.traces {
        out.extend_from_slice(&t.plaintext.0);
        for s in &t.samples {
            out.extend_from_slice(&s.to_le_bytes());
        }
    }
    Ok(out)
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

pub fn decode_header(bytes: &[u8]) -> Result<Header, TraceFileError> {
    let probe = bytes.len().min(4);
    if bytes[..probe] != MAGIC[..probe] {
        return Err(TraceFileError::Format("bad magic, not a trace-set file".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(TraceFileError::Corrupt {
            offset: bytes.len() as u64,
            reason: format!("header needs {HEADER_LEN} bytes"),
        });
    }
    let version = u16_at(bytes, 4);
    if version != VERSION {
        return Err(TraceFileError::Format(format!("unsupported version {version}")));
    }
    let cipher = CipherId::from_u8(bytes[6])
        .ok_or_else(|| TraceFileError::Format(format!("unknown cipher id {}", bytes[6])))?;
    let data_len = u16_at(bytes, 7);
    if data_len != DATA_LEN {
        return Err(TraceFileError::Format(format!("data length {data_len}, expected {DATA_LEN}")));
    }
    let header = Header { cipher, num_traces: u32_at(bytes, 9), samples_per_trace: u32_at(bytes, 13) };
    if header.num_traces == 0 || header.samples_per_trace == 0 {
        return Err(TraceFileError::Format("trace set is empty".into()));
    }
    Ok(header)
}

pub fn decode(bytes: &[u8]) -> Result<TraceSet, TraceFileError> {
    let header = decode_header(bytes)?;
    let expected = header.file_len();
    let actual = bytes.len() as u64;
    if actual < expected {
        let record = (actual - HEADER_LEN as u64) / header.record_len() as u64;
        return Err(TraceFileError::Corrupt {
            offset: actual,
            reason: format!(
                "payload truncated in trace record {record}; header promises {} traces ({expected} bytes)",
                header.num_traces
            ),
        });
    }
    if actual > expected {
        return Err(TraceFileError::Corrupt { offset: expected, reason: "trailing data after last record".into() });
    }
    let traces = bytes[HEADER_LEN..]
        .chunks_exact(header.record_len())
        .map(|rec| {
            let (pt, samples) = rec.split_at(DATA_LEN as usize);
            PowerTrace {
                plaintext: Block128(pt.try_into().unwrap()),
                samples: samples.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect(),
            }
        })
        .collect();
    TraceSet::new(header.cipher, traces).map_err(|e| TraceFileError::Format(e.to_string()))
}

pub fn write_trace_set(set: &TraceSet, path: &Path) -> Result<(), TraceFileError> {
    let bytes = encode(set)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    f.sync_all()?;
    Ok(())
}

pub fn read_trace_set(path: &Path) -> Result<TraceSet, TraceFileError> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tracelab_core::leakage::{random_plaintexts, synthesize_trace_set, ScheduleProfile, SynthConfig};

    fn sample_set() -> TraceSet {
        let cfg = SynthConfig::new(ScheduleProfile::AES_FULL, Block128([3; 16]));
        let mut s = synthesize_trace_set(&cfg, &random_plaintexts(1, 5), 1).unwrap();
        s.meta = None;
        s
    }

    #[test]
    fn header_bytes() {
        let b = encode(&sample_set()).unwrap();
        assert_eq!(&b[..4], b"SCAT");
        assert_eq!(&b[4..6], &[1, 0]);
        assert_eq!(b[6], 0);
        assert_eq!(&b[7..9], &[16, 0]);
        assert_eq!(&b[9..13], &[5, 0, 0, 0]);
        assert_eq!(&b[13..17], &[0, 1, 0, 0]);
        assert_eq!(b.len(), 17 + 5 * (16 + 4 * 256));
    }

    #[test]
    fn round_trip() {
        let s = sample_set();
        let b = encode(&s).unwrap();
        let back = decode(&b).unwrap();
        assert_eq!(back, s);
        assert_eq!(encode(&back).unwrap(), b);
    }

    #[test]
    fn malformed_inputs() {
        let b = encode(&sample_set()).unwrap();
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(TraceFileError::Format(_))));
        let mut bad = b.clone();
        bad[4] = 2;
        assert!(matches!(decode(&bad), Err(TraceFileError::Format(_))));
        let mut bad = b.clone();
        bad[6] = 9;
        assert!(matches!(decode(&bad), Err(TraceFileError::Format(_))));
        assert!(matches!(decode(&b[..10]), Err(TraceFileError::Corrupt { offset: 10, .. })));
        assert!(matches!(decode(b""), Err(TraceFileError::Corrupt { offset: 0, .. })));
        let cut = b.len() - 7;
        assert!(matches!(decode(&b[..cut]), Err(TraceFileError::Corrupt { offset, .. }) if offset == cut as u64));
        let mut long = b.clone();
        long.push(0);
        assert!(matches!(decode(&long), Err(TraceFileError::Corrupt { offset, .. }) if offset == b.len() as u64));
    }
}
