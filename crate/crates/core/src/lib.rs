//! Software side-channel laboratory for AES-128 and Speck-128/128.
//!
//! A Hamming-weight leakage simulator produces synthetic power traces from
//! cipher executions, and a correlation power analysis (CPA) engine recovers
//! keys from them. Countermeasures (random instruction injection, S-box
//! shuffling, low-pass filtering) act on the simulated traces so their cost
//! to the attacker can be measured.
//!
//! The heavy loops (trace synthesis, correlation accumulation, experiment
//! grids) run on rayon when the `parallel` feature is enabled and fall back
//! to plain iterators otherwise. [`Execution`] selects the path at runtime.

// `!(x > 0.0)` is how parameter checks reject NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod cipher;
pub mod cpa;
mod error;
mod exec;
pub mod leakage;
pub mod randomness;
pub mod rng;

pub use error::{Error, Result};
pub use exec::Execution;
