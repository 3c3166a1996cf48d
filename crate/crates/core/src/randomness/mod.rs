//! Seed generation from biased physical sources and the quality checks used
//! on it.
//!
//! A [`SeedSource`] simulates either a biased bit stream (digitized noise
//! pulses) or a clipped, quantized analog signal read through an ADC. Seeds
//! are assembled from several draws and XOR-folded to wash out the bias;
//! [`chi_square_uniformity`] and [`spectral_flatness`] judge the result.

mod quality;
mod source;

pub use quality::{
    chi_square_critical, chi_square_uniformity, histogram, histogram_in, spectral_flatness,
    spectral_flatness_with, ChiSquareReport, Histogram, SpectralReport, DEFAULT_FLATNESS_THRESHOLD,
    DEFAULT_SIGNIFICANCE,
};
pub use source::{
    assemble_seed_from_adc, assemble_seed_from_bits, fold_bias, AdcProfile, SeedSource,
    SourceKind, DEFAULT_ADC_FOLDS, DEFAULT_BIT_FOLDS,
};

pub use crate::rng::prng_next;
