//! Turbo equalization with soft-in soft-out decision feedback equalizers.
//!
//! The crate bundles everything needed to simulate a coded BPSK link over a
//! real-valued ISI channel and to equalize it iteratively:
//!
//! * [`signal`]: channel model, framing and convolution matrices.
//! * [`numerics`]: small SPD solves and cepstral spectral factorization.
//! * [`trellis`]: RSC code, BCJR decoder, BCJR channel equalizer, interleaver.
//! * [`dfe`]: MMSE linear and decision feedback equalizers with the
//!   conventional and the error-propagation-aware extrinsic LLR.
//! * [`bidfe`]: forward/backward DFE pair with correlation-aware LLR combining.
//! * [`analysis`]: infinite-length SNR and noise-correlation figures.
//! * [`harness`]: turbo loop, BER sweeps, EXIT charts, CSV output.

pub mod analysis;
pub mod bidfe;
pub mod dfe;
mod error;
pub mod harness;
pub mod llr;
pub mod numerics;
pub mod signal;
pub mod trellis;

pub use error::{Error, Result};
