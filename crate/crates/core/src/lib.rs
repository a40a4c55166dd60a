//! Learning-based one-bit maximum-likelihood detection for uplink massive
//! MIMO.
//!
//! The crate simulates a base station with one-bit ADCs on every real and
//! imaginary receive component. Instead of estimating the channel, the
//! receiver learns per-antenna likelihood tables from repeated pilots,
//! optionally mixing in Gaussian dither of known power and removing it
//! analytically afterwards. Learned tables then drive an exhaustive
//! maximum-likelihood search over all `M^{N_u}` symbol vectors.
//!
//! * [`model`]: constellations, symbol books, Rayleigh channels, one-bit quantization.
//! * [`normal`]: Φ, Φ⁻¹ and a tail-safe ln Φ.
//! * [`learning`]: naive, fixed-dither and incremental-dither table learning.
//! * [`detect`]: ML over learned tables, ML with CSI, one-bit zero-forcing.
//! * [`snr`]: a small MLP that estimates the SNR from one-bit pilots.
//! * [`harness`]: Monte Carlo SER and undertrained-count sweeps with CSV output.
//!
//! Runnable walkthroughs live in `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detect;
pub mod error;
pub mod harness;
pub mod learning;
pub mod model;
pub mod normal;
pub mod snr;

pub use error::{Error, Result};
