//! Symbol-vector detectors for one-bit observations.
//!
//! Symbol indices are zero-based rows of a [`SymbolBook`](crate::model::SymbolBook).

mod ml;
mod zf;

use num_complex::Complex64;

pub use ml::{csi_table, ml_detect_csi, ml_detect_learned, LogLikelihoodScorer};
pub use zf::{zf_detect, ZfEqualizer};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub symbol_index: usize,
    /// Score of the winning candidate: log-likelihood for the ML detectors,
    /// negative squared distance to the equalized vector for ZF.
    pub log_likelihood: f64,
    pub per_user_symbols: Vec<Complex64>,
    /// Every candidate scored -inf; index 0 was returned by convention.
    pub degenerate: bool,
}
