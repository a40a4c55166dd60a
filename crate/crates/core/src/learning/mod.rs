//! Likelihood-table learning from one-bit pilots.
//!
//! Three learners share one pilot schedule: symbol `k` occupies slots
//! `k·N_tr .. (k+1)·N_tr`.
//!
//! * [`learn_naive`]: empirical +1 frequencies, zeros and ones kept.
//! * [`learn_dl`]: fixed Gaussian dither of known variance, then de-noising.
//! * [`learn_idl`]: the training block is cut into N sub-blocks; each
//!   component's dither variance grows by a fixed step after every sub-block
//!   that showed no sign change, and the refined probabilities of all
//!   sub-blocks are averaged.

mod denoise;
mod learners;
mod table;

pub use denoise::{denoise, Denoised};
pub use learners::{
    learn_dl, learn_dl_from, learn_idl, learn_naive, learn_naive_from, observe_idl,
    table_from_blocks, IdlObservation,
};
pub use table::LikelihoodTable;

use crate::error::{Error, Result};

/// Training parameters shared by the learners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// N_tr, pilot repetitions per symbol vector.
    pub reps_per_symbol: usize,
    /// N, number of sub-blocks (iDL only).
    pub num_subblocks: usize,
    /// Δσ_d², added to a component's dither variance after a constant sub-block.
    /// Dither variances are per real component.
    pub dither_step: f64,
    /// Dither variance at the start of every symbol's block.
    pub initial_dither_var: f64,
    /// N₀ used by the de-noising step, oracle or estimated.
    pub noise_power_for_denoise: f64,
    /// Clamp applied to p̂ before Φ⁻¹; `None` means 1 / (2 · sub-block length).
    pub clamp_epsilon: Option<f64>,
}

impl TrainConfig {
    /// iDL parameters with the initial dither variance at zero.
    pub fn idl(reps: usize, subblocks: usize, dither_step: f64, noise_power: f64) -> Self {
        Self {
            reps_per_symbol: reps,
            num_subblocks: subblocks,
            dither_step,
            initial_dither_var: 0.0,
            noise_power_for_denoise: noise_power,
            clamp_epsilon: None,
        }
    }

    /// Parameters for naive or fixed-dither learning (one block, no step).
    pub fn single_block(reps: usize, noise_power: f64) -> Self {
        Self::idl(reps, 1, 0.0, noise_power)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps_per_symbol == 0 || self.num_subblocks == 0 {
            return Err(Error::config("N_tr and N must be positive"));
        }
        if !self.reps_per_symbol.is_multiple_of(self.num_subblocks) {
            return Err(Error::config(format!(
                "N_tr = {} is not a multiple of N = {}",
                self.reps_per_symbol, self.num_subblocks
            )));
        }
        if !(self.dither_step >= 0.0 && self.initial_dither_var >= 0.0) {
            return Err(Error::config("dither variances must be nonnegative"));
        }
        if !(self.noise_power_for_denoise > 0.0 && self.noise_power_for_denoise.is_finite()) {
            return Err(Error::config("de-noising noise power must be positive"));
        }
        if let Some(eps) = self.clamp_epsilon {
            if !(eps > 0.0 && eps < 0.5) {
                return Err(Error::config(format!(
                    "clamp epsilon {eps} outside (0, 0.5)"
                )));
            }
        }
        Ok(())
    }

    /// N_tr^sub = N_tr / N.
    pub fn subblock_len(&self) -> usize {
        self.reps_per_symbol / self.num_subblocks
    }

    /// Clamp for estimates built from `samples` observations.
    pub fn clamp_for(&self, samples: usize) -> f64 {
        self.clamp_epsilon.unwrap_or(1.0 / (2.0 * samples as f64))
    }
}

/// Per-component dither variances σ_{d,i}² and update indicators 𝓘_i.
#[derive(Debug, Clone, PartialEq)]
pub struct DitherState {
    pub variances: Vec<f64>,
    pub indicators: Vec<u8>,
}

impl DitherState {
    pub fn new(components: usize, initial_var: f64) -> Self {
        Self {
            variances: vec![initial_var; components],
            indicators: vec![0; components],
        }
    }
}

/// The N_tr dithered one-bit observations of one symbol vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingBlock {
    pub symbol: usize,
    pub components: usize,
    /// N_tr × 2N_r, row-major, entries ±1.
    pub observations: Vec<i8>,
    /// N × 2N_r, the dither variance active while each sub-block was observed.
    pub per_subblock_variances: Vec<f64>,
}

impl TrainingBlock {
    pub fn reps(&self) -> usize {
        self.observations.len() / self.components
    }

    pub fn num_subblocks(&self) -> usize {
        self.per_subblock_variances.len() / self.components
    }

    pub fn subblock_len(&self) -> usize {
        self.reps() / self.num_subblocks()
    }

    /// Rows `n·len .. (n+1)·len` of the observation matrix.
    pub fn subblock(&self, n: usize) -> &[i8] {
        let w = self.subblock_len() * self.components;
        &self.observations[n * w..(n + 1) * w]
    }

    pub fn subblock_variances(&self, n: usize) -> &[f64] {
        &self.per_subblock_variances[n * self.components..(n + 1) * self.components]
    }

    /// Number of +1 entries at each component inside sub-block `n`.
    pub fn subblock_plus_counts(&self, n: usize) -> Vec<usize> {
        plus_counts(self.subblock(n), self.components)
    }

    /// Empirical +1 frequency of each component over the whole block.
    pub fn plus_frequency(&self) -> Vec<f64> {
        let reps = self.reps() as f64;
        plus_counts(&self.observations, self.components)
            .into_iter()
            .map(|c| c as f64 / reps)
            .collect()
    }
}

pub(crate) fn plus_counts(rows: &[i8], components: usize) -> Vec<usize> {
    let mut counts = vec![0usize; components];
    for row in rows.chunks_exact(components) {
        for (c, &y) in counts.iter_mut().zip(row) {
            *c += usize::from(y > 0);
        }
    }
    counts
}

/// Fraction of entries equal to +1.
pub fn empirical_plus_frequency(observations: &[i8]) -> Result<f64> {
    if observations.is_empty() {
        return Err(Error::contract("empirical frequency of an empty sequence"));
    }
    let plus = observations.iter().filter(|&&y| y > 0).count();
    Ok(plus as f64 / observations.len() as f64)
}

/// Mean over symbols of the number of components whose raw frequency is
/// exactly 0 or 1.
pub fn count_undertrained(raw_frequency: &[f64], components: usize) -> f64 {
    if raw_frequency.is_empty() || components == 0 {
        return 0.0;
    }
    let rows = raw_frequency.len() / components;
    let total: usize = raw_frequency
        .chunks_exact(components)
        .map(|row| row.iter().filter(|&&p| p == 0.0 || p == 1.0).count())
        .sum();
    total as f64 / rows as f64
}
