//! SNR estimation from one-bit pilots.
//!
//! A small regression MLP maps per-component pilot statistics to γ̂ in dB,
//! from which the receiver derives N̂₀ = ρ / 10^{γ̂/10} for de-noising.
//!
//! The features come from the first sub-block of every symbol's training
//! block, which is observed without dither. For component i with +1
//! frequencies f_{k,i} over n samples,
//!
//! ```text
//! feature_i = 1/2 + sqrt(max(0, mean_k (f_{k,i} - 1/2)^2 - 1/(4n)))
//! ```
//!
//! The 1/(4n) term removes the sampling spread of a fair coin, so pure noise
//! maps to about 1/2 and a noiseless component maps to 1.

mod mlp;

pub use mlp::{mlp_train, Activation, Gradients, Layer, MlpParams, TrainHyperparams, TrainReport};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::learning::{observe_idl, TrainConfig, TrainingBlock};
use crate::model::stream::derive_rng;
use crate::model::{ChannelMatrix, ResponseTable, SymbolBook, SystemConfig};

/// One labelled frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrSample {
    pub features: Vec<f64>,
    pub label_db: f64,
}

/// Features of one frame, computed from sub-block 0 of every block.
pub fn frame_features(blocks: &[TrainingBlock]) -> Result<Vec<f64>> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::contract("no training blocks"))?;
    let c = first.components;
    let n = first.subblock_len();
    let mut acc = vec![0.0; c];
    for block in blocks {
        if block.components != c || block.subblock_len() != n {
            return Err(Error::contract("training blocks have inconsistent shapes"));
        }
        for (a, count) in acc.iter_mut().zip(block.subblock_plus_counts(0)) {
            *a += (count as f64 / n as f64 - 0.5).powi(2);
        }
    }
    let bias = 0.25 / n as f64;
    Ok(acc
        .into_iter()
        .map(|a| 0.5 + (a / blocks.len() as f64 - bias).max(0.0).sqrt())
        .collect())
}

/// Simulates one frame at `config`'s SNR and returns its features.
///
/// Only the undithered first sub-block of `subblock_len` slots per symbol
/// is drawn, which is all the features use.
pub fn simulate_frame_features<R: rand::Rng + ?Sized>(
    config: &SystemConfig,
    book: &SymbolBook,
    subblock_len: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let h = ChannelMatrix::rayleigh(config, rng);
    let responses = ResponseTable::new(&h, book, config)?;
    let train = TrainConfig::idl(subblock_len, 1, 0.0, config.noise_power());
    let obs = observe_idl(&responses, config, &train, rng)?;
    frame_features(&obs.blocks)
}

/// Labelled frames for every SNR on `grid_db`, `samples_per_point` each.
///
/// Each frame draws its own channel and noise from a stream keyed by
/// `(seed, grid index, sample index)`, so the output is independent of
/// thread scheduling.
pub fn generate_snr_dataset(
    template: &SystemConfig,
    subblock_len: usize,
    grid_db: &[f64],
    samples_per_point: usize,
    seed: u64,
) -> Result<Vec<SnrSample>> {
    if subblock_len == 0 {
        return Err(Error::config("feature sub-block length must be positive"));
    }
    let book = SymbolBook::enumerate(template)?;
    let jobs: Vec<(usize, usize)> = (0..grid_db.len())
        .flat_map(|j| (0..samples_per_point).map(move |s| (j, s)))
        .collect();
    jobs.par_iter()
        .map(|&(j, s)| {
            let config = template.with_snr_db(grid_db[j]);
            let mut rng = derive_rng(seed, &[j as u64, s as u64]);
            Ok(SnrSample {
                features: simulate_frame_features(&config, &book, subblock_len, &mut rng)?,
                label_db: grid_db[j],
            })
        })
        .collect()
}

/// γ̂ in dB for a frame of iDL training blocks.
pub fn estimate_snr_db(params: &MlpParams, blocks: &[TrainingBlock]) -> Result<f64> {
    let n = blocks
        .first()
        .ok_or_else(|| Error::contract("no training blocks"))?
        .subblock_len();
    if params.feature_block_len != 0 && params.feature_block_len != n {
        return Err(Error::config(format!(
            "network was trained on sub-blocks of {} slots, frame has {n}",
            params.feature_block_len
        )));
    }
    params.forward(&frame_features(blocks)?)
}

/// N̂₀ = ρ / 10^{γ̂/10} for a feature vector.
pub fn estimate_noise_power(
    params: &MlpParams,
    features: &[f64],
    transmit_power: f64,
) -> Result<f64> {
    Ok(noise_power_from_db(
        params.forward(features)?,
        transmit_power,
    ))
}

/// [`estimate_noise_power`] for a frame of iDL training blocks.
pub fn estimate_noise_power_from_blocks(
    params: &MlpParams,
    blocks: &[TrainingBlock],
    transmit_power: f64,
) -> Result<f64> {
    Ok(noise_power_from_db(
        estimate_snr_db(params, blocks)?,
        transmit_power,
    ))
}

fn noise_power_from_db(snr_db: f64, transmit_power: f64) -> f64 {
    transmit_power / 10f64.powf(snr_db / 10.0)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn block(sub: &[i8], components: usize) -> TrainingBlock {
        TrainingBlock {
            symbol: 0,
            components,
            observations: sub.to_vec(),
            per_subblock_variances: vec![0.0; components],
        }
    }

    #[test]
    fn noiseless_component_maps_to_one() {
        // Two slots, two components: component 0 constant, component 1 split.
        let b = block(&[1, 1, 1, -1], 2);
        let f = frame_features(&[b]).unwrap();
        assert!((f[0] - (0.5 + (0.25f64 - 0.125).sqrt())).abs() < 1e-15);
        assert_eq!(f[1], 0.5);
        let long = block(&[1; 40], 1);
        assert!(
            (frame_features(&[long]).unwrap()[0] - (0.5 + (0.25f64 - 0.25 / 40.0).sqrt())).abs()
                < 1e-15
        );
    }

    #[test]
    fn features_in_range_and_symmetric() {
        let config = SystemConfig::from_snr_db(4, 2, 4, 5.0).unwrap();
        let book = SymbolBook::enumerate(&config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = simulate_frame_features(&config, &book, 10, &mut rng).unwrap();
        assert_eq!(f.len(), 8);
        assert!(f.iter().all(|&v| (0.5..=1.0).contains(&v)));
    }

    #[test]
    fn low_snr_features_near_half() {
        let template = SystemConfig::from_snr_db(32, 4, 4, 0.0).unwrap();
        let data = generate_snr_dataset(&template, 10, &[-20.0], 4, 1).unwrap();
        for s in &data {
            let mean =
                s.features.iter().map(|v| (v - 0.5).abs()).sum::<f64>() / s.features.len() as f64;
            assert!(mean < 0.1, "mean |f - 1/2| = {mean}");
        }
    }

    #[test]
    fn dataset_is_deterministic_and_labelled() {
        let template = SystemConfig::from_snr_db(4, 2, 4, 0.0).unwrap();
        let a = generate_snr_dataset(&template, 5, &[0.0, 10.0], 3, 7).unwrap();
        let b = generate_snr_dataset(&template, 5, &[0.0, 10.0], 3, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert_eq!(a.iter().filter(|s| s.label_db == 10.0).count(), 3);
    }

    fn constant_estimator(snr_db: f64) -> MlpParams {
        let mut p = MlpParams::zeros(&[2, 1], Activation::Relu).unwrap();
        p.layers[0].biases[0] = snr_db;
        p
    }

    #[test]
    fn noise_power_from_db_estimate() {
        assert_eq!(
            estimate_noise_power(&constant_estimator(0.0), &[0.5, 0.5], 1.0).unwrap(),
            1.0
        );
        let n0 = estimate_noise_power(&constant_estimator(10.0), &[0.5, 0.5], 1.0).unwrap();
        assert!((n0 - 0.1).abs() < 1e-15);
    }

    #[test]
    fn estimated_noise_power_rescales_denoised_channel() {
        let (n0, var, p_hat) = (0.5, 0.5, 0.8);
        let n0_hat = estimate_noise_power(&constant_estimator(6.0), &[0.7, 0.9], 1.0).unwrap();
        let exact = crate::learning::denoise(p_hat, var, n0, 1e-3).psi;
        let est = crate::learning::denoise(p_hat, var, n0_hat, 1e-3).psi;
        let factor = ((1.0 + var / n0_hat) / (1.0 + var / n0)).sqrt();
        assert!((est - exact * factor).abs() < 1e-12);
    }

    #[test]
    fn noise_power_follows_estimate() {
        let mut p = constant_estimator(10.0);
        let b = block(&[1, -1], 2);
        let n0 = estimate_noise_power_from_blocks(&p, std::slice::from_ref(&b), 2.0).unwrap();
        assert!((n0 - 0.2).abs() < 1e-15);
        p.feature_block_len = 3;
        assert!(estimate_snr_db(&p, &[b]).is_err());
    }
}
