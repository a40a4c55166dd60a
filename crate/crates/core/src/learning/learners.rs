use rand::Rng;
use rand_distr::StandardNormal;

use super::{denoise, plus_counts, DitherState, LikelihoodTable, TrainConfig, TrainingBlock};
use crate::error::{Error, Result};
use crate::model::{sign, ChannelMatrix, ResponseTable, SymbolBook, SystemConfig};

/// Appends `reps` quantized observations of `mean + std ⊙ n`.
fn observe_rows<R: Rng + ?Sized>(
    mean: &[f64],
    std: &[f64],
    reps: usize,
    rng: &mut R,
    out: &mut Vec<i8>,
) {
    for _ in 0..reps {
        for (m, s) in mean.iter().zip(std) {
            let n: f64 = rng.sample(StandardNormal);
            out.push(sign(m + s * n));
        }
    }
}

/// A per-real-component dither variance on the scale of N₀, which is the
/// complex noise power (N₀/2 per real component).
fn on_noise_scale(dither_var: f64) -> f64 {
    2.0 * dither_var
}

fn responses(book: &SymbolBook, h: &ChannelMatrix, config: &SystemConfig) -> Result<ResponseTable> {
    ResponseTable::new(h, book, config)
}

/// Naive learning: p̂ is the raw +1 frequency over N_tr un-dithered pilots.
pub fn learn_naive<R: Rng + ?Sized>(
    book: &SymbolBook,
    h: &ChannelMatrix,
    config: &SystemConfig,
    train: &TrainConfig,
    rng: &mut R,
) -> Result<LikelihoodTable> {
    learn_naive_from(&responses(book, h, config)?, config, train, rng)
}

pub fn learn_naive_from<R: Rng + ?Sized>(
    responses: &ResponseTable,
    config: &SystemConfig,
    train: &TrainConfig,
    rng: &mut R,
) -> Result<LikelihoodTable> {
    if train.reps_per_symbol == 0 {
        return Err(Error::config("N_tr must be positive"));
    }
    let c = responses.components();
    let reps = train.reps_per_symbol;
    let std = vec![(0.5 * config.noise_power() + 0.0).sqrt(); c];
    let mut freq = Vec::with_capacity(responses.num_symbols() * c);
    let mut obs = Vec::with_capacity(reps * c);
    for k in 0..responses.num_symbols() {
        obs.clear();
        observe_rows(responses.row(k), &std, reps, rng, &mut obs);
        freq.extend(
            plus_counts(&obs, c)
                .into_iter()
                .map(|n| n as f64 / reps as f64),
        );
    }
    Ok(
        LikelihoodTable::from_probabilities(responses.num_symbols(), c, freq.clone())?
            .with_raw_frequency(freq)
            .with_train(*train),
    )
}

/// Dithered learning with one fixed dither variance on every component,
/// followed by de-noising of each empirical frequency.
pub fn learn_dl<R: Rng + ?Sized>(
    book: &SymbolBook,
    h: &ChannelMatrix,
    config: &SystemConfig,
    train: &TrainConfig,
    dither_var: f64,
    rng: &mut R,
) -> Result<LikelihoodTable> {
    learn_dl_from(&responses(book, h, config)?, config, train, dither_var, rng)
}

pub fn learn_dl_from<R: Rng + ?Sized>(
    responses: &ResponseTable,
    config: &SystemConfig,
    train: &TrainConfig,
    dither_var: f64,
    rng: &mut R,
) -> Result<LikelihoodTable> {
    train.validate()?;
    if !(dither_var >= 0.0) {
        return Err(Error::config("dither variance must be nonnegative"));
    }
    let c = responses.components();
    let k_count = responses.num_symbols();
    let reps = train.reps_per_symbol;
    let eps = train.clamp_for(reps);
    let n0 = train.noise_power_for_denoise;
    let std = vec![(0.5 * config.noise_power() + dither_var).sqrt(); c];

    let mut raw = Vec::with_capacity(k_count * c);
    let mut p_plus = Vec::with_capacity(k_count * c);
    let mut ln_plus = Vec::with_capacity(k_count * c);
    let mut ln_minus = Vec::with_capacity(k_count * c);
    let mut obs = Vec::with_capacity(reps * c);
    for k in 0..k_count {
        obs.clear();
        observe_rows(responses.row(k), &std, reps, rng, &mut obs);
        for count in plus_counts(&obs, c) {
            let p_hat = count as f64 / reps as f64;
            let d = denoise(p_hat, on_noise_scale(dither_var), n0, eps);
            raw.push(p_hat);
            p_plus.push(d.refined);
            ln_plus.push(d.ln_plus());
            ln_minus.push(d.ln_minus());
        }
    }
    Ok(
        LikelihoodTable::from_parts(k_count, c, p_plus, ln_plus, ln_minus)
            .with_raw_frequency(raw)
            .with_train(*train),
    )
}

/// Observations collected by the iDL pilot phase, before de-noising.
#[derive(Debug, Clone)]
pub struct IdlObservation {
    pub blocks: Vec<TrainingBlock>,
    pub final_states: Vec<DitherState>,
}

/// Runs the adaptive-dither pilot phase for every symbol.
///
/// Per symbol the variances restart at `train.initial_dither_var`. After
/// each sub-block, a component whose sub-block came out all +1 or all -1
/// gets 𝓘_i = 1 and its variance grows by `train.dither_step`; any sign
/// change sets 𝓘_i = 0 and leaves the variance alone. The observations do
/// not depend on the de-noising N₀, so one pass can feed several tables.
pub fn observe_idl<R: Rng + ?Sized>(
    responses: &ResponseTable,
    config: &SystemConfig,
    train: &TrainConfig,
    rng: &mut R,
) -> Result<IdlObservation> {
    train.validate()?;
    let c = responses.components();
    let sub = train.subblock_len();
    let n_sub = train.num_subblocks;
    let half_n0 = 0.5 * config.noise_power();

    let mut blocks = Vec::with_capacity(responses.num_symbols());
    let mut final_states = Vec::with_capacity(responses.num_symbols());
    let mut std = vec![0.0; c];
    for k in 0..responses.num_symbols() {
        let mut state = DitherState::new(c, train.initial_dither_var);
        let mut observations = Vec::with_capacity(train.reps_per_symbol * c);
        let mut per_subblock_variances = Vec::with_capacity(n_sub * c);
        for _ in 0..n_sub {
            per_subblock_variances.extend_from_slice(&state.variances);
            for (s, v) in std.iter_mut().zip(&state.variances) {
                *s = (half_n0 + v).sqrt();
            }
            let start = observations.len();
            observe_rows(responses.row(k), &std, sub, rng, &mut observations);
            let counts = plus_counts(&observations[start..], c);
            for ((count, ind), var) in counts
                .into_iter()
                .zip(state.indicators.iter_mut())
                .zip(state.variances.iter_mut())
            {
                *ind = u8::from(count == 0 || count == sub);
                *var += f64::from(*ind) * train.dither_step;
            }
        }
        blocks.push(TrainingBlock {
            symbol: k,
            components: c,
            observations,
            per_subblock_variances,
        });
        final_states.push(state);
    }
    Ok(IdlObservation {
        blocks,
        final_states,
    })
}

/// De-noises every sub-block with the variance that was active while it
/// was observed and averages the refined probabilities over sub-blocks.
pub fn table_from_blocks(
    blocks: &[TrainingBlock],
    noise_power: f64,
    train: &TrainConfig,
) -> Result<LikelihoodTable> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::contract("no training blocks"))?;
    let c = first.components;
    let n_sub = first.num_subblocks();
    let sub = first.subblock_len();
    let eps = train.clamp_for(sub);
    let ln_n = (n_sub as f64).ln();

    let cells = blocks.len() * c;
    let mut raw = Vec::with_capacity(cells);
    let mut p_plus = vec![0.0; cells];
    let mut ln_plus = Vec::with_capacity(cells);
    let mut ln_minus = Vec::with_capacity(cells);
    let mut lp = vec![Vec::with_capacity(n_sub); c];
    let mut lm = vec![Vec::with_capacity(n_sub); c];
    for (k, block) in blocks.iter().enumerate() {
        if block.components != c || block.num_subblocks() != n_sub || block.reps() != sub * n_sub {
            return Err(Error::contract("training blocks have inconsistent shapes"));
        }
        lp.iter_mut().chain(lm.iter_mut()).for_each(Vec::clear);
        let mut total = vec![0usize; c];
        for n in 0..n_sub {
            let counts = block.subblock_plus_counts(n);
            for (i, (&count, &var)) in counts.iter().zip(block.subblock_variances(n)).enumerate() {
                total[i] += count;
                let d = denoise(
                    count as f64 / sub as f64,
                    on_noise_scale(var),
                    noise_power,
                    eps,
                );
                p_plus[k * c + i] += d.refined / n_sub as f64;
                lp[i].push(d.ln_plus());
                lm[i].push(d.ln_minus());
            }
        }
        for i in 0..c {
            raw.push(total[i] as f64 / block.reps() as f64);
            ln_plus.push(log_sum_exp(&lp[i]) - ln_n);
            ln_minus.push(log_sum_exp(&lm[i]) - ln_n);
        }
    }
    Ok(
        LikelihoodTable::from_parts(blocks.len(), c, p_plus, ln_plus, ln_minus)
            .with_raw_frequency(raw)
            .with_train(*train),
    )
}

/// Incremental dither-and-learning over all K symbols.
///
/// Returns the averaged refined table and the dither state each symbol's
/// block ended with.
pub fn learn_idl<R: Rng + ?Sized>(
    book: &SymbolBook,
    h: &ChannelMatrix,
    config: &SystemConfig,
    train: &TrainConfig,
    rng: &mut R,
) -> Result<(LikelihoodTable, Vec<DitherState>)> {
    let obs = observe_idl(&responses(book, h, config)?, config, train, rng)?;
    let table = table_from_blocks(&obs.blocks, train.noise_power_for_denoise, train)?;
    Ok((table, obs.final_states))
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
