//! Monte Carlo sweeps over an SNR grid.
//!
//! Every random draw of a trial comes from a stream keyed by
//! `(master_seed, snr index, trial index, purpose)`, so a sweep's counts do
//! not depend on thread count or batch boundaries. Trials run in parallel
//! batches and are folded back in trial order.

mod csv_io;
mod settings;

pub use csv_io::{emit_csv, parse_csv, write_csv};
pub use settings::{Settings, SweepKind};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::detect::{csi_table, LogLikelihoodScorer, ZfEqualizer};
use crate::error::{Error, Result};
use crate::learning::{
    count_undertrained, learn_dl_from, learn_naive_from, observe_idl, table_from_blocks,
    IdlObservation, LikelihoodTable, TrainConfig,
};
use crate::model::stream::derive_rng;
use crate::model::{sign, ChannelMatrix, ResponseTable, SymbolBook, SystemConfig};
use crate::snr::{estimate_noise_power_from_blocks, MlpParams};

const STREAM_CHANNEL: u64 = 0;
const STREAM_DATA: u64 = 1;
const STREAM_NAIVE: u64 = 2;
const STREAM_DL: u64 = 3;
const STREAM_IDL: u64 = 4;

/// Channel redraws allowed before a rank-deficient draw becomes an error.
const MAX_CHANNEL_REDRAWS: u64 = 64;

/// A detector in a sweep: a learner feeding learned-table ML, or a CSI
/// baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Naive,
    /// Fixed dither of variance [`ExperimentSpec::dl_dither_var`].
    Dl,
    /// Incremental dither with N sub-blocks, oracle N₀.
    Idl(usize),
    /// Incremental dither with N sub-blocks, N₀ estimated by the MLP.
    IdlEstimated(usize),
    Zf,
    CsiMl,
}

impl Method {
    pub fn is_learned(self) -> bool {
        !matches!(self, Method::Zf | Method::CsiMl)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Naive => f.write_str("naive"),
            Method::Dl => f.write_str("dl"),
            Method::Idl(n) => write!(f, "idl{n}"),
            Method::IdlEstimated(n) => write!(f, "idl{n}-est"),
            Method::Zf => f.write_str("zf"),
            Method::CsiMl => f.write_str("csi-ml"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("unknown detector {s:?}"));
        Ok(match s {
            "naive" => Method::Naive,
            "dl" => Method::Dl,
            "zf" => Method::Zf,
            "csi-ml" => Method::CsiMl,
            _ => {
                let rest = s.strip_prefix("idl").ok_or_else(bad)?;
                let (digits, est) = match rest.strip_suffix("-est") {
                    Some(d) => (d, true),
                    None => (rest, false),
                };
                let n: usize = digits.parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(bad());
                }
                if est {
                    Method::IdlEstimated(n)
                } else {
                    Method::Idl(n)
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SnrMode {
    Oracle,
    /// Path to MLP parameters used by the `idlN-est` detectors.
    Estimated(PathBuf),
}

/// Unit of a symbol error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SerMode {
    /// Each user's symbol is one decision; a vector decision counts N_u times.
    User,
    /// Each symbol vector is one decision.
    Vector,
}

impl fmt::Display for SerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SerMode::User => "user",
            SerMode::Vector => "vector",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// System template; its SNR is replaced by each grid point.
    pub system: SystemConfig,
    pub reps_per_symbol: usize,
    pub dither_step: f64,
    pub initial_dither_var: f64,
    pub dl_dither_var: f64,
    pub clamp_epsilon: Option<f64>,
    pub snr_grid_db: Vec<f64>,
    pub detectors: Vec<Method>,
    /// Cap on trials (channel realizations) per grid point.
    pub num_channel_realizations: usize,
    /// N_d, data slots per channel.
    pub data_symbols_per_channel: usize,
    /// A detector stops accumulating at a grid point once it has this many errors.
    pub min_errors: u64,
    pub master_seed: u64,
    pub snr_mode: SnrMode,
    pub ser_mode: SerMode,
}

impl ExperimentSpec {
    /// N_r = 32, N_u = 4, 4-QAM, N_tr = 30, N = 3, Δσ² = σ_d² = ρ/2 on a
    /// −10…30 dB grid in 2.5 dB steps.
    pub fn desk_default() -> Self {
        let system = SystemConfig::from_snr_db(32, 4, 4, 0.0).expect("valid default system");
        Self {
            system,
            reps_per_symbol: 30,
            dither_step: 0.5,
            initial_dither_var: 0.0,
            dl_dither_var: 0.5,
            clamp_epsilon: None,
            snr_grid_db: snr_grid(-10.0, 30.0, 2.5).expect("valid default grid"),
            detectors: vec![
                Method::Naive,
                Method::Dl,
                Method::Idl(3),
                Method::Zf,
                Method::CsiMl,
            ],
            num_channel_realizations: 500,
            data_symbols_per_channel: 200,
            min_errors: 100,
            master_seed: 1,
            snr_mode: SnrMode::Oracle,
            ser_mode: SerMode::User,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_grid_db.is_empty() {
            return Err(Error::config("SNR grid is empty"));
        }
        if self.snr_grid_db.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("SNR grid must be strictly increasing"));
        }
        if self.snr_grid_db.iter().any(|g| !g.is_finite()) {
            return Err(Error::config("SNR grid contains a non-finite value"));
        }
        if self.detectors.is_empty() {
            return Err(Error::config("no detectors configured"));
        }
        if !(self.dl_dither_var >= 0.0) {
            return Err(Error::config("DL dither variance must be nonnegative"));
        }
        for &d in &self.detectors {
            if let Method::Idl(n) | Method::IdlEstimated(n) = d {
                self.idl_train(n, 1.0).validate()?;
            }
            if matches!(d, Method::IdlEstimated(_)) {
                if self.snr_mode == SnrMode::Oracle {
                    return Err(Error::config(format!(
                        "detector {d} needs an SNR estimator file"
                    )));
                }
                if self.initial_dither_var != 0.0 {
                    return Err(Error::config(
                        "SNR estimation needs an undithered first sub-block (initial dither 0)",
                    ));
                }
            }
        }
        self.single_block_train(1.0).validate()
    }

    /// N_t = K · N_tr.
    pub fn training_slots(&self) -> Result<usize> {
        Ok(SymbolBook::enumerate(&self.system)?.len() * self.reps_per_symbol)
    }

    /// N_c = N_t + N_d.
    pub fn coherence_slots(&self) -> Result<usize> {
        Ok(self.training_slots()? + self.data_symbols_per_channel)
    }

    fn single_block_train(&self, n0: f64) -> TrainConfig {
        TrainConfig {
            clamp_epsilon: self.clamp_epsilon,
            ..TrainConfig::single_block(self.reps_per_symbol, n0)
        }
    }

    fn idl_train(&self, subblocks: usize, n0: f64) -> TrainConfig {
        TrainConfig {
            initial_dither_var: self.initial_dither_var,
            clamp_epsilon: self.clamp_epsilon,
            ..TrainConfig::idl(self.reps_per_symbol, subblocks, self.dither_step, n0)
        }
    }
}

/// `start, start + step, …` up to `stop` inclusive (with a small tolerance).
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::config(format!(
            "invalid SNR grid start={start} stop={stop} step={step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|j| start + j as f64 * step).collect())
}

/// Counts of one detector in one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DetectorCounts {
    pub decisions: u64,
    pub errors: u64,
    /// Mean undertrained components per symbol, for learned detectors.
    pub undertrained: Option<f64>,
}

/// Output of one trial, indexed like [`ExperimentSpec::detectors`]; detectors
/// that were not run hold `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub counts: Vec<Option<DetectorCounts>>,
    pub channel_redraws: u64,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub detector: String,
    pub decisions: u64,
    pub errors: u64,
    pub ser: Option<f64>,
    pub avg_undertrained: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Rows of one detector in grid order.
    pub fn detector_rows<'a>(
        &'a self,
        detector: &'a str,
    ) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.detector == detector)
    }

    /// `(snr_db, ser)` pairs of one detector.
    pub fn ser_curve(&self, detector: &str) -> Vec<(f64, f64)> {
        self.detector_rows(detector)
            .filter_map(|r| r.ser.map(|s| (r.snr_db, s)))
            .collect()
    }
}

/// SNR at which a curve first falls through `target`, by linear
/// interpolation of log10(SER) in dB. `None` if it never crosses.
pub fn crossing_snr(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= target && y1 < target {
            if y1 <= 0.0 {
                return Some(x1);
            }
            let (l0, l1, lt) = (y0.log10(), y1.log10(), target.log10());
            Some(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1))
        } else {
            None
        }
    })
}

/// State shared by all trials of a sweep.
struct Prepared {
    book: SymbolBook,
    /// Per-user constellation indices of every row, flattened.
    user_digits: Vec<usize>,
    estimator: Option<MlpParams>,
    needs_zf: bool,
}

impl Prepared {
    fn new(spec: &ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let book = SymbolBook::enumerate(&spec.system)?;
        let user_digits = (0..book.len()).flat_map(|k| book.user_indices(k)).collect();
        let estimator = match &spec.snr_mode {
            SnrMode::Estimated(path)
                if spec
                    .detectors
                    .iter()
                    .any(|d| matches!(d, Method::IdlEstimated(_))) =>
            {
                let p = MlpParams::read(path)?;
                if p.input_dim() != spec.system.num_components() {
                    return Err(Error::config(format!(
                        "SNR estimator takes {} features, system has {} components",
                        p.input_dim(),
                        spec.system.num_components()
                    )));
                }
                Some(p)
            }
            _ => None,
        };
        Ok(Self {
            book,
            user_digits,
            estimator,
            needs_zf: spec.detectors.contains(&Method::Zf),
        })
    }

    fn digits(&self, k: usize) -> &[usize] {
        let nu = self.book.num_users();
        &self.user_digits[k * nu..(k + 1) * nu]
    }
}

enum Built {
    Table(LikelihoodTable),
    Zf(ZfEqualizer),
}

fn draw_channel(
    spec: &ExperimentSpec,
    prep: &Prepared,
    config: &SystemConfig,
    snr_index: usize,
    trial_index: usize,
) -> Result<(ChannelMatrix, Option<ZfEqualizer>, u64)> {
    for attempt in 0..MAX_CHANNEL_REDRAWS {
        let mut rng = derive_rng(
            spec.master_seed,
            &[
                snr_index as u64,
                trial_index as u64,
                STREAM_CHANNEL,
                attempt,
            ],
        );
        let h = ChannelMatrix::rayleigh(config, &mut rng);
        if !prep.needs_zf {
            return Ok((h, None, attempt));
        }
        match ZfEqualizer::new(&h) {
            Ok(zf) => return Ok((h, Some(zf), attempt)),
            Err(Error::RankDeficient(msg)) => {
                log::warn!("snr index {snr_index}, trial {trial_index}: {msg}; redrawing channel");
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::RankDeficient(format!(
        "{MAX_CHANNEL_REDRAWS} consecutive rank-deficient channel draws"
    )))
}

fn trial(
    spec: &ExperimentSpec,
    prep: &Prepared,
    snr_index: usize,
    trial_index: usize,
    active: &[bool],
    data_slots: usize,
) -> Result<TrialRecord> {
    let config = spec.system.with_snr_db(spec.snr_grid_db[snr_index]);
    let n0 = config.noise_power();
    let (h, zf, redraws) = draw_channel(spec, prep, &config, snr_index, trial_index)?;
    let responses = ResponseTable::new(&h, &prep.book, &config)?;
    let c = responses.components();
    let stream = |purpose: u64, extra: u64| {
        derive_rng(
            spec.master_seed,
            &[snr_index as u64, trial_index as u64, purpose, extra],
        )
    };

    let mut idl_cache: Vec<(usize, IdlObservation)> = Vec::new();
    let mut built = Vec::with_capacity(spec.detectors.len());
    for (&method, &on) in spec.detectors.iter().zip(active) {
        if !on {
            built.push(None);
            continue;
        }
        let b = match method {
            Method::Naive => Built::Table(learn_naive_from(
                &responses,
                &config,
                &spec.single_block_train(n0),
                &mut stream(STREAM_NAIVE, 0),
            )?),
            Method::Dl => Built::Table(learn_dl_from(
                &responses,
                &config,
                &spec.single_block_train(n0),
                spec.dl_dither_var,
                &mut stream(STREAM_DL, 0),
            )?),
            Method::Idl(n) | Method::IdlEstimated(n) => {
                let train = spec.idl_train(n, n0);
                if !idl_cache.iter().any(|(m, _)| *m == n) {
                    let obs = observe_idl(
                        &responses,
                        &config,
                        &train,
                        &mut stream(STREAM_IDL, n as u64),
                    )?;
                    idl_cache.push((n, obs));
                }
                let obs = &idl_cache.iter().find(|(m, _)| *m == n).unwrap().1;
                let denoise_n0 = match (method, &prep.estimator) {
                    (Method::IdlEstimated(_), Some(mlp)) => {
                        estimate_noise_power_from_blocks(mlp, &obs.blocks, config.transmit_power())?
                    }
                    (Method::IdlEstimated(_), None) => {
                        return Err(Error::config("no SNR estimator loaded"));
                    }
                    _ => n0,
                };
                let train = TrainConfig {
                    noise_power_for_denoise: denoise_n0,
                    ..train
                };
                Built::Table(table_from_blocks(&obs.blocks, denoise_n0, &train)?)
            }
            Method::CsiMl => Built::Table(csi_table(&responses, &config)),
            Method::Zf => Built::Zf(zf.clone().expect("equalizer drawn with the channel")),
        };
        built.push(Some(b));
    }

    let mut counts: Vec<Option<DetectorCounts>> = built
        .iter()
        .zip(&spec.detectors)
        .map(|(b, &m)| {
            b.as_ref().map(|b| DetectorCounts {
                undertrained: match (b, m) {
                    (Built::Table(t), m) if m.is_learned() => {
                        t.raw_frequency().map(|raw| count_undertrained(raw, c))
                    }
                    _ => None,
                },
                ..Default::default()
            })
        })
        .collect();

    if data_slots > 0 {
        let mut rng = stream(STREAM_DATA, 0);
        let std = (0.5 * n0).sqrt();
        let nu = prep.book.num_users();
        let mut y = vec![0i8; c];
        let mut y_real = vec![0.0; c];
        for _ in 0..data_slots {
            let k = rng.gen_range(0..prep.book.len());
            for ((yi, yr), &m) in y.iter_mut().zip(&mut y_real).zip(responses.row(k)) {
                let n: f64 = rng.sample(StandardNormal);
                *yi = sign(m + std * n);
                *yr = f64::from(*yi);
            }
            for (b, cnt) in built.iter().zip(&mut counts) {
                let (Some(b), Some(cnt)) = (b, cnt) else {
                    continue;
                };
                let k_hat = match b {
                    Built::Table(t) => LogLikelihoodScorer::new(t).best(&y).0,
                    Built::Zf(zf) => zf.detect_real(&y_real, &prep.book)?.symbol_index,
                };
                match spec.ser_mode {
                    SerMode::User => {
                        cnt.decisions += nu as u64;
                        cnt.errors += prep
                            .digits(k)
                            .iter()
                            .zip(prep.digits(k_hat))
                            .filter(|(a, b)| a != b)
                            .count() as u64;
                    }
                    SerMode::Vector => {
                        cnt.decisions += 1;
                        cnt.errors += u64::from(k_hat != k);
                    }
                }
            }
        }
    }
    Ok(TrialRecord {
        counts,
        channel_redraws: redraws,
    })
}

/// One trial at grid point `snr_index` with every configured detector.
pub fn run_trial(
    spec: &ExperimentSpec,
    snr_index: usize,
    trial_index: usize,
) -> Result<TrialRecord> {
    if snr_index >= spec.snr_grid_db.len() {
        return Err(Error::contract("SNR index outside the grid"));
    }
    let prep = Prepared::new(spec)?;
    let active = vec![true; spec.detectors.len()];
    trial(
        spec,
        &prep,
        snr_index,
        trial_index,
        &active,
        spec.data_symbols_per_channel,
    )
}

fn batch_len() -> usize {
    (4 * rayon::current_num_threads()).max(8)
}

/// SER for every detector at every grid point.
///
/// At each grid point a detector accumulates trials until it reaches
/// `min_errors` errors or the trial cap; its row reflects exactly the trials
/// it consumed. Training for a detector that has stopped is skipped.
pub fn run_ser_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    if spec.data_symbols_per_channel == 0 {
        return Err(Error::config(
            "SER sweep needs at least one data symbol per channel",
        ));
    }
    let prep = Prepared::new(spec)?;
    let nd = spec.detectors.len();
    let mut result = SweepResult::default();
    for (si, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        let start = Instant::now();
        let mut totals = vec![DetectorCounts::default(); nd];
        let mut done = vec![false; nd];
        let mut next = 0;
        while next < spec.num_channel_realizations && done.iter().any(|d| !d) {
            let end = (next + batch_len()).min(spec.num_channel_realizations);
            let active: Vec<bool> = done.iter().map(|d| !d).collect();
            let records: Vec<TrialRecord> = (next..end)
                .into_par_iter()
                .map(|t| trial(spec, &prep, si, t, &active, spec.data_symbols_per_channel))
                .collect::<Result<_>>()?;
            for rec in records {
                for d in 0..nd {
                    if done[d] {
                        continue;
                    }
                    let c = rec.counts[d].expect("active detector was run");
                    totals[d].decisions += c.decisions;
                    totals[d].errors += c.errors;
                    if totals[d].errors >= spec.min_errors {
                        done[d] = true;
                    }
                }
            }
            next = end;
        }
        let wall = start.elapsed().as_secs_f64();
        for (m, t) in spec.detectors.iter().zip(&totals) {
            result.rows.push(SweepRow {
                snr_db,
                detector: m.to_string(),
                decisions: t.decisions,
                errors: t.errors,
                ser: Some(t.errors as f64 / t.decisions as f64),
                avg_undertrained: None,
                wall_time_s: wall,
            });
        }
        log::info!("{snr_db} dB done in {wall:.1} s");
    }
    Ok(result)
}

/// Average undertrained count of every learned detector over all
/// `num_channel_realizations` channels at each grid point.
pub fn run_undertrained_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    let prep = Prepared::new(spec)?;
    let active: Vec<bool> = spec
        .detectors
        .iter()
        .map(|d| matches!(d, Method::Naive | Method::Dl | Method::Idl(_)))
        .collect();
    if !active.iter().any(|&a| a) {
        return Err(Error::config(
            "undertrained sweep needs naive, dl or idlN detectors",
        ));
    }
    if spec.num_channel_realizations == 0 {
        return Err(Error::config(
            "undertrained sweep needs at least one channel",
        ));
    }
    let mut result = SweepResult::default();
    for (si, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        let start = Instant::now();
        let records: Vec<TrialRecord> = (0..spec.num_channel_realizations)
            .into_par_iter()
            .map(|t| trial(spec, &prep, si, t, &active, 0))
            .collect::<Result<_>>()?;
        let wall = start.elapsed().as_secs_f64();
        for (d, m) in spec.detectors.iter().enumerate() {
            if !active[d] {
                continue;
            }
            let sum: f64 = records
                .iter()
                .map(|r| r.counts[d].and_then(|c| c.undertrained).unwrap_or(0.0))
                .sum();
            result.rows.push(SweepRow {
                snr_db,
                detector: m.to_string(),
                decisions: 0,
                errors: 0,
                ser: None,
                avg_undertrained: Some(sum / records.len() as f64),
                wall_time_s: wall,
            });
        }
    }
    Ok(result)
}
