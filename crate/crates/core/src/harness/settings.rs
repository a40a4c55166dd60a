use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{snr_grid, ExperimentSpec, Method, SerMode, SnrMode};
use crate::error::{Error, Result};
use crate::model::SystemConfig;

/// Which sweep a settings bundle feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Ser,
    Undertrained,
}

/// Flat run settings shared by the config file and the command line.
///
/// Keys are the long flag names without the leading dashes, e.g.
/// `mod-order = 16`; underscores are accepted in place of hyphens.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub nr: usize,
    pub nu: usize,
    pub mod_order: usize,
    pub ntr: usize,
    /// Sub-block counts; one iDL detector per entry.
    pub subblocks: Vec<usize>,
    pub dither_step: f64,
    pub dl_dither: f64,
    pub snr_start: f64,
    pub snr_stop: f64,
    pub snr_step: f64,
    pub trials: usize,
    pub data_symbols: usize,
    pub min_errors: u64,
    pub seed: u64,
    pub snr_estimated: bool,
    pub mlp_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub ser_mode: SerMode,
    /// Explicit detector list; `None` picks one from the other settings.
    pub detectors: Option<Vec<Method>>,
    pub epochs: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            nr: 32,
            nu: 4,
            mod_order: 4,
            ntr: 30,
            subblocks: vec![3],
            dither_step: 0.5,
            dl_dither: 0.5,
            snr_start: -10.0,
            snr_stop: 30.0,
            snr_step: 2.5,
            trials: 500,
            data_symbols: 200,
            min_errors: 100,
            seed: 1,
            snr_estimated: false,
            mlp_file: None,
            out: None,
            ser_mode: SerMode::User,
            detectors: None,
            epochs: 200,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::config(format!("invalid value {value:?} for {key}: {e}")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl Settings {
    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "nr" => self.nr = parse(&key, value)?,
            "nu" => self.nu = parse(&key, value)?,
            "mod-order" => self.mod_order = parse(&key, value)?,
            "ntr" => self.ntr = parse(&key, value)?,
            "subblocks" => {
                self.subblocks = list(&key, value)?;
                if self.subblocks.is_empty() || self.subblocks.contains(&0) {
                    return Err(Error::config("subblocks must be positive"));
                }
            }
            "dither-step" => self.dither_step = parse(&key, value)?,
            "dl-dither" => self.dl_dither = parse(&key, value)?,
            "snr-start" => self.snr_start = parse(&key, value)?,
            "snr-stop" => self.snr_stop = parse(&key, value)?,
            "snr-step" => self.snr_step = parse(&key, value)?,
            "trials" => self.trials = parse(&key, value)?,
            "data-symbols" => self.data_symbols = parse(&key, value)?,
            "min-errors" => self.min_errors = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "snr-mode" => {
                self.snr_estimated = match value {
                    "oracle" => false,
                    "estimated" => true,
                    _ => {
                        return Err(Error::config(format!(
                            "snr-mode must be oracle or estimated, got {value:?}"
                        )))
                    }
                }
            }
            "mlp-file" => self.mlp_file = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            "ser-mode" => {
                self.ser_mode = match value {
                    "user" => SerMode::User,
                    "vector" => SerMode::Vector,
                    _ => {
                        return Err(Error::config(format!(
                            "ser-mode must be user or vector, got {value:?}"
                        )))
                    }
                }
            }
            "detectors" => {
                let d: Vec<Method> = list(&key, value)?;
                if d.is_empty() {
                    return Err(Error::config("detectors list is empty"));
                }
                self.detectors = Some(d);
            }
            "epochs" => self.epochs = parse(&key, value)?,
            _ => return Err(Error::config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn apply_str(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!(
                    "{}:{}: expected key = value",
                    origin.display(),
                    n + 1
                ))
            })?;
            if key.trim() == "config" {
                return Err(Error::config(
                    "config files cannot include other config files",
                ));
            }
            self.set(key, value).map_err(|e| match e {
                Error::Config(msg) => {
                    Error::config(format!("{}:{}: {msg}", origin.display(), n + 1))
                }
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_str(&text, path)
    }

    /// The settings as a config file that [`Settings::apply_str`] reads back.
    pub fn to_config_text(&self) -> String {
        let join = |v: &[String]| v.join(",");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("nr", self.nr.to_string());
        kv("nu", self.nu.to_string());
        kv("mod-order", self.mod_order.to_string());
        kv("ntr", self.ntr.to_string());
        kv(
            "subblocks",
            join(
                &self
                    .subblocks
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>(),
            ),
        );
        kv("dither-step", self.dither_step.to_string());
        kv("dl-dither", self.dl_dither.to_string());
        kv("snr-start", self.snr_start.to_string());
        kv("snr-stop", self.snr_stop.to_string());
        kv("snr-step", self.snr_step.to_string());
        kv("trials", self.trials.to_string());
        kv("data-symbols", self.data_symbols.to_string());
        kv("min-errors", self.min_errors.to_string());
        kv("seed", self.seed.to_string());
        kv(
            "snr-mode",
            if self.snr_estimated {
                "estimated"
            } else {
                "oracle"
            }
            .into(),
        );
        if let Some(p) = &self.mlp_file {
            kv("mlp-file", p.display().to_string());
        }
        if let Some(p) = &self.out {
            kv("out", p.display().to_string());
        }
        kv("ser-mode", self.ser_mode.to_string());
        if let Some(d) = &self.detectors {
            kv(
                "detectors",
                join(&d.iter().map(ToString::to_string).collect::<Vec<_>>()),
            );
        }
        kv("epochs", self.epochs.to_string());
        s
    }

    /// System template with ρ = 1.
    pub fn system(&self) -> Result<SystemConfig> {
        SystemConfig::from_snr_db(self.nr, self.nu, self.mod_order, 0.0)
    }

    pub fn snr_grid(&self) -> Result<Vec<f64>> {
        snr_grid(self.snr_start, self.snr_stop, self.snr_step)
    }

    fn default_detectors(&self, kind: SweepKind) -> Vec<Method> {
        let mut d = vec![Method::Naive, Method::Dl];
        d.extend(self.subblocks.iter().map(|&n| Method::Idl(n)));
        if kind == SweepKind::Ser {
            if self.snr_estimated {
                d.extend(self.subblocks.iter().map(|&n| Method::IdlEstimated(n)));
            }
            d.extend([Method::Zf, Method::CsiMl]);
        }
        d
    }

    pub fn experiment(&self, kind: SweepKind) -> Result<ExperimentSpec> {
        let snr_mode = if self.snr_estimated {
            SnrMode::Estimated(
                self.mlp_file
                    .clone()
                    .ok_or_else(|| Error::config("snr-mode estimated needs mlp-file"))?,
            )
        } else {
            SnrMode::Oracle
        };
        let spec = ExperimentSpec {
            system: self.system()?,
            reps_per_symbol: self.ntr,
            dither_step: self.dither_step,
            initial_dither_var: 0.0,
            dl_dither_var: self.dl_dither,
            clamp_epsilon: None,
            snr_grid_db: self.snr_grid()?,
            detectors: self
                .detectors
                .clone()
                .unwrap_or_else(|| self.default_detectors(kind)),
            num_channel_realizations: self.trials,
            data_symbols_per_channel: self.data_symbols,
            min_errors: self.min_errors,
            master_seed: self.seed,
            snr_mode,
            ser_mode: self.ser_mode,
        };
        spec.validate()?;
        Ok(spec)
    }
}
