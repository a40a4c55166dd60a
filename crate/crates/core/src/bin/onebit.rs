use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use onebit::harness::{
    run_ser_sweep, run_undertrained_sweep, write_csv, Settings, SweepKind, SweepResult,
};
use onebit::snr::{generate_snr_dataset, mlp_train, TrainHyperparams};
use onebit::Error;

/// One-bit massive MIMO detection experiments.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symbol error rate versus SNR.
    SweepSer(Flags),
    /// Average undertrained likelihood count versus SNR.
    SweepUndertrained(Flags),
    /// Train the SNR estimator and write it to --mlp-file.
    TrainSnr(Flags),
    /// Print the effective settings as a config file.
    ShowConfig(Flags),
}

/// Every flag has a config-file key of the same name; flags win.
#[derive(Args)]
struct Flags {
    /// Flat `key = value` settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nr: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    mod_order: Option<String>,
    #[arg(long)]
    ntr: Option<String>,
    /// Comma-separated list, one iDL detector each.
    #[arg(long)]
    subblocks: Option<String>,
    #[arg(long)]
    dither_step: Option<String>,
    #[arg(long)]
    dl_dither: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    snr_start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    snr_stop: Option<String>,
    #[arg(long)]
    snr_step: Option<String>,
    /// Channel realizations per grid point (samples per point for train-snr).
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    data_symbols: Option<String>,
    #[arg(long)]
    min_errors: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// oracle or estimated.
    #[arg(long)]
    snr_mode: Option<String>,
    #[arg(long)]
    mlp_file: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// user or vector.
    #[arg(long)]
    ser_mode: Option<String>,
    /// Comma-separated detector list, e.g. naive,dl,idl3,zf,csi-ml.
    #[arg(long)]
    detectors: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
}

impl Flags {
    fn settings(&self) -> onebit::Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.apply_file(path)?;
        }
        let pairs = [
            ("nr", &self.nr),
            ("nu", &self.nu),
            ("mod-order", &self.mod_order),
            ("ntr", &self.ntr),
            ("subblocks", &self.subblocks),
            ("dither-step", &self.dither_step),
            ("dl-dither", &self.dl_dither),
            ("snr-start", &self.snr_start),
            ("snr-stop", &self.snr_stop),
            ("snr-step", &self.snr_step),
            ("trials", &self.trials),
            ("data-symbols", &self.data_symbols),
            ("min-errors", &self.min_errors),
            ("seed", &self.seed),
            ("snr-mode", &self.snr_mode),
            ("mlp-file", &self.mlp_file),
            ("out", &self.out),
            ("ser-mode", &self.ser_mode),
            ("detectors", &self.detectors),
            ("epochs", &self.epochs),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        Ok(s)
    }
}

/// Opens the destination before the sweep runs so a bad path fails fast.
fn sweep(
    out: Option<&Path>,
    run: impl FnOnce() -> onebit::Result<SweepResult>,
) -> onebit::Result<()> {
    let file = out
        .map(|path| {
            File::create(path).map_err(|e| {
                Error::Io(std::io::Error::new(
                    e.kind(),
                    format!("{}: {e}", path.display()),
                ))
            })
        })
        .transpose()?;
    let result = run()?;
    match file {
        Some(f) => {
            let mut w = BufWriter::new(f);
            write_csv(&result, &mut w)?;
            w.flush()?;
            Ok(())
        }
        None => write_csv(&result, std::io::stdout().lock()),
    }
}

fn train_snr(s: &Settings) -> onebit::Result<()> {
    let path = s
        .mlp_file
        .clone()
        .ok_or_else(|| Error::Config("train-snr needs --mlp-file".into()))?;
    let sub = s.subblocks[0];
    if sub == 0 || !s.ntr.is_multiple_of(sub) {
        return Err(Error::Config(format!(
            "ntr = {} is not a multiple of {sub}",
            s.ntr
        )));
    }
    let block = s.ntr / sub;
    let data = generate_snr_dataset(&s.system()?, block, &s.snr_grid()?, s.trials, s.seed)?;
    let hyper = TrainHyperparams {
        epochs: s.epochs,
        seed: s.seed,
        ..Default::default()
    };
    let (mut mlp, report) = mlp_train(&data, &hyper)?;
    mlp.feature_block_len = block;
    mlp.write(&path)?;
    eprintln!(
        "trained on {} frames: validation RMSE {:.3} dB (epoch {}), written to {}",
        report.train_len,
        report.best_val_mse.sqrt(),
        report.best_epoch,
        path.display()
    );
    Ok(())
}

fn run(command: Command) -> onebit::Result<()> {
    match command {
        Command::SweepSer(f) => {
            let s = f.settings()?;
            let spec = s.experiment(SweepKind::Ser)?;
            sweep(s.out.as_deref(), || run_ser_sweep(&spec))
        }
        Command::SweepUndertrained(f) => {
            let s = f.settings()?;
            let spec = s.experiment(SweepKind::Undertrained)?;
            sweep(s.out.as_deref(), || run_undertrained_sweep(&spec))
        }
        Command::TrainSnr(f) => train_snr(&f.settings()?),
        Command::ShowConfig(f) => {
            let s = f.settings()?;
            s.experiment(SweepKind::Ser)?;
            print!("{}", s.to_config_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
