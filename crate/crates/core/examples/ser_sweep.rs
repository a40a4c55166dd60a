//! SER versus SNR for the learned and CSI detectors, printed as CSV.
//!
//! Settings use the config-file keys as `key=value` arguments:
//!
//! ```text
//! cargo run --release --example ser_sweep -- snr-start=-6 snr-stop=4 snr-step=1 min-errors=300
//! ```

use onebit::harness::{crossing_snr, run_ser_sweep, write_csv, Settings, SweepKind};

fn main() -> onebit::Result<()> {
    env_logger::init();
    let mut settings = Settings {
        trials: 200,
        ..Settings::default()
    };
    for arg in std::env::args().skip(1) {
        let (k, v) = arg
            .split_once('=')
            .unwrap_or_else(|| panic!("expected key=value, got {arg:?}"));
        settings.set(k, v)?;
    }
    let spec = settings.experiment(SweepKind::Ser)?;
    let result = run_ser_sweep(&spec)?;
    write_csv(&result, std::io::stdout().lock())?;

    eprintln!("SNR where SER falls through 1e-2:");
    for d in &spec.detectors {
        let name = d.to_string();
        match crossing_snr(&result.ser_curve(&name), 1e-2) {
            Some(x) => eprintln!("  {name:>10}: {x:.2} dB"),
            None => eprintln!("  {name:>10}: no crossing on this grid"),
        }
    }
    Ok(())
}
