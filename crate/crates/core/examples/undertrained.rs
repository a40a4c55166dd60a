//! Average number of undertrained likelihood entries per channel as the SNR
//! grows, for naive learning, fixed dither and incremental dither.
//!
//! ```text
//! cargo run --release --example undertrained -- trials=100 subblocks=3,5
//! ```

use onebit::harness::{run_undertrained_sweep, Settings, SweepKind};

fn main() -> onebit::Result<()> {
    env_logger::init();
    let mut settings = Settings {
        trials: 100,
        ..Settings::default()
    };
    settings.set("snr-start", "-10")?;
    settings.set("snr-stop", "30")?;
    settings.set("snr-step", "5")?;
    settings.set("subblocks", "3,5")?;
    for arg in std::env::args().skip(1) {
        let (k, v) = arg
            .split_once('=')
            .unwrap_or_else(|| panic!("expected key=value, got {arg:?}"));
        settings.set(k, v)?;
    }
    let spec = settings.experiment(SweepKind::Undertrained)?;
    let result = run_undertrained_sweep(&spec)?;

    let names: Vec<String> = spec.detectors.iter().map(|d| d.to_string()).collect();
    print!("{:>8}", "snr_db");
    for n in &names {
        print!("{n:>10}");
    }
    println!();
    for &snr in &spec.snr_grid_db {
        print!("{snr:>8.1}");
        for n in &names {
            let row = result
                .detector_rows(n)
                .find(|r| r.snr_db == snr)
                .expect("one row per detector and SNR");
            print!("{:>10.2}", row.avg_undertrained.unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
