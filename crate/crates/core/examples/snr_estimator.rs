//! Train the SNR-estimation MLP and report its error on fresh frames.
//!
//! ```text
//! cargo run --release --example snr_estimator -- [samples_per_point] [epochs]
//! ```

use std::time::Instant;

use onebit::model::SystemConfig;
use onebit::snr::{generate_snr_dataset, mlp_train, TrainHyperparams};

fn main() -> onebit::Result<()> {
    let mut args = std::env::args().skip(1);
    let per_point: usize = args
        .next()
        .map_or(200, |a| a.parse().expect("samples per point"));
    let epochs: usize = args.next().map_or(100, |a| a.parse().expect("epochs"));

    let template = SystemConfig::from_snr_db(32, 4, 4, 0.0)?;
    let grid: Vec<f64> = (0..=20).map(|j| -10.0 + 2.0 * j as f64).collect();
    let block_len = 10;

    let t = Instant::now();
    let train = generate_snr_dataset(&template, block_len, &grid, per_point, 1)?;
    let test = generate_snr_dataset(&template, block_len, &grid, per_point / 4 + 1, 2)?;
    println!(
        "generated {} + {} frames in {:.1?}",
        train.len(),
        test.len(),
        t.elapsed()
    );

    let hyper = TrainHyperparams {
        epochs,
        ..Default::default()
    };
    let t = Instant::now();
    let (mut mlp, report) = mlp_train(&train, &hyper)?;
    mlp.feature_block_len = block_len;
    println!(
        "trained in {:.1?}: validation MSE {:.3} -> {:.3} dB² (best epoch {})",
        t.elapsed(),
        report.initial_val_mse,
        report.best_val_mse,
        report.best_epoch
    );

    println!("{:>8} {:>10} {:>10}", "snr_db", "bias_db", "rmse_db");
    let mut total = 0.0;
    for &g in &grid {
        let errs: Vec<f64> = test
            .iter()
            .filter(|s| s.label_db == g)
            .map(|s| mlp.forward(&s.features).map(|y| y - g))
            .collect::<onebit::Result<_>>()?;
        let bias = errs.iter().sum::<f64>() / errs.len() as f64;
        let mse = errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64;
        total += mse * errs.len() as f64;
        println!("{g:>8.1} {bias:>10.3} {:>10.3}", mse.sqrt());
    }
    println!("overall RMSE {:.3} dB", (total / test.len() as f64).sqrt());
    Ok(())
}
