//! End-to-end acceptance checks at the 32 x 4, 4-QAM desk configuration.
//!
//! Each test prints one `[PASS]` or `[FAIL]` line; run with
//! `cargo test --release --test acceptance -- --nocapture` to see them.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use onebit::detect::{ml_detect_csi, ml_detect_learned, LogLikelihoodScorer};
use onebit::harness::{
    crossing_snr, run_ser_sweep, run_undertrained_sweep, snr_grid, write_csv, ExperimentSpec,
    Method, SnrMode, SweepResult,
};
use onebit::learning::{denoise, learn_dl, learn_idl, LikelihoodTable, TrainConfig};
use onebit::model::{
    one_bit_quantize, real_expand_matrix, real_expand_vector, sign, ChannelMatrix,
    QuantizedObservation, ResponseTable, SymbolBook, SystemConfig,
};
use onebit::normal::{cdf, ln_cdf, quantile};
use onebit::snr::{generate_snr_dataset, mlp_train, Activation, MlpParams, TrainHyperparams};

const SER_TARGET: f64 = 1e-2;
const MIN_ERRORS: u64 = 500;

fn report(name: &str, ok: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn desk() -> ExperimentSpec {
    ExperimentSpec {
        min_errors: MIN_ERRORS,
        master_seed: 2024,
        ..ExperimentSpec::desk_default()
    }
}

fn crossing(result: &SweepResult, detector: &str) -> Option<f64> {
    crossing_snr(&result.ser_curve(detector), SER_TARGET)
}

fn fmt_db(x: Option<f64>) -> String {
    x.map_or("none".into(), |v| format!("{v:.2} dB"))
}

#[test]
fn undertrained_counts_at_top_of_grid() {
    let spec = ExperimentSpec {
        snr_grid_db: vec![30.0],
        detectors: vec![Method::Naive, Method::Dl, Method::Idl(3), Method::Idl(5)],
        num_channel_realizations: 200,
        ..desk()
    };
    let result = run_undertrained_sweep(&spec).unwrap();
    let count = |d: &str| {
        result
            .detector_rows(d)
            .next()
            .unwrap()
            .avg_undertrained
            .unwrap()
    };
    let checks = [
        ("naive", count("naive"), 60.0, 64.0),
        ("dl", count("dl"), 16.0, 24.0),
        ("idl3", count("idl3"), 13.0, 21.0),
        ("idl5", count("idl5"), 5.0, 13.0),
    ];
    let ok = checks.iter().all(|&(_, v, lo, hi)| (lo..=hi).contains(&v));
    let detail: Vec<String> = checks
        .iter()
        .map(|(n, v, lo, hi)| format!("{n} {v:.2} in [{lo}, {hi}]"))
        .collect();
    report(
        "undertrained counts at 30 dB, N_tr = 30",
        ok,
        &detail.join(", "),
    );
    assert!(ok);
}

/// Shared low-SNR sweep around the 1e-2 crossings.
fn waterfall() -> &'static SweepResult {
    static RESULT: OnceLock<SweepResult> = OnceLock::new();
    RESULT.get_or_init(|| {
        let spec = ExperimentSpec {
            snr_grid_db: snr_grid(-5.0, 1.0, 1.0).unwrap(),
            detectors: vec![Method::Dl, Method::Idl(3), Method::CsiMl],
            num_channel_realizations: 3000,
            ..desk()
        };
        run_ser_sweep(&spec).unwrap()
    })
}

#[test]
fn idl_beats_zero_forcing_at_high_snr() {
    let spec = ExperimentSpec {
        snr_grid_db: snr_grid(10.0, 30.0, 2.5).unwrap(),
        detectors: vec![Method::Idl(3), Method::Zf],
        num_channel_realizations: 100,
        ..desk()
    };
    let result = run_ser_sweep(&spec).unwrap();
    let idl = result.ser_curve("idl3");
    let zf = result.ser_curve("zf");
    let ok = idl.iter().zip(&zf).all(|((_, a), (_, b))| a < b);
    let detail: Vec<String> = idl
        .iter()
        .zip(&zf)
        .map(|((s, a), (_, b))| format!("{s}: {a:.1e} vs {b:.1e}"))
        .collect();
    report(
        "iDL-ML below one-bit ZF at every SNR >= 10 dB",
        ok,
        &detail.join("; "),
    );
    assert!(ok);
}

#[test]
fn idl_close_to_csi_ml() {
    let r = waterfall();
    let (idl, csi) = (crossing(r, "idl3"), crossing(r, "csi-ml"));
    let gap = idl.zip(csi).map(|(a, b)| a - b);
    let ok = gap.is_some_and(|g| g <= 1.5);
    report(
        "iDL within 1.5 dB of CSI ML at SER 1e-2",
        ok,
        &format!(
            "idl3 {}, csi-ml {}, gap {}",
            fmt_db(idl),
            fmt_db(csi),
            fmt_db(gap)
        ),
    );
    assert!(ok);
}

#[test]
fn idl_gains_over_fixed_dither() {
    let r = waterfall();
    let (idl, dl) = (crossing(r, "idl3"), crossing(r, "dl"));
    let gain = idl.zip(dl).map(|(a, b)| b - a);
    let ok = gain.is_some_and(|g| g >= 0.5);
    report(
        "iDL (N = 3) at least 0.5 dB better than DL at SER 1e-2",
        ok,
        &format!(
            "idl3 {}, dl {}, gain {}",
            fmt_db(idl),
            fmt_db(dl),
            fmt_db(gain)
        ),
    );
    assert!(ok);
}

/// Grid SNR of the first local minimum, i.e. where the curve turns upward.
fn upturn(curve: &[(f64, f64)]) -> Option<f64> {
    curve.windows(2).find(|w| w[1].1 > w[0].1).map(|w| w[0].0)
}

#[test]
fn naive_learning_bounces_up() {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut upturns = Vec::new();
    for ntr in [30, 50] {
        let spec = ExperimentSpec {
            reps_per_symbol: ntr,
            detectors: vec![Method::Naive],
            num_channel_realizations: 1000,
            ..desk()
        };
        let curve = run_ser_sweep(&spec).unwrap().ser_curve("naive");
        let min = curve.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let top = curve.last().unwrap().1;
        let turn = upturn(&curve);
        ok &= turn.is_some() && top >= 2.0 * min;
        upturns.push(turn);
        lines.push(format!(
            "N_tr={ntr}: upturn after {}, top {top:.2e}, min {min:.2e}, ratio {:.2}",
            turn.map_or("none".into(), |t| format!("{t} dB")),
            top / min
        ));
    }
    let later = matches!((upturns[0], upturns[1]), (Some(a), Some(b)) if b > a);
    ok &= later;
    lines.push(format!("upturn later for N_tr=50: {later}"));
    report("naive learned ML is non-monotonic", ok, &lines.join("; "));
    assert!(ok);
}

#[test]
fn estimated_snr_matches_oracle() {
    let template = SystemConfig::from_snr_db(32, 4, 4, 0.0).unwrap();
    let grid = snr_grid(-10.0, 30.0, 2.0).unwrap();
    let data = generate_snr_dataset(&template, 10, &grid, 300, 77).unwrap();
    let hyper = TrainHyperparams {
        epochs: 100,
        ..Default::default()
    };
    let (mut mlp, train_report) = mlp_train(&data, &hyper).unwrap();
    mlp.feature_block_len = 10;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snr-mlp.txt");
    mlp.write(&path).unwrap();

    let spec = ExperimentSpec {
        snr_grid_db: snr_grid(-4.0, 1.0, 1.0).unwrap(),
        detectors: vec![Method::Idl(3), Method::IdlEstimated(3)],
        num_channel_realizations: 3000,
        snr_mode: SnrMode::Estimated(path),
        ..desk()
    };
    let r = run_ser_sweep(&spec).unwrap();
    let (oracle, est) = (crossing(&r, "idl3"), crossing(&r, "idl3-est"));
    let gap = oracle.zip(est).map(|(a, b)| (b - a).abs());
    let ok = gap.is_some_and(|g| g <= 0.5);
    report(
        "estimated-SNR iDL within 0.5 dB of oracle iDL at SER 1e-2",
        ok,
        &format!(
            "oracle {}, estimated {}, gap {} (estimator validation RMSE {:.2} dB)",
            fmt_db(oracle),
            fmt_db(est),
            fmt_db(gap),
            train_report.best_val_mse.sqrt()
        ),
    );
    assert!(ok);
}

#[test]
fn denoise_inverts_dithered_channel() {
    let n0 = 0.7;
    let mut worst: f64 = 0.0;
    for ratio in [0.0f64, 1.0, 3.0, 10.0] {
        for j in 0..=800 {
            let psi = -4.0 + 0.01 * j as f64;
            let p_hat = cdf(psi / (1.0 + ratio).sqrt());
            let d = denoise(p_hat, ratio * n0, n0, 1e-12);
            worst = worst.max((d.psi - psi).abs());
        }
    }
    let ok = worst < 1e-7;
    report(
        "de-noise round trip",
        ok,
        &format!("max |error| {worst:.2e} < 1e-7"),
    );
    assert!(ok);
}

#[test]
fn true_table_ml_equals_csi_ml_exhaustively() {
    let mut ok = true;
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for (seed, snr_db) in [(1u64, -5.0), (2, 0.0), (3, 5.0)] {
        let config = SystemConfig::from_snr_db(2, 1, 4, snr_db).unwrap();
        let book = SymbolBook::enumerate(&config).unwrap();
        let h = ChannelMatrix::rayleigh(&config, &mut ChaCha8Rng::seed_from_u64(seed));
        let responses = ResponseTable::new(&h, &book, &config).unwrap();
        let scale = (2.0 / config.noise_power()).sqrt();
        let probs: Vec<f64> = (0..book.len())
            .flat_map(|k| {
                responses
                    .row(k)
                    .iter()
                    .map(|m| cdf(scale * m))
                    .collect::<Vec<_>>()
            })
            .collect();
        let table = LikelihoodTable::from_probabilities(book.len(), 4, probs).unwrap();
        let scorer = LogLikelihoodScorer::new(&table);
        for bits in 0u8..16 {
            let signs: Vec<i8> = (0..4)
                .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
                .collect();
            let y = QuantizedObservation::from_signs(signs.clone(), 0).unwrap();
            let learned = ml_detect_learned(&y, &table, &book).unwrap();
            let csi = ml_detect_csi(&y, &h, &book, &config).unwrap();
            ok &= learned.symbol_index == csi.symbol_index;
            for k in 0..book.len() {
                let direct: f64 = signs
                    .iter()
                    .zip(responses.row(k))
                    .map(|(&s, &m)| ln_cdf(f64::from(s) * scale * m))
                    .sum();
                let err = (scorer.score(&signs, k) - direct).abs() / direct.abs().max(1.0);
                worst = worst.max(err);
                cases += 1;
            }
        }
    }
    ok &= worst < 1e-9;
    report(
        "Phi-table ML equals CSI ML on every observation",
        ok,
        &format!("{cases} (observation, candidate) pairs, max relative score error {worst:.1e}"),
    );
    assert!(ok);
}

#[test]
fn fixed_dither_is_single_subblock_idl() {
    let mut ok = true;
    let mut cells = 0;
    for (seed, snr_db, var) in [(5u64, 0.0, 0.5), (6, 20.0, 0.5), (7, 10.0, 2.0)] {
        let config = SystemConfig::from_snr_db(8, 2, 4, snr_db).unwrap();
        let book = SymbolBook::enumerate(&config).unwrap();
        let h = ChannelMatrix::rayleigh(&config, &mut ChaCha8Rng::seed_from_u64(seed));
        let train = TrainConfig::single_block(30, config.noise_power());
        let dl = learn_dl(
            &book,
            &h,
            &config,
            &train,
            var,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap();
        let idl_train = TrainConfig {
            initial_dither_var: var,
            ..TrainConfig::idl(30, 1, 0.0, config.noise_power())
        };
        let (idl, _) = learn_idl(
            &book,
            &h,
            &config,
            &idl_train,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap();
        for k in 0..book.len() {
            for (rows_a, rows_b) in [
                (dl.p_plus_row(k), idl.p_plus_row(k)),
                (dl.ln_plus_row(k), idl.ln_plus_row(k)),
                (dl.ln_minus_row(k), idl.ln_minus_row(k)),
            ] {
                ok &= rows_a
                    .iter()
                    .zip(rows_b)
                    .all(|(a, b)| a.to_bits() == b.to_bits());
                cells += rows_a.len();
            }
        }
    }
    report(
        "DL equals iDL with N = 1, no step",
        ok,
        &format!("{cells} table cells bitwise equal"),
    );
    assert!(ok);
}

fn squared_error_numeric_gradient(p: &MlpParams, x: &[f64], target: f64, h: f64) -> Vec<f64> {
    let base = p.flat();
    let mut q = p.clone();
    (0..base.len())
        .map(|j| {
            let mut v = base.clone();
            v[j] = base[j] + h;
            q.set_flat(&v);
            let up = (q.forward(x).unwrap() - target).powi(2);
            v[j] = base[j] - h;
            q.set_flat(&v);
            let down = (q.forward(x).unwrap() - target).powi(2);
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for activation in [Activation::Relu, Activation::Tanh, Activation::Sigmoid] {
        for _ in 0..40 {
            let p = MlpParams::random(&[8, 5, 1], activation, &mut rng).unwrap();
            let x: Vec<f64> = (0..8).map(|_| rng.sample(StandardNormal)).collect();
            let target: f64 = rng.sample(StandardNormal);
            let (_, grad) = p.loss_and_gradient(&x, target).unwrap();
            let numeric = squared_error_numeric_gradient(&p, &x, target, 1e-5);
            for (a, n) in grad.flat().iter().zip(&numeric) {
                worst = worst.max((a - n).abs() / a.abs().max(n.abs()).max(1e-6));
            }
            points += 1;
        }
    }
    let ok = worst < 1e-4;
    report(
        "MLP gradient versus central differences",
        ok,
        &format!("{points} parameter points, max relative error {worst:.1e}"),
    );
    assert!(ok);
}

fn csv_without_wall_time(result: &SweepResult) -> Vec<String> {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).unwrap();
    String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect()
}

#[test]
fn model_primitives_and_csv_determinism() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut gauss = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let a = DMatrix::from_fn(16, 8, |_, _| gauss());
    let b: Vec<Complex64> = (0..8).map(|_| gauss()).collect();
    let ab: Vec<Complex64> = (0..16)
        .map(|i| (0..8).map(|j| a[(i, j)] * b[j]).sum())
        .collect();
    let lhs = real_expand_vector(&ab);
    let rhs = real_expand_matrix(&a) * nalgebra::DVector::from_vec(real_expand_vector(&b));
    let omega_err = lhs
        .iter()
        .zip(rhs.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let omega_ok = omega_err < 1e-12;

    let q_ok = sign(0.0) == 1
        && sign(-0.0) == 1
        && one_bit_quantize(&[0.0, -1e-300, 1e-300]).unwrap().values() == [1, -1, 1];

    let round_trip = (0..=1000)
        .map(|j| -5.0 + 0.01 * j as f64)
        .map(|x| (quantile(cdf(x)).unwrap() - x).abs())
        .fold(0.0, f64::max);
    let phi_ok = round_trip < 1e-7;

    let spec = ExperimentSpec {
        system: SystemConfig::from_snr_db(8, 2, 4, 0.0).unwrap(),
        snr_grid_db: vec![0.0, 10.0],
        detectors: vec![
            Method::Naive,
            Method::Dl,
            Method::Idl(3),
            Method::Zf,
            Method::CsiMl,
        ],
        num_channel_realizations: 40,
        data_symbols_per_channel: 50,
        min_errors: 30,
        ..desk()
    };
    let csv_ok = csv_without_wall_time(&run_ser_sweep(&spec).unwrap())
        == csv_without_wall_time(&run_ser_sweep(&spec).unwrap())
        && csv_without_wall_time(&run_undertrained_sweep(&spec).unwrap())
            == csv_without_wall_time(&run_undertrained_sweep(&spec).unwrap());

    let ok = omega_ok && q_ok && phi_ok && csv_ok;
    report(
        "real expansion, quantizer boundary, Phi round trip, CSV determinism",
        ok,
        &format!(
            "omega error {omega_err:.1e}, Q(0) = +1 {q_ok}, max |Phi^-1(Phi(x)) - x| {round_trip:.1e}, reruns identical {csv_ok}"
        ),
    );
    assert!(ok);
}
