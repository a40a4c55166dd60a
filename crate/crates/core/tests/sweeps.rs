use onebit::harness::{
    emit_csv, parse_csv, run_ser_sweep, ExperimentSpec, Method, SerMode, SweepResult, SweepRow,
};
use onebit::model::SystemConfig;

fn row<'a>(r: &'a SweepResult, detector: &'a str) -> &'a SweepRow {
    r.detector_rows(detector).next().unwrap()
}

#[test]
fn csi_ml_is_never_worse_than_learned_ml() {
    let spec = ExperimentSpec {
        snr_grid_db: vec![0.0],
        detectors: vec![Method::Naive, Method::Dl, Method::Idl(3), Method::CsiMl],
        num_channel_realizations: 500,
        data_symbols_per_channel: 20,
        min_errors: u64::MAX,
        master_seed: 31,
        ..ExperimentSpec::desk_default()
    };
    let r = run_ser_sweep(&spec).unwrap();
    let csi = row(&r, "csi-ml");
    assert_eq!(csi.decisions, 500 * 20 * 4);
    let csi_ser = csi.ser.unwrap();
    for learned in ["naive", "dl", "idl3"] {
        let l = row(&r, learned);
        let p = l.ser.unwrap();
        let se = (p * (1.0 - p) / l.decisions as f64).sqrt();
        assert!(
            csi_ser <= p + 3.0 * se,
            "{learned}: csi {csi_ser} vs {p} ± {se}"
        );
    }
}

#[test]
fn doubling_min_errors_narrows_the_interval() {
    let base = ExperimentSpec {
        system: SystemConfig::from_snr_db(16, 2, 4, 0.0).unwrap(),
        snr_grid_db: vec![-4.0],
        detectors: vec![Method::Idl(3)],
        num_channel_realizations: 100_000,
        data_symbols_per_channel: 10,
        master_seed: 32,
        ..ExperimentSpec::desk_default()
    };
    let half_width = |min_errors: u64| {
        let r = run_ser_sweep(&ExperimentSpec {
            min_errors,
            ..base.clone()
        })
        .unwrap();
        let row = &r.rows[0];
        let p = row.ser.unwrap();
        assert!(row.errors >= min_errors);
        1.96 * (p * (1.0 - p) / row.decisions as f64).sqrt() / p
    };
    let ratio = half_width(200) / half_width(400);
    assert!((ratio - 2f64.sqrt()).abs() < 0.25, "ratio {ratio}");
}

#[test]
fn vector_errors_bound_user_errors() {
    let spec = ExperimentSpec {
        snr_grid_db: vec![-2.0],
        detectors: vec![Method::Idl(3)],
        num_channel_realizations: 30,
        data_symbols_per_channel: 50,
        min_errors: u64::MAX,
        master_seed: 33,
        ..ExperimentSpec::desk_default()
    };
    let user = run_ser_sweep(&spec).unwrap();
    let vector = run_ser_sweep(&ExperimentSpec {
        ser_mode: SerMode::Vector,
        ..spec.clone()
    })
    .unwrap();
    let (u, v) = (&user.rows[0], &vector.rows[0]);
    assert_eq!(u.decisions, 4 * v.decisions);
    // A wrong vector has between one and N_u wrong users.
    assert!(v.errors <= u.errors && u.errors <= 4 * v.errors);
}

#[test]
fn sweep_csv_round_trips_through_disk() {
    let spec = ExperimentSpec {
        system: SystemConfig::from_snr_db(8, 2, 4, 0.0).unwrap(),
        snr_grid_db: vec![-5.0, 5.0, 15.0],
        num_channel_realizations: 10,
        data_symbols_per_channel: 20,
        master_seed: 34,
        ..ExperimentSpec::desk_default()
    };
    let r = run_ser_sweep(&spec).unwrap();
    assert_eq!(r.rows.len(), 3 * spec.detectors.len());
    for row in &r.rows {
        let ser = row.ser.unwrap();
        assert!((0.0..=1.0).contains(&ser));
        assert_eq!(ser, row.errors as f64 / row.decisions as f64);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ser.csv");
    emit_csv(&r, &path).unwrap();
    let parsed = parse_csv(&path).unwrap();
    // Wall time is written to the microsecond; everything else is exact.
    let strip = |rows: &[SweepRow]| -> Vec<SweepRow> {
        rows.iter()
            .map(|row| SweepRow {
                wall_time_s: 0.0,
                ..row.clone()
            })
            .collect()
    };
    assert_eq!(strip(&parsed.rows), strip(&r.rows));
    for (a, b) in parsed.rows.iter().zip(&r.rows) {
        assert!((a.wall_time_s - b.wall_time_s).abs() <= 5e-7);
    }
    let again = dir.path().join("again.csv");
    emit_csv(&parsed, &again).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&again).unwrap()
    );
}
