use ond_core::analysis::measure_til_decay;
use ond_core::harness::{
    emit_results, format_sig9, parse_csv, parse_json, run_experiment, to_csv_string, ExperimentKind,
    ExperimentSpec, NRule, OutputFormat, ResultRow,
};
use ond_core::{Convention, Error, Scheme};

fn small(kind: ExperimentKind) -> ExperimentSpec {
    ExperimentSpec {
        kind,
        n_list: vec![12, 24],
        snr_db: vec![0.0, 15.0, 30.0],
        schemes: Scheme::ALL.to_vec(),
        trials: 40,
        master_seed: 21,
        ..ExperimentSpec::default()
    }
}

fn round9(v: Option<f64>) -> Option<f64> {
    v.map(|x| format_sig9(x).parse().unwrap())
}

fn rounded(row: &ResultRow) -> ResultRow {
    ResultRow {
        snr_db: round9(row.snr_db),
        mean_sum_rate: round9(row.mean_sum_rate),
        se_sum_rate: round9(row.se_sum_rate),
        mean_kth_min_til: round9(row.mean_kth_min_til),
        se_kth_min_til: round9(row.se_kth_min_til),
        mean_inv_kth_min_til: round9(row.mean_inv_kth_min_til),
        se_inv_kth_min_til: round9(row.se_inv_kth_min_til),
        ks_distance: round9(row.ks_distance),
        ..row.clone()
    }
}

#[test]
fn row_count_is_product_of_sweeps() {
    let rows = run_experiment(&small(ExperimentKind::SchemeComparison)).unwrap();
    assert_eq!(rows.len(), 2 * 3 * 3);
    assert!(rows.iter().all(|r| r.se_sum_rate.unwrap() >= 0.0));

    let spec = ExperimentSpec {
        n_rule: NRule::NoAlternate,
        schemes: vec![Scheme::OndAlternate],
        trials: 2,
        ..small(ExperimentKind::RateVsSnr)
    };
    let rows = run_experiment(&spec).unwrap();
    assert_eq!(rows.len(), 3);
    // snr^2 at 0, 15 and 30 dB, floored at 2K relays.
    let ns: Vec<usize> = rows.iter().map(|r| r.n_relays).collect();
    assert_eq!(ns, vec![4, 1000, 1_000_000]);

    let rows = run_experiment(&small(ExperimentKind::TilVsN)).unwrap();
    assert_eq!(rows.len(), 2);
    let rows = run_experiment(&ExperimentSpec { trials: 500, ..small(ExperimentKind::CdfValidation) }).unwrap();
    assert_eq!(rows.len(), 2);
}

#[test]
fn scaled_rule_is_capped_and_flagged() {
    let spec = ExperimentSpec {
        n_rule: NRule::Alternate,
        n_cap: 5000,
        snr_db: vec![5.0, 10.0],
        schemes: vec![Scheme::OndAlternate],
        trials: 3,
        ..ExperimentSpec::default()
    };
    let rows = run_experiment(&spec).unwrap();
    assert_eq!((rows[0].n_relays, rows[0].n_capped), (100, false));
    assert_eq!((rows[1].n_relays, rows[1].n_capped), (5000, true));
}

#[test]
fn repeated_runs_are_identical() {
    for kind in [ExperimentKind::RateVsSnr, ExperimentKind::TilVsN] {
        let spec = ExperimentSpec { trials: 1, ..small(kind) };
        assert_eq!(run_experiment(&spec).unwrap(), run_experiment(&spec).unwrap());
    }
}

#[test]
fn csv_and_json_roundtrip() {
    let spec = small(ExperimentKind::SchemeComparison);
    let rows = run_experiment(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let csv_path = dir.path().join("out.csv");
    emit_results(&spec, &rows, OutputFormat::Csv, &csv_path).unwrap();
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text.lines().count(), rows.len() + 1);
    let back = parse_csv(&text).unwrap();
    let expect: Vec<ResultRow> = rows.iter().map(rounded).collect();
    assert_eq!(back, expect);
    // Re-emitting parsed rows is a fixed point.
    assert_eq!(to_csv_string(&back).unwrap(), text);

    let json_path = dir.path().join("out.json");
    emit_results(&spec, &rows, OutputFormat::Json, &json_path).unwrap();
    let report = parse_json(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report.rows, rows);
    assert_eq!(report.spec, spec);
    assert_eq!(report.master_seed, 21);
}

#[test]
fn one_row_gives_two_csv_lines() {
    let spec = ExperimentSpec {
        snr_db: vec![10.0],
        trials: 2,
        ..ExperimentSpec::default()
    };
    let rows = run_experiment(&spec).unwrap();
    assert_eq!(to_csv_string(&rows).unwrap().lines().count(), 2);
}

#[test]
fn emit_errors() {
    let spec = ExperimentSpec::default();
    let err = emit_results(&spec, &[], OutputFormat::Csv, std::path::Path::new("x.csv")).unwrap_err();
    assert_eq!(err.category(), "config");
    let rows = run_experiment(&ExperimentSpec { trials: 1, snr_db: vec![0.0], ..spec.clone() }).unwrap();
    let err = emit_results(&spec, &rows, OutputFormat::Csv, std::path::Path::new("/no/such/dir/x.csv")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}

#[test]
fn memory_guard_refuses_with_advice() {
    let spec = ExperimentSpec {
        n_list: vec![1_000_000],
        memory_cap_mb: 16,
        ..ExperimentSpec::default()
    };
    match run_experiment(&spec).unwrap_err() {
        Error::Resource(msg) => assert!(msg.contains("memory_cap_mb")),
        other => panic!("expected a resource error, got {other:?}"),
    }
}

#[test]
fn invalid_specs_name_the_field() {
    let cases = [
        (ExperimentSpec { trials: 0, ..ExperimentSpec::default() }, "trials"),
        (ExperimentSpec { snr_db: vec![], ..ExperimentSpec::default() }, "snr_db"),
        (ExperimentSpec { l_slots: 4, ..ExperimentSpec::default() }, "l_slots"),
        (ExperimentSpec { n_list: vec![3], ..ExperimentSpec::default() }, "n_list"),
    ];
    for (spec, field) in cases {
        match run_experiment(&spec).unwrap_err() {
            Error::Config { field: f, .. } => assert_eq!(f, field),
            other => panic!("expected a config error for {field}, got {other:?}"),
        }
    }
}

#[test]
fn til_decreases_with_relay_count() {
    let grid = [8, 32, 128, 512];
    let samples = measure_til_decay(2, &grid, 400, 5, Convention::default()).unwrap();
    for w in samples.windows(2) {
        // Separated by several standard errors at these sizes.
        let gap = w[0].mean_kth_min_til - w[1].mean_kth_min_til;
        let se = (w[0].se_kth_min_til.powi(2) + w[1].se_kth_min_til.powi(2)).sqrt();
        assert!(gap > 3.0 * se, "{w:?}");
        assert!(w[1].mean_inv_kth_min_til > w[0].mean_inv_kth_min_til);
    }
}

#[test]
fn toml_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(
        &path,
        "kind = \"scheme-comparison\"\nschemes = [\"ond-alternate\", \"max-min-snr\"]\nn_rule = \"no-alternate\"\nconvention = \"unit-per-component\"\n",
    )
    .unwrap();
    let spec = ExperimentSpec::from_toml_file(&path).unwrap();
    assert_eq!(spec.kind, ExperimentKind::SchemeComparison);
    assert_eq!(spec.n_rule, NRule::NoAlternate);
    assert_eq!(spec.convention, Convention::UnitPerComponent);
    std::fs::write(&path, "trails = 3\n").unwrap();
    assert!(ExperimentSpec::from_toml_file(&path).is_err());
}
