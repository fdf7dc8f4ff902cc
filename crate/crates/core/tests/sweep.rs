use nanopull::error::NanoError;
use nanopull::force::{linear_fit, ForceMethod};
use nanopull::model::RawParams;
use nanopull::sweep_engine::*;

fn cold() -> RawParams {
    RawParams { temperature_k: 0.0, ..RawParams::default() }
}

fn small_frequency_sweep() -> SweepSpec {
    let mut spec = SweepSpec::new(Axis::Frequency, 190.0, 230.0, 6, cold());
    spec.n_segments = 41;
    spec
}

#[test]
fn spec_validation() {
    let ok = small_frequency_sweep();
    assert!(ok.validate().is_ok());
    let bad = [
        SweepSpec { points: 1, ..ok.clone() },
        SweepSpec { start: 230.0, end: 190.0, ..ok.clone() },
        SweepSpec { methods: vec![], ..ok.clone() },
        SweepSpec { n_segments: 5, ..ok.clone() },
        SweepSpec { local_override: Some(-1.0), ..ok.clone() },
        SweepSpec::new(Axis::IncidenceAngle, 10.0, 120.0, 5, cold()),
        SweepSpec::new(Axis::HalfLength, -5.0, 10.0, 5, cold()),
        SweepSpec::new(Axis::Frequency, 150.0, 250.0, 5, RawParams { m_index: 13, ..cold() }),
    ];
    for s in &bad {
        assert!(s.validate().is_err(), "{s:?}");
        assert!(run_sweep(s).is_err());
    }
}

#[test]
fn axis_values_are_inclusive() {
    let v = small_frequency_sweep().values();
    assert_eq!(v.len(), 6);
    assert_eq!(v[0], 190.0);
    assert_eq!(v[5], 230.0);
    assert!((v[1] - 198.0).abs() < 1e-12);
}

#[test]
fn parallel_and_serial_runs_are_identical() {
    let spec = small_frequency_sweep();
    let serial = SweepSpec { parallel: false, ..spec.clone() };
    let a = run_sweep(&spec).unwrap();
    let b = run_sweep(&serial).unwrap();
    assert_eq!(a.rows, b.rows);
    assert!(a.all_ok());
    assert_eq!(to_csv(&a).unwrap(), to_csv(&b).unwrap());
    let again = run_sweep(&spec).unwrap();
    assert_eq!(to_csv(&a).unwrap(), to_csv(&again).unwrap());
}

#[test]
fn csv_layout() {
    let r = run_sweep(&small_frequency_sweep()).unwrap();
    let csv = to_csv(&r).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "f_THz");
    for col in ["Fz_N_numeric", "Fz_fN_numeric", "pulling_numeric", "Fz_fN_analytic", "Fz_fN_local", "regime"] {
        assert!(header.contains(&col), "missing {col} in {header:?}");
    }
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|l| l.split(',').count() == header.len()));
}

#[test]
fn json_output_round_trips_through_the_config_reader() {
    let spec = SweepSpec { name: Some("roundtrip".into()), local_override: Some(1e3), ..small_frequency_sweep() };
    let result = run_sweep(&spec).unwrap();
    let text = to_json(&result).unwrap();
    let back = SweepSpec::from_json_str(&text).unwrap();
    assert_eq!(back, spec);
    let parsed: SweepResult = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.metadata, result.metadata);
    assert_eq!(parsed.rows, result.rows);
    assert!(SweepSpec::from_json_str(r#"{"axis": "frequency", "start": 1, "end": 2, "points": 2, "oops": 1}"#).is_err());
}

#[test]
fn emit_writes_files_and_refuses_empty_results() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_sweep(&small_frequency_sweep()).unwrap();
    let csv_path = dir.path().join("out.csv");
    let json_path = dir.path().join("out.json");
    emit(&result, Format::from_path(&csv_path), &csv_path).unwrap();
    emit(&result, Format::from_path(&json_path), &json_path).unwrap();
    assert_eq!(std::fs::read_to_string(&csv_path).unwrap(), to_csv(&result).unwrap());
    assert!(std::fs::read_to_string(&json_path).unwrap().contains("\"metadata\""));

    let empty = SweepResult { rows: vec![], ..result.clone() };
    let path = dir.path().join("empty.csv");
    assert!(matches!(emit(&empty, Format::Csv, &path), Err(NanoError::EmptyResult)));
    assert!(!path.exists());

    let missing = dir.path().join("no/such/dir/out.csv");
    match emit(&result, Format::Csv, &missing) {
        Err(NanoError::Io { path, .. }) => assert_eq!(path, missing),
        other => panic!("expected an I/O error, got {other:?}"),
    }
}

#[test]
fn rows_satisfy_conductivity_invariants() {
    let result = run_sweep(&small_frequency_sweep()).unwrap();
    for row in &result.rows {
        let r = row.response.as_ref().unwrap();
        let back = r.alpha_tilde * r.alpha_tilde * r.xi_total;
        assert!((back - r.sigma_total).norm() < 1e-12 * r.sigma_total.norm());
        assert!(r.sigma_total.re >= 0.0);
        let d = row.diagnostics.as_ref().unwrap();
        assert!(d.residual_norm < 1e-8);
        assert_eq!(row.forces.len(), 3);
    }
}

#[test]
fn angle_sweep_reuses_one_factorisation_without_changing_results() {
    let mut spec = SweepSpec::new(Axis::IncidenceAngle, 10.0, 80.0, 4, cold());
    spec.n_segments = 61;
    let shared = run_sweep(&spec).unwrap();
    for row in &shared.rows {
        let mut single = SweepSpec::new(Axis::Frequency, 199.0, 200.0, 2, RawParams { theta0_deg: row.axis_value, ..cold() });
        single.n_segments = 61;
        let independent = run_sweep(&single).unwrap();
        let expect = independent.rows[1].force(ForceMethod::Numeric).unwrap();
        let got = row.force(ForceMethod::Numeric).unwrap();
        assert!((got - expect).abs() <= 1e-10 * expect.abs(), "θ = {}: {got} vs {expect}", row.axis_value);
    }
}

#[test]
fn local_length_sweep_is_linear() {
    let mut spec = SweepSpec::new(Axis::HalfLength, 50.0, 200.0, 4, RawParams { frequency_thz: 215.0, ..cold() });
    spec.n_segments = 101;
    spec.local_override = Some(1e3);
    spec.methods = vec![ForceMethod::Numeric, ForceMethod::LocalEq16];
    let result = run_sweep(&spec).unwrap();
    let series = result.series(ForceMethod::Numeric);
    let xs: Vec<f64> = series.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1).collect();
    let (_, _, r2) = linear_fit(&xs, &ys);
    assert!(r2 > 0.999, "R² = {r2}");
    assert!(ys.iter().all(|&y| y > 0.0));
}

#[test]
fn row_errors_mark_the_sweep_as_failed() {
    let mut result = run_sweep(&small_frequency_sweep()).unwrap();
    assert!(result.all_ok());
    result.rows[2].forces[0].result = None;
    result.rows[2].forces[0].error = Some("solver failed".into());
    assert!(!result.rows[2].is_ok());
    assert!(!result.all_ok());
    assert_eq!(result.series(ForceMethod::Numeric).len(), 5);
    let csv = to_csv(&result).unwrap();
    assert!(csv.lines().nth(3).unwrap().contains("solver failed"));
}

#[test]
fn presets_are_valid() {
    let all = presets();
    let names: Vec<&str> = all.iter().map(|p| p.name).collect();
    for expected in ["fig3", "fig3_local", "fig4", "fig5a", "fig5a_local", "fig5b", "fig5b_local", "fig6"] {
        assert!(names.contains(&expected), "missing preset {expected}");
    }
    for p in &all {
        p.spec.validate().unwrap();
        assert_eq!(preset(p.name).unwrap().spec, p.spec);
        assert!(!p.description.is_empty());
    }
    assert!(preset("fig7").is_none());
    let fig3 = preset("fig3").unwrap().spec;
    assert_eq!((fig3.start, fig3.end, fig3.points, fig3.n_segments), (150.0, 250.0, 101, 411));
}
