use std::process::Command;

use fluxindex_cli::{run_experiment, sweep, write_csv, ExperimentConfig, ResultRecord, Status};

const CHAIN: &str = r#"
kind = "mb-index"
strip_width = 2

[model]
kind = "staggered_chain"
l1 = 8
staggering = 2.0
particles = 4

[process]
type = "translation"
shift = [2, 0]
"#;

const BOSONS: &str = r#"
kind = "braid"
strip_width = 1

[model]
kind = "hofstadter"
l1 = 4
l2 = 4
flux = "1/4"
statistics = "hardcore_boson"
particles = 2

[process]
type = "translation"
shift = [1, 0]
"#;

fn with_kind(text: &str, kind: &str) -> ExperimentConfig {
    let mut t: toml::Table = text.parse().unwrap();
    t.insert("kind".into(), toml::Value::String(kind.into()));
    ExperimentConfig::from_toml(&toml::to_string(&t).unwrap()).unwrap()
}

fn run(cfg: &ExperimentConfig) -> ResultRecord {
    let r = run_experiment(cfg).unwrap();
    assert_eq!(r.status, Status::Ok, "{r:?}");
    r
}

#[test]
fn identity_process_has_zero_index() {
    let cfg = ExperimentConfig::from_toml(&CHAIN.replace("type = \"translation\"\nshift = [2, 0]", "type = \"identity\"")).unwrap();
    let r = run(&cfg);
    assert_eq!(r.value, Some(0.0));
    for k in ["commutator", "split_residual", "integrality_spread", "imaginary"] {
        assert!(r.diagnostics[k].abs() < 1e-10, "{k}");
    }
    assert_eq!(r.gates["quantized"], true);
}

#[test]
fn chain_translation_pumps_one_particle() {
    let r = run(&ExperimentConfig::from_toml(CHAIN).unwrap());
    assert!((r.value.unwrap() - 1.0).abs() < 1e-10);
    let lsm = run(&with_kind(&CHAIN.replace("strip_width = 2", "strip_width = 2\nshift = 2"), "lsm"));
    assert!((lsm.diagnostics["rho"] - 1.0).abs() < 1e-10);
}

#[test]
fn records_are_deterministic_and_rerunnable() {
    let cfg = ExperimentConfig::from_toml(CHAIN).unwrap();
    let a = run(&cfg);
    let b = run(&cfg);
    assert_eq!(a.numeric_payload(), b.numeric_payload());
    let back = ResultRecord::from_json(&a.to_json()).unwrap();
    assert_eq!(back.config, cfg);
    assert_eq!(ExperimentConfig::from_toml(&back.config.to_toml()).unwrap(), cfg);
    assert_eq!(run(&back.config).numeric_payload(), a.numeric_payload());
}

#[test]
fn ff_index_on_hofstadter_third() {
    let cfg = ExperimentConfig::from_toml(
        r#"
kind = "ff-index"
axis = "2"
[model]
kind = "hofstadter"
l1 = 12
l2 = 12
flux = "1/3"
[process]
type = "flux"
axis = "1"
"#,
    )
    .unwrap();
    let r = run(&cfg);
    // Finite-size value at strip width 3; the index approaches 1 as L grows.
    assert!((r.value.unwrap() - 0.640157).abs() < 1e-5, "{:?}", r.value);
    assert_eq!(r.gates["quantized"], false);
}

#[test]
fn fractional_candidate_reports_its_gates() {
    let r = run(&ExperimentConfig::from_toml(BOSONS).unwrap());
    assert_eq!(r.diagnostics["p"], 2.0);
    assert!(r.value.is_some());
    assert_eq!(r.gates["multiplet"], true);
    assert_eq!(r.gates["topological_order"], false);
    assert!((r.diagnostics["topological_order"] - 0.1301).abs() < 1e-3);
}

#[test]
fn two_dimensional_drivers_on_the_boson_sector() {
    let hall = run(&with_kind(BOSONS, "hall"));
    assert!(hall.diagnostics.contains_key("sigma"));
    let adz = run(&with_kind(BOSONS, "adz"));
    assert!((adz.diagnostics["rho"] - 0.5).abs() < 1e-10);
    let expected = fluxindex::transport::adz_check(0.5, fluxindex::models::Flux::new(1, 1), hall.diagnostics["sigma"], 2);
    assert!((adz.value.unwrap() - expected).abs() < 1e-12);
    let anyon = run(&with_kind(BOSONS, "anyon"));
    assert!(anyon.diagnostics["charge_sum"] < 1e-10);
    assert_eq!(anyon.diagnostics["empty_loop_phase"], 0.0);
    assert_eq!(anyon.gates["charge_conservation"], true);
}

#[test]
fn compute_failures_land_in_the_record() {
    // Two strips of width 2 do not fit on a 4-site ring.
    let cfg = ExperimentConfig::from_toml(&CHAIN.replace("l1 = 8", "l1 = 4").replace("particles = 4", "particles = 2")).unwrap();
    let r = run_experiment(&cfg).unwrap();
    assert!(matches!(&r.status, Status::Error { message } if message.contains("overlap")), "{r:?}");
}

#[test]
fn sweep_over_staggering_keeps_the_index() {
    let t: toml::Table = CHAIN.parse().unwrap();
    let values: Vec<String> = ["1.0", "2.0", "4.0"].iter().map(|s| s.to_string()).collect();
    let pts = sweep(&t, &["model.staggering".into()], &values, 2).unwrap();
    assert_eq!(pts.iter().map(|p| p.value.as_str()).collect::<Vec<_>>(), ["1.0", "2.0", "4.0"]);
    for p in &pts {
        assert!((p.record.as_ref().unwrap().value.unwrap() - 1.0).abs() < 1e-10);
    }
    let mut csv = Vec::new();
    write_csv(&pts, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().next().unwrap().starts_with("value,status,result,"));
}

#[test]
fn sweep_over_size_improves_integrality() {
    let t: toml::Table = r#"
kind = "proof-chain"
[model]
kind = "hofstadter"
l1 = 8
l2 = 8
flux = "1/4"
"#
    .parse()
    .unwrap();
    let pts = sweep(&t, &["model.l1".into(), "model.l2".into()], &["8".into(), "12".into()], 1).unwrap();
    let d: Vec<f64> = pts.iter().map(|p| p.record.as_ref().unwrap().diagnostics["integrality"]).collect();
    assert!(d[1] < d[0], "{d:?}");
}

#[test]
fn sweep_over_phi_grid_converges() {
    let t: toml::Table = CHAIN.replace("kind = \"mb-index\"", "kind = \"braid\"").parse().unwrap();
    let values: Vec<String> = ["25", "50", "100"].iter().map(|s| s.to_string()).collect();
    let pts = sweep(&t, &["phi_steps".into()], &values, 1).unwrap();
    let ode: Vec<f64> = pts.iter().map(|p| p.record.as_ref().unwrap().diagnostics["ode_residual"]).collect();
    // The residual settles on the finite-size floor set by ‖[Z(φ), P]‖; halving the
    // step shrinks the change by far more than half.
    assert!((ode[2] - ode[1]).abs() < 0.2 * (ode[1] - ode[0]).abs(), "{ode:?}");
}

#[test]
fn sweep_records_invalid_points_and_continues() {
    let t: toml::Table = CHAIN.parse().unwrap();
    let pts = sweep(&t, &["strip_width".into()], &["0".into(), "2".into()], 1).unwrap();
    assert!(pts[0].record.as_ref().is_err_and(|e| e.contains("strip_width")));
    assert!(pts[1].record.is_ok());
}

#[test]
fn binary_writes_records_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("chain.toml");
    std::fs::write(&cfg, CHAIN).unwrap();
    let out = dir.path().join("out");
    let bin = env!("CARGO_BIN_EXE_fluxindex");
    let s = Command::new(bin)
        .args(["mb-index", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--seed", "3"])
        .output()
        .unwrap();
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let rec = ResultRecord::from_json(&std::fs::read_to_string(out.join("mb-index.json")).unwrap()).unwrap();
    assert_eq!(rec.config.seed, 3);

    let s = Command::new(bin)
        .args(["sweep", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()])
        .args(["--field", "model.staggering", "--values", "1.0,2.0", "--workers", "2"])
        .output()
        .unwrap();
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    assert!(out.join("sweep.csv").exists() && out.join("mb-index-001.json").exists());

    std::fs::write(&cfg, CHAIN.replace("strip_width = 2", "strip_width = 0")).unwrap();
    let s = Command::new(bin).args(["lsm", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(s.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&s.stderr).contains("strip_width"));
}
