//! Replays the checked-in fuzz corpus through the fuzz targets' invariants on stable.

use std::path::PathBuf;

use fluxindex::models::Flux;
use fluxindex_cli::{ExperimentConfig, ResultRecord};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter_map(|p| std::fs::read(&p).ok().and_then(|b| String::from_utf8(b).ok()).map(|s| (p, s)))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (path, text) in seeds("config_toml") {
        if let Ok(cfg) = ExperimentConfig::from_toml(&text) {
            assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg, "{}", path.display());
            accepted += 1;
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn record_seeds() {
    let mut accepted = 0;
    for (path, text) in seeds("result_record") {
        if let Ok(rec) = ResultRecord::from_json(&text) {
            let back = ResultRecord::from_json(&rec.to_json()).unwrap();
            assert_eq!(back.numeric_payload(), rec.numeric_payload(), "{}", path.display());
            accepted += 1;
        }
    }
    assert_eq!(accepted, 2);
}

#[test]
fn flux_seeds() {
    for (path, text) in seeds("flux_rational") {
        if let Ok(f) = text.parse::<Flux>() {
            assert_eq!(f.to_string().parse::<Flux>().unwrap(), f, "{}", path.display());
            let json = serde_json::to_string(&f).unwrap();
            assert_eq!(serde_json::from_str::<Flux>(&json).unwrap(), f);
        }
        let _ = serde_json::from_str::<Flux>(&text);
    }
}
