//! Acceptance gate: the ten release criteria, one test (and one
//! pass/fail line) each. Criteria 1–9 run the verification suite at
//! full scale; criterion 10 exercises the binary for byte-level
//! determinism. Run with `cargo test --test acceptance -- --nocapture`
//! to see per-check statistics.

use std::process::Command;

use clusterflow_core::verify::{
    check_cluster_scaling, check_duality, check_figure5, check_lemma_identity,
    check_martingale_exact, check_martingale_mc, check_merge_statistics,
    check_pipeline_equivalence, check_theorem1,
};
use clusterflow_core::{CheckResult, CoreError, VerifyOptions};

fn gate(criterion: &str, results: Result<Vec<CheckResult>, CoreError>) {
    let results = results.expect("check ran to completion");
    let mut failed = 0;
    for r in &results {
        println!(
            "{} {}: statistic = {}, threshold = {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.statistic,
            r.threshold
        );
        if r.gate_failed() {
            failed += 1;
        }
    }
    assert_eq!(failed, 0, "criterion {criterion}: {failed} assertion(s) failed");
}

fn opts() -> VerifyOptions {
    VerifyOptions::default()
}

#[test]
fn criterion_01_exact_martingale_oracle() {
    gate("1", check_martingale_exact(&opts()));
}

#[test]
fn criterion_02_monte_carlo_martingale() {
    gate("2", check_martingale_mc(&opts()));
}

#[test]
fn criterion_03_merge_statistics() {
    gate("3", check_merge_statistics(&opts()));
}

#[test]
fn criterion_04_point_gap_equivalence() {
    gate("4", check_pipeline_equivalence(&opts()));
}

#[test]
fn criterion_05_limit_law_ks() {
    gate("5", check_theorem1(&opts()));
}

#[test]
fn criterion_06_boundary_identity() {
    gate("6", check_lemma_identity(&opts()));
}

#[test]
fn criterion_07_duality() {
    gate("7", check_duality(&opts()));
}

#[test]
fn criterion_08_cluster_scaling() {
    gate("8", check_cluster_scaling(&opts()));
}

#[test]
fn criterion_09_step_cdf_convergence() {
    gate("9", check_figure5(&opts()));
}

#[test]
fn criterion_10_determinism_across_threads() {
    const CONFIG: &str = "schema_version = 1\nseed = 3\n[verify]\nprofile = \"quick\"\n";
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let bin = env!("CARGO_BIN_EXE_clusterflow");
    let mut artifacts: Vec<Vec<Vec<u8>>> = Vec::new();
    for (label, threads) in [("one", "1"), ("four", "4"), ("one_again", "1")] {
        let out = dir.path().join(label);
        let status = Command::new(bin)
            .args([
                "verify",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--threads",
                threads,
            ])
            .env_remove("CLUSTERFLOW_THREADS")
            .status()
            .unwrap();
        assert!(status.success(), "verify run {label} failed");
        artifacts.push(
            ["verdict.json", "verdict.csv"]
                .iter()
                .map(|n| std::fs::read(out.join(n)).unwrap())
                .collect(),
        );
    }
    assert_eq!(artifacts[0], artifacts[1], "artifacts differ across --threads");
    assert_eq!(artifacts[0], artifacts[2], "artifacts differ across reruns");
    println!("PASS determinism: byte-identical verdicts across reruns and thread counts");
}
