use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

use corrsim::clustereval::{IRIS_CSV, IRIS_SHA256};

fn corrsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrsim")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn bundled_iris_matches_checksum() {
    let digest = Sha256::digest(IRIS_CSV.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(hex, IRIS_SHA256);
}

#[test]
fn generated_matrices_validate() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"schema_version": 1, "seed": 11, "replicates": 3,
            "template": {"kind": "constant", "delta": 0.25,
              "groups": [{"size": 100, "rho": 0.7}, {"size": 50, "rho": 0.7}, {"size": 80, "rho": 0.4}]},
            "noise": {"epsilon": 0.29, "dim": 25}}"#,
    );
    let out = dir.path().join("out");
    let run = corrsim(&["generate", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let results = manifest["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    assert!(results.iter().all(|r| r["positive_definite"] == true));

    for r in 0..3 {
        let matrix = out.join(format!("matrix_{r:04}.csv"));
        let v = corrsim(&["validate", matrix.to_str().unwrap()]);
        assert!(v.status.success());
        let report: serde_json::Value = serde_json::from_slice(&v.stdout).unwrap();
        assert!(report["condition_number"].as_f64().unwrap().is_finite());
        assert_eq!(report["unit_diagonal"], true);
    }
}

#[test]
fn inadmissible_epsilon_exits_2_and_names_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"schema_version": 1,
            "template": {"kind": "constant", "groups": [{"size": 10, "rho": 0.7}]},
            "noise": {"epsilon": 0.31, "dim": 3}}"#,
    );
    let run = corrsim(&["generate", "--config", &config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("1 - rho_max"));
}

#[test]
fn config_errors_exit_1_and_missing_files_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"schema_version": 1, "sead": 1}"#);
    let out = dir.path().join("o");
    assert_eq!(corrsim(&["generate", "--config", &config, "--out", out.to_str().unwrap()]).status.code(), Some(1));
    let missing = dir.path().join("nope.json");
    let run = corrsim(&["generate", "--config", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(3));
    assert_eq!(corrsim(&["validate", missing.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn validate_identity_and_out_of_range_entries() {
    let dir = tempfile::tempdir().unwrap();
    let identity = dir.path().join("identity.csv");
    std::fs::write(&identity, "1,0,0\n0,1,0\n0,0,1\n").unwrap();
    let v = corrsim(&["validate", identity.to_str().unwrap()]);
    assert!(v.status.success());
    let report: serde_json::Value = serde_json::from_slice(&v.stdout).unwrap();
    assert_eq!(report["condition_number"], 1.0);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,1.2\n1.2,1\n").unwrap();
    let v = corrsim(&["validate", bad.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&v.stdout).unwrap();
    assert_eq!(report["entries_in_range"], false);
    assert_eq!(report["positive_semidefinite"], false);
}

#[test]
fn cluster_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"schema_version": 1, "seed": 3, "replicates": 4, "cluster": {"scenario": "hTC4"}}"#,
    );
    let out = dir.path().join("o");
    let run = corrsim(&["cluster", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("scenario,min_k,median_k,max_k,median_adj_rand"));
    assert!(lines.next().unwrap().starts_with("hTC4,"));
}
