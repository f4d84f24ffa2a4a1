//! End-to-end runs of the command-line tool.

use std::process::Command;

use nn_elast::harness::study::{parse_csv, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nn-elast"))
}

#[test]
fn verify_unisolvence_prints_determinant_and_pass() {
    let out = bin().args(["verify", "unisolvence"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2025/256"), "{text}");
    assert!(text.lines().any(|l| l == "PASS"), "{text}");
}

#[test]
fn verify_rejects_unknown_suite() {
    let out = bin().args(["verify", "nonsense"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn mesh_info_reports_counts() {
    let out = bin().args(["mesh-info", "--n", "2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("vertices 27, tets 48"), "{text}");
    assert!(text.contains("eta 3"), "{text}");
}

#[test]
fn study_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let mats = dir.path().join("mats");
    let out = bin()
        .args(["study", "--nu", "0.3", "--nu", "0.49", "--levels", "1,2", "--variant", "symmetrized"])
        .arg("--out")
        .arg(&csv)
        .arg("--export-matrix")
        .arg(&mats)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 4);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 19);
        // EOC blank only on the first level of each nu
        assert_eq!(row[15].is_none(), k % 2 == 0);
        assert!(row[6..15].iter().all(|c| c.unwrap() >= 0.0));
    }
    assert!(mats.join("K_n2.coo").exists() && mats.join("b_n2.txt").exists());
}

#[test]
fn study_rejects_invalid_configuration() {
    let out = bin().args(["study", "--nu", "0.5", "--levels", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["study", "--nu", "0.3", "--levels", "2,1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
