use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mqslab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqslab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str], out: &Path) {
    let o = mqslab(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

/// Data files of a run, timing excluded, sorted by name.
fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with("_timing.json"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

const SMALL: &[&str] = &["--g", "0.4", "--alpha2", "1", "--x-count", "6"];

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = [&["--command", "fig2a"], SMALL].concat();
    run_ok(&[&args[..], &["--threads", "1"]].concat(), a.path());
    run_ok(&[&args[..], &["--threads", "3"]].concat(), b.path());
    let (fa, fb) = (data_files(a.path()), data_files(b.path()));
    assert_eq!(fa.len(), 4, "{:?}", fa.iter().map(|f| &f.0).collect::<Vec<_>>());
    assert_eq!(fa, fb);
    assert!(a.path().join("fig2a_timing.json").exists());
}

#[test]
fn csv_layout() {
    let dir = TempDir::new().unwrap();
    run_ok(&[&["--command", "fig2a"], SMALL].concat(), dir.path());
    let path = dir.path().join("fig2a_equatorial-mqs_g0.4.csv");
    let bytes = fs::read(&path).unwrap();
    assert!(!bytes.contains(&b'\r'));
    assert_eq!(bytes.last(), Some(&b'\n'));
    let (header, rows) = rows(&path);
    assert_eq!(header, ["x", "r", "d"]);
    assert_eq!(rows.len(), 6 + 20);
    assert_eq!(rows[0], [0.0, 0.0, 1.0]);
    for line in fs::read_to_string(&path).unwrap().lines().skip(1) {
        for field in line.split(',') {
            let digits = field
                .trim_start_matches(['0', '.'])
                .chars()
                .filter(char::is_ascii_digit)
                .count();
            assert!(digits <= 9, "{field}");
        }
    }
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0] && w[1][2] <= w[0][2]));

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("fig2a_manifest.json")).unwrap()).unwrap();
    let curves = manifest["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 3);
    assert_eq!(curves[0]["family"], "equatorial-mqs");
    assert!(curves[0]["cutoff"].as_u64().unwrap() > 0);
    assert_eq!(manifest["config"]["tail_tol"], 1e-8);
}

#[test]
fn json_mirrors_csv() {
    let (c, j) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = [&["--command", "fig2b"], SMALL].concat();
    run_ok(&args, c.path());
    run_ok(&[&args[..], &["--format", "json"]].concat(), j.path());
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(j.path().join("fig2b.json")).unwrap()).unwrap();
    assert_eq!(doc["manifest"]["config"]["format"], "json");
    let curve = &doc["curves"][0];
    assert_eq!(curve["id"], "pole-pair_g0.4");
    let (_, rows) = rows(&c.path().join("fig2b_pole-pair_g0.4.csv"));
    for (col, name) in ["x", "r", "d"].iter().enumerate() {
        let values: Vec<f64> = curve["columns"][name]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert_eq!(values, rows.iter().map(|r| r[col]).collect::<Vec<_>>(), "column {name}");
    }
}

#[test]
fn pole_pair_decays_below_equatorial() {
    let dir = TempDir::new().unwrap();
    let grid = [
        "--g",
        "0.4",
        "--alpha2",
        "1",
        "--spacing",
        "uniform",
        "--x-max",
        "1",
        "--x-count",
        "2",
    ];
    run_ok(&[&["--command", "fig2a"], &grid[..]].concat(), dir.path());
    run_ok(&[&["--command", "fig2b"], &grid[..]].concat(), dir.path());
    let (_, eq) = rows(&dir.path().join("fig2a_equatorial-mqs_g0.4.csv"));
    let (_, pole) = rows(&dir.path().join("fig2b_pole-pair_g0.4.csv"));
    assert_eq!(eq[1][0], 1.0);
    assert!(pole[1][2] < eq[1][2]);
}

#[test]
fn filtered_curves_carry_success_probability() {
    let dir = TempDir::new().unwrap();
    let args = [
        "--command",
        "fig3a",
        "--g",
        "0.4",
        "--k",
        "0",
        "--k",
        "1",
        "--k",
        "2",
        "--x-count",
        "3",
    ];
    run_ok(&args, dir.path());
    let curves: Vec<Vec<Vec<f64>>> = (0..3)
        .map(|k| {
            let (header, rows) = rows(&dir.path().join(format!("fig3a_filtered_g0.4_k{k}.csv")));
            assert_eq!(header, ["x", "r", "d", "success_prob"]);
            rows
        })
        .collect();
    assert!(dir.path().join("fig3a_equatorial-mqs_g0.4.csv").exists());
    for c in &curves {
        assert!((c[0][2] - 1.0).abs() < 1e-6);
    }
    for i in 0..3 {
        assert!(curves.windows(2).all(|w| w[1][i][3] <= w[0][i][3]), "row {i}");
    }
}

#[test]
fn sweep_needs_a_family() {
    let dir = TempDir::new().unwrap();
    assert_eq!(mqslab(&["--command", "sweep"], dir.path()).status.code(), Some(2));
    run_ok(
        &[
            "--command",
            "sweep",
            "--family",
            "coherent-pointer",
            "--alpha2",
            "2",
            "--x-count",
            "4",
        ],
        dir.path(),
    );
    assert!(dir.path().join("sweep_coherent-pointer_a2-2.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str], out: &Path| mqslab(args, out).status.code();
    assert_eq!(code(&["--command", "fig2a", "--g", "9"], dir.path()), Some(2));
    assert_eq!(code(&["--command", "fig2a", "--tail-tol", "1"], dir.path()), Some(2));
    assert_eq!(code(&["--command", "nope"], dir.path()), Some(2));

    let blocker = dir.path().join("file");
    fs::write(&blocker, b"").unwrap();
    assert_eq!(code(&[&["--command", "fig2a"], SMALL].concat(), &blocker), Some(4));

    // a cutoff too small for the requested gain is a numerical failure
    assert_eq!(
        code(&["--command", "fig2a", "--g", "1.3", "--cutoff", "3"], dir.path()),
        Some(3)
    );
}

#[test]
fn validate_passes_on_a_small_configuration() {
    let dir = TempDir::new().unwrap();
    let o = mqslab(
        &[
            "--command",
            "validate",
            "--g",
            "0.4",
            "--alpha2",
            "1",
            "--format",
            "json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("validate.json")).unwrap()).unwrap();
    assert_eq!(doc["report"]["passed"], true);
    assert!(doc["report"]["checks"].as_array().unwrap().len() > 10);
}

#[test]
fn validate_reports_a_starved_cutoff() {
    let dir = TempDir::new().unwrap();
    let o = mqslab(
        &["--command", "validate", "--g", "1.3", "--cutoff", "3", "--alpha2", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    let report = fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    let build = report
        .lines()
        .find(|l| l.starts_with("equatorial-build g=1.3"))
        .expect("build check present");
    assert!(build.contains(",fail,") && build.contains("truncated tail"), "{build}");
}
