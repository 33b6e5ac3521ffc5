//! End-to-end checks of the command-line surface.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gatewalk"))
}

fn write(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const STAR3: &str = r#"{
  "vertices": 4,
  "edges": [[0,1],[0,2],[0,3]],
  "terminals": [
    {"name": "a", "vertex": 1, "kind": "input"},
    {"name": "b", "vertex": 2, "kind": "output"},
    {"name": "c", "vertex": 3, "kind": "output"}
  ]
}"#;

#[test]
fn sweep_widget_reports_perfect_transmission_at_quarter_band() {
    let out = bin()
        .args([
            "sweep",
            "--widget",
            "phase",
            "--channels",
            "in:out",
            "--kmin",
            "-0.7853981633974483",
            "--kmax",
            "-0.5",
            "--points",
            "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let first_row = text.lines().nth(1).unwrap();
    let abs2: f64 = first_row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((abs2 - 1.0).abs() < 1e-10, "|T|^2 = {abs2}");
}

#[test]
fn sweep_graph_file_wire_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let wire3 = r#"{
  "vertices": 4,
  "edges": [[0,1],[1,2],[2,3]],
  "terminals": [
    {"name": "in", "vertex": 0, "kind": "input"},
    {"name": "out", "vertex": 3, "kind": "output"}
  ]
}"#;
    let path = write(dir.path(), "wire3.json", wire3);
    let out = bin()
        .args([
            "sweep",
            "--graph",
            path.to_str().unwrap(),
            "--channels",
            "in:out",
            "--points",
            "40",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    for line in String::from_utf8(out.stdout).unwrap().lines().skip(1) {
        let abs2: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((abs2 - 1.0).abs() < 1e-9);
    }
}

#[test]
fn sweep_requires_a_source() {
    let out = bin().args(["sweep", "--points", "5"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn unreadable_graph_file_fails() {
    let out = bin()
        .args(["sweep", "--graph", "/nonexistent/g.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn bound_finds_the_star_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "star3.json", STAR3);
    let out = bin()
        .args(["bound", "--graph", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.346573590280"), "{text}");
}

#[test]
fn transfer_has_unit_transmission_at_quarter_band() {
    let out = bin()
        .args([
            "transfer",
            "--md",
            "10",
            "--kmin",
            "-0.7853981633974483",
            "--kmax",
            "-0.78",
            "--points",
            "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let abs2: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(5)
        .unwrap()
        .parse()
        .unwrap();
    assert!((abs2 - 1.0).abs() < 1e-9, "|T|^2 = {abs2}");
}

#[test]
fn compose_check_passes_for_catalog_pairs() {
    // a single-channel widget lifts to its two-wire gate layer against the
    // basis-changing widget
    for spec in ["phase,basis", "phase,separator", "basis,basis"] {
        let out = bin()
            .args(["compose-check", "--widgets", spec, "--k", "-0.9"])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{spec}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("max deviation"), "{text}");
    }
    // the four-channel crossing cannot pair with a two-channel chain
    let out = bin()
        .args(["compose-check", "--widgets", "cnot,basis", "--k", "-0.9"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn evolve_writes_a_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "star3.json", STAR3);
    let out_file = dir.path().join("dist.csv");
    let out = bin()
        .args([
            "evolve",
            "--graph",
            path.to_str().unwrap(),
            "--vertex",
            "0",
            "--time",
            "1.5",
            "--out",
            out_file.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_file).unwrap();
    let total: f64 = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn run_from_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(dir.path(), "uc.txt", "UC 1\n");
    let report_path = dir.path().join("report.json");
    let config = write(
        dir.path(),
        "run.cfg",
        &format!(
            "circuit = {}\nx = 80\nmd = 2\nsigma = 10\nmode = packet\n",
            circuit.display()
        ),
    );
    let out = bin()
        .args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--sigma",
            "12", // overrides the config value
            "--report",
            report_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let p0 = report["conditional_distribution"]["0"].as_f64().unwrap();
    let p1 = report["conditional_distribution"]["1"].as_f64().unwrap();
    assert!((p0 + p1 - 1.0).abs() < 1e-9);
    assert!((p0 - 0.5).abs() < 0.06, "p0 = {p0}");
    assert_eq!(report["start_offset"].as_u64().unwrap(), 80);
}

#[test]
fn run_missing_circuit_fails_with_diagnostic() {
    let out = bin()
        .args(["run", "--circuit", "/nonexistent/circuit.txt"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("circuit"), "{err}");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let st = bin()
            .args([
                "sweep",
                "--widget",
                "basis",
                "--points",
                "50",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(st.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn figures_emits_five_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "figures",
            "--outdir",
            dir.path().to_str().unwrap(),
            "--points",
            "60",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    for name in [
        "phase_transmission.csv",
        "basis_transmission.csv",
        "filter_transmission.csv",
        "transfer_eigenvalues.csv",
        "separator_transmission.csv",
    ] {
        let path = dir.path().join(name);
        assert!(path.exists(), "{name} missing");
        assert!(std::fs::read_to_string(path).unwrap().lines().count() > 30);
    }
}
