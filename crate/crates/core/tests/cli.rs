use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use noma_gssk::output::{parse_sweep_json, SWEEP_HEADER};

fn sim(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sim"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("NOMA_SIM_THREADS", t),
        None => cmd.env_remove("NOMA_SIM_THREADS"),
    };
    cmd.output().expect("sim runs")
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write_scenario(dir: &Path, body: &str) -> String {
    let p = dir.join("s.json");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = r#"{
  "name": "small",
  "metric": "cell_edge_ber",
  "snr_db": {"start": 0, "stop": 20, "step": 10},
  "trials": 1500,
  "seed": 3,
  "schemes": [
    {"scheme": "noma_gssk", "m_t": 4, "m_a": 2},
    {"scheme": "mimo_noma"}
  ]
}"#;

#[test]
fn table1_prints_flags() {
    let out = sim(&["table1"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("3840.000000"));
    assert!(text.contains("793080.0000"));
    assert!(text.contains("MATCH(corrected)"));
    assert_eq!(text.matches("MISMATCH").count(), 3);
}

#[test]
fn bound_prints_one_row_per_snr() {
    let out = sim(&["bound", "--mt", "5", "--ma", "2", "--snr-db", "0,10,20"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n_h=8 b_h=3"));
    assert_eq!(text.lines().count(), 5);
    let bad = sim(&["bound", "--mt", "2", "--ma", "3", "--snr-db", "10"], None);
    assert!(!bad.status.success());
}

#[test]
fn run_writes_csv_and_flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), SMALL);
    let csv = dir.path().join("out.csv");
    let out = sim(&["run", &path, "--output", csv.to_str().unwrap(), "--seed", "8", "--trials", "700"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let echo = String::from_utf8(out.stderr).unwrap();
    assert!(echo.contains("\"n_h\": 4"));
    assert!(echo.contains("\"m_t\": 2"));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SWEEP_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.ends_with(",700,8")));
    assert!(rows[0].starts_with("0.000000000,noma_gssk,cell_edge_ber,"));
    assert!(rows[0].split(',').nth(3).unwrap().contains('e'));
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), SMALL);
    let out = sim(&["run", &path, "--format", "json", "--quiet"], None);
    assert!(out.status.success());
    let runs = parse_sweep_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[0].result.points.len(), 3);
    assert_eq!(runs[1].label, "mimo_noma");
}

#[test]
fn csv_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), SMALL);
    let one = sim(&["run", &path, "--quiet"], Some("1"));
    let three = sim(&["run", &path, "--quiet"], Some("3"));
    let all = sim(&["run", &path, "--quiet"], None);
    assert!(one.status.success() && three.status.success() && all.status.success());
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(one.stdout, all.stdout);
}

#[test]
fn diagnostics_and_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "{\n  \"name\": \"x\",\n  \"metric\": \"cell_edge_ber\",,\n}");
    let out = sim(&["run", &path], None);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let path = write_scenario(
        dir.path(),
        r#"{"name": "x", "metric": "cell_edge_ber", "snr_db": [0], "system": {"scheme": "noma_gssk", "m_t": 2, "m_a": 3}}"#,
    );
    let out = sim(&["run", &path], None);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("m_a <= m_t"));

    let out = sim(&["run", "/nonexistent/scenario.json"], None);
    assert!(!out.status.success());
    let out = sim(&["table1"], Some("lots"));
    assert!(!out.status.success());
}

#[test]
fn shipped_scenarios_parse() {
    for name in ["fig3a", "fig3b", "fig3c", "fig3d", "table1"] {
        let text = fs::read_to_string(scenarios().join(format!("{name}.json"))).unwrap();
        let s = noma_gssk::scenario::parse_scenario(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(s.name, name);
    }
}

#[test]
fn capacity_scenario_has_one_row_per_scheme_and_antenna_count() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig3a.csv");
    let file = scenarios().join("fig3a.json");
    let out = sim(&["run", file.to_str().unwrap(), "--output", csv.to_str().unwrap(), "--quiet"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 4);
}

#[test]
fn table1_scenario_writes_status_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t1.csv");
    let file = scenarios().join("table1.json");
    let out = sim(&["run", file.to_str().unwrap(), "--output", csv.to_str().unwrap(), "--quiet"], None);
    assert!(out.status.success());
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("row,scheme,published,verbatim,corrected,status\n"));
    assert_eq!(text.lines().count(), 7);
}
