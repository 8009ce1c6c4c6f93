mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::data_dir;

fn enaqt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enaqt")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn fmo_run() -> String {
    data_dir().join("fmo_run.json").display().to_string()
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("enaqt-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_is_deterministic_and_sidecar_reproduces_run() {
    let dir = scratch_dir("determinism");
    let (a, b, c) = (dir.join("a.csv"), dir.join("b.csv"), dir.join("c.csv"));
    for out in [&a, &b] {
        let o = enaqt(&["simulate", "--config", &fmo_run(), "--steps", "120", "--out", path_str(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());

    let meta_path = dir.join("a.csv.meta.json");
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&meta_path).unwrap()).unwrap();
    assert_eq!(meta["steps"], 120);
    assert_eq!(meta["provenance"]["backend"], "operator");
    assert_eq!(meta["provenance"]["config_sha256"].as_str().unwrap().len(), 64);

    let o = enaqt(&["simulate", "--config", path_str(&meta_path), "--out", path_str(&c)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(first, std::fs::read(&c).unwrap());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn csv_has_header_and_one_row_per_step() {
    let o = enaqt(&["simulate", "--config", &fmo_run(), "--steps", "5"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t_fs,site1,site2,site3,site4,site5,site6,site7,trace,min_eig");
    assert_eq!(lines.len(), 7);
    assert!(lines[6].starts_with("50,"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("final sink population"));
}

#[test]
fn frozen_model_gives_identical_rows() {
    let dir = scratch_dir("frozen");
    std::fs::write(
        dir.join("model.json"),
        r#"{ "site_energies_cm1": [0, 0, 0], "couplings_cm1": [[0,0,0],[0,0,0],[0,0,0]],
             "bath": { "rates_per_fs": [[0,0,0],[0,0,0],[0,0,0]] }, "sink_sites": [3] }"#,
    )
    .unwrap();
    std::fs::write(dir.join("run.json"), r#"{ "model": "model.json", "initial_site": 2, "dt_fs": 5, "steps": 1 }"#)
        .unwrap();
    let o = enaqt(&["simulate", "--config", path_str(&dir.join("run.json"))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    let values = |row: &str| row.split_once(',').unwrap().1.to_string();
    assert_eq!(values(rows[0]), values(rows[1]));
    assert_eq!(values(rows[0]), "0,1,0,1,0");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn configuration_errors_exit_with_one() {
    let missing = enaqt(&["simulate", "--config", "/nonexistent/run.json"]);
    assert_eq!(missing.status.code(), Some(1));

    let chi = enaqt(&["simulate", "--config", &fmo_run(), "--chi", "1.5"]);
    assert_eq!(chi.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&chi.stderr).contains("chi"));

    let site = enaqt(&["simulate", "--config", &fmo_run(), "--initial-site", "9"]);
    assert_eq!(site.status.code(), Some(1));

    let dir = scratch_dir("badjson");
    std::fs::write(dir.join("run.json"), r#"{ "model": "x.json", "stepz": 3 }"#).unwrap();
    let bad = enaqt(&["simulate", "--config", path_str(&dir.join("run.json"))]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("stepz"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn diverging_run_exits_with_two() {
    // 40 fs RK4 sub-steps are outside the integrator's stability region
    let o = enaqt(&["simulate", "--config", &fmo_run(), "--backend", "lindblad-oracle", "--dt-fs", "400", "--steps", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("state became invalid"));
}

#[test]
fn gatecount_table_and_gate_export_match_golden_files() {
    let o = enaqt(&["gatecount", "--dims", "2,7"]);
    assert!(o.status.success());
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        table,
        "dim,jumps,gates_per_jump,jump_gates,coherent_gates,elementary_gates,expanded_gates,qubits\n\
         2,2,2,4,1,5,9,4\n\
         7,42,6,252,1,253,565,8\n"
    );

    let dir = scratch_dir("gates");
    for (flag, golden) in [(None, "dimer_gates.txt"), (Some("--decomposed"), "dimer_gates_decomposed.txt")] {
        let out = dir.join(golden);
        let run = fixture("dimer_run.json");
        let mut args = vec!["gatecount", "--dims", "2", "--config", path_str(&run), "--gates-out", path_str(&out)];
        args.extend(flag);
        let o = enaqt(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(fixture(golden)).unwrap());
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn circuit_verify_passes_on_shipped_model() {
    let o = enaqt(&["circuit-verify", "--config", &fmo_run(), "--scales", "1,0.5"]);
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(o.status.success(), "{report}");
    assert!(report.trim_end().ends_with("PASS"));
}

#[test]
fn sweep_and_oracle_produce_tables() {
    let o = enaqt(&["sweep-chi", "--config", &fmo_run(), "--chis", "0,1", "--steps", "100", "--at-fs", "1000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "chi,efficiency");
    assert_eq!(rows.len(), 3);

    let o = enaqt(&["oracle", "--config", &fmo_run(), "--steps", "20", "--dt-list", "20,10,5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let convergence = String::from_utf8(o.stderr).unwrap();
    assert!(convergence.starts_with("dt_fs,frob_distance,ratio\n20,"));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 22);
}
