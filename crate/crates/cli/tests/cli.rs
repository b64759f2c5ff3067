use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fragasym"));
    c.env_remove("FRAGASYM_THREADS");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Kernel and datum specs used across the tests.
fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("h.json", r#"{"form": "homogeneous"}"#),
        ("m.json", r#"{"form": "mitosis"}"#),
        ("bad.json", r#"{"form": "atoms", "atoms": [[0.5, 1.0]]}"#),
        (
            "lg.json",
            r#"{"form": "log_gaussian", "params": {"center": -2.0, "width": 1.0}}"#,
        ),
        ("ind.json", r#"{"form": "indicator", "params": {"lo": 0.0, "hi": 1.0}}"#),
    ];
    for (name, text) in files {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn kernel_check_reports_the_first_moment() {
    let ws = workspace();
    let o = run(ws.path(), &["kernel", "check", "h.json"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let first = report["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["name"] == "first_moment")
        .unwrap();
    assert_eq!(first["value"].as_f64().unwrap(), 1.0);

    // one atom at 1/2 has K(2) = 1/2
    let o = run(ws.path(), &["kernel", "check", "bad.json", "--format", "csv"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("first_moment,0.5,false"));
}

#[test]
fn condition_h_of_mitosis() {
    let ws = workspace();
    let o = run(ws.path(), &["kernel", "condition-h", "m.json"]);
    assert_eq!(code(&o), 0);
    let h: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(h["satisfied"], true);
    assert_eq!(h["theta"].as_f64().unwrap(), 0.5);
    // a density part rules the condition out, which is a result, not an error
    let o = run(ws.path(), &["kernel", "condition-h", "h.json"]);
    assert_eq!(code(&o), 0);
    let h: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(h["satisfied"], false);
}

#[test]
fn regions_of_the_homogeneous_kernel() {
    let ws = workspace();
    let o = run(
        ws.path(),
        &["regions", "--kernel", "h.json", "--datum", "lg.json", "--out", "reg"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ws.path().join("reg/regions.json")).unwrap()).unwrap();
    assert!((doc["p_bar"].as_f64().unwrap() - 0.585786).abs() < 1e-6);
    assert!((doc["q_bar"].as_f64().unwrap() - 3.414214).abs() < 1e-6);
    let curves = fs::read_to_string(ws.path().join("reg/curves.csv")).unwrap();
    assert!(curves.starts_with("s,F,G_p0,G_q0\n"));
    assert_eq!(rows(&curves).len(), 201);
}

#[test]
fn compare_agrees_in_the_reliable_region() {
    let ws = workspace();
    let o = run(
        ws.path(),
        &["compare", "--kernel", "h.json", "--datum", "lg.json", "--t", "1"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let table = rows(&text);
    assert_eq!(table.len(), 64);
    let reliable: Vec<_> = table.iter().filter(|r| r[col("reliable")] == "true").collect();
    assert!(reliable.len() > 32);
    for r in reliable {
        for name in ["dev_grid_picard", "dev_grid_mellin", "dev_picard_mellin"] {
            let d: f64 = r[col(name)].parse().unwrap();
            assert!(d < 1e-3, "{name} = {d} at x = {}", r[col("x")]);
        }
    }
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let ws = workspace();
    let args = ["compare", "--kernel", "h.json", "--datum", "lg.json", "--t", "0.5,1"];
    let once = |threads: &str| {
        bin()
            .current_dir(ws.path())
            .env("FRAGASYM_THREADS", threads)
            .args(args)
            .output()
            .unwrap()
    };
    let (a, b) = (once("1"), once("4"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let sim = |out: &str| {
        let o = run(
            ws.path(),
            &[
                "simulate", "--kernel", "m.json", "--datum", "lg.json", "--tend", "1", "--out", out,
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    };
    sim("s1");
    sim("s2");
    for f in ["mass.csv", "snapshots.csv", "summary.json", "diagnostics.json"] {
        let read = |d: &str| fs::read(ws.path().join(d).join(f)).unwrap();
        assert_eq!(read("s1"), read("s2"), "{f}");
    }
    let mass = fs::read_to_string(ws.path().join("s1/mass.csv")).unwrap();
    assert_eq!(rows(&mass).len(), 3);
}

#[test]
fn config_files_and_flag_overrides() {
    let ws = workspace();
    fs::create_dir(ws.path().join("cfg")).unwrap();
    fs::copy(ws.path().join("lg.json"), ws.path().join("cfg/datum.json")).unwrap();
    let cfg = r#"{
        "kernel": {"form": "homogeneous"},
        "datum": "datum.json",
        "t": [1.0],
        "x_grid": {"log_min": -3.0, "log_max": 0.0, "count": 4},
        "format": "json"
    }"#;
    fs::write(ws.path().join("cfg/exp.json"), cfg).unwrap();
    // the datum path is relative to the config
    let o = run(ws.path(), &["solve-mellin", "cfg/exp.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
    // flags win over the config
    let o = run(
        ws.path(),
        &[
            "solve-mellin",
            "cfg/exp.json",
            "--x",
            "0.5",
            "--format",
            "csv",
            "--out",
            "u.csv",
        ],
    );
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(ws.path().join("u.csv")).unwrap();
    assert!(text.starts_with("t,x,u,"));
    assert_eq!(rows(&text).len(), 1);
}

#[test]
fn asymptote_and_growth_frag_tables() {
    let ws = workspace();
    let o = run(
        ws.path(),
        &[
            "asymptote",
            "--kernel",
            "m.json",
            "--datum",
            "lg.json",
            "--t",
            "10",
            "--x",
            "0.001",
            "--kmax",
            "5",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("t,x,regime,leading,s_plus,series,tail_bound,poisson\n"));
    assert_eq!(rows(&text)[0][2], "T3a_bulk");
    // the lattice series needs atoms
    let o = run(
        ws.path(),
        &[
            "asymptote",
            "--kernel",
            "h.json",
            "--datum",
            "lg.json",
            "--t",
            "10",
            "--x",
            "0.001",
            "--kmax",
            "5",
        ],
    );
    assert_eq!(code(&o), 1);

    let o = run(
        ws.path(),
        &[
            "growth-frag",
            "--kernel",
            "h.json",
            "--datum",
            "lg.json",
            "--t",
            "1",
            "--x",
            "0.5,1",
            "--c",
            "1",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(table.len(), 2);
    assert!(table.iter().all(|r| r[3] == "mixed:to_zero"));
}

#[test]
fn profiles_export_both_profiles() {
    let ws = workspace();
    let o = run(
        ws.path(),
        &[
            "profiles", "--kernel", "m.json", "--datum", "lg.json", "--t", "5", "--format", "json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let p = &v[0];
    assert_eq!(p["r"].as_array().unwrap().len(), 2001);
    assert_eq!(p["r_tilde"].as_array().unwrap().len(), 2001);
    assert!((p["r_moments"]["mean"].as_f64().unwrap() + 2f64.ln()).abs() < 1e-6);
}

#[test]
fn validation_failures_exit_one_without_artifacts() {
    let ws = workspace();
    let o = run(
        ws.path(),
        &[
            "simulate", "--kernel", "m.json", "--datum", "lg.json", "--tend", "1", "--dt", "0.5", "--out", "sim",
        ],
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stability"));
    assert!(!ws.path().join("sim").exists());

    let o = run(
        ws.path(),
        &[
            "solve-mellin",
            "--kernel",
            "nope.json",
            "--datum",
            "lg.json",
            "--t",
            "1",
            "--x",
            "1",
        ],
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.json"));

    let o = run(
        ws.path(),
        &["compare", "--kernel", "h.json", "--datum", "lg.json", "--t", "-1"],
    );
    assert_eq!(code(&o), 1);

    let o = run(ws.path(), &["regions", "--kernel", "h.json", "--wobble", "3"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--wobble"));

    let o = bin()
        .current_dir(ws.path())
        .env("FRAGASYM_THREADS", "zero")
        .args(["kernel", "check", "h.json"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn numerical_failures_exit_two() {
    // the contour integral cannot resolve the jump of an indicator at t ≈ 0
    let ws = workspace();
    let o = run(
        ws.path(),
        &[
            "solve-mellin",
            "--kernel",
            "h.json",
            "--datum",
            "ind.json",
            "--t",
            "1e-9",
            "--x",
            "1",
            "--out",
            "u.csv",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("numerical failure"));
    assert!(!ws.path().join("u.csv").exists());
}
