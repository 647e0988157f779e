//! The command line binary end to end.

use nlpearson::cli::{CommandKind, Grid, JobConfig};
use std::collections::BTreeSet;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlpearson"))
}

fn schema() -> serde_json::Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/config.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn keys(v: &serde_json::Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn schema_covers_every_config_key() {
    let mut job = JobConfig::new(CommandKind::Simulate);
    job.family = Some(nlpearson::pearson::FamilySpec::Ou { theta: 1.0, mu: 0.0, sigma: 1.0 });
    job.phi = Some(nlpearson::bernstein::PhiSpec::Gamma {});
    job.grids.t = Some(Grid("1".into()));
    job.grids.x = Some(Grid("0:1:3".into()));
    job.grids.lambda = Some(Grid("1".into()));
    job.x0 = Some(0.0);
    job.s = Some(0.0);
    job.simulation.bins = Some(3);
    job.simulation.range = Some([0.0, 1.0]);
    job.simulation.trajectories = Some("a.nlpt".into());
    job.output = Some("a.csv".into());
    let dumped: serde_json::Value = serde_json::from_str(&job.to_json()).unwrap();
    let s = schema();
    let props = &s["properties"];
    assert_eq!(keys(&dumped), keys(props));
    for section in ["grids", "numeric", "solve", "simulation"] {
        assert_eq!(keys(&dumped[section]), keys(&props[section]["properties"]), "{section}");
    }
    let commands: Vec<String> = props["command"]["enum"].as_array().unwrap().iter().map(|c| c.to_string()).collect();
    for c in [CommandKind::PhiEval, CommandKind::Relax, CommandKind::Density, CommandKind::Solve] {
        assert!(commands.contains(&serde_json::to_string(&c).unwrap()));
    }
}

#[test]
fn classify_prints_the_label() {
    let out = bin().args(["classify", "--phi", r#"{"kind":"gamma"}"#]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "short-range");
}

#[test]
fn solve_at_time_zero_reproduces_the_datum() {
    let out =
        bin().args(["solve", "--mode", "backward", "--datum", "Q2", "--t", "0", "--x-grid=-2:2:5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (ix, iv) = (header.iter().position(|h| *h == "x").unwrap(), header.iter().position(|h| *h == "value").unwrap());
    for l in lines {
        let f: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
        // normalized Hermite Q_2 for the unit OU process
        let q2 = (f[ix] * f[ix] - 1.0) / 2f64.sqrt();
        assert!((f[iv] - q2).abs() < 1e-12, "{l}");
    }
}

#[test]
fn config_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    let dump = bin()
        .args([
            "--dump-config",
            "relax",
            "--phi",
            r#"{"kind":"stable","alpha":0.5}"#,
            "--t-grid",
            "0:2:5",
            "--lambda",
            "1",
        ])
        .output()
        .unwrap();
    assert!(dump.status.success());
    std::fs::write(&cfg, &dump.stdout).unwrap();
    let a = bin().arg("--config").arg(&cfg).output().unwrap();
    let b = bin()
        .args(["relax", "--phi", r#"{"kind":"stable","alpha":0.5}"#, "--t-grid", "0:2:5", "--lambda", "1"])
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 6);
}

#[test]
fn exit_codes_by_error_class() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["classify", "--phi", r#"{"kind":"stable","alpha":0.5,"extra":1}"#]), Some(2));
    assert_eq!(code(&["density", "--family", r#"{"kind":"ou","theta":-1,"mu":0,"sigma":1}"#]), Some(4));
    assert_eq!(code(&["correlation", "--paths", "10"]), Some(2));
    assert_eq!(code(&["--config", "/nonexistent/job.json"]), Some(2));
}
