use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TOY: &str = include_str!("../examples/toy.toml");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beliefsynth"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("toy.toml"), TOY).unwrap();
    dir
}

#[test]
fn toy_pipeline_writes_artifacts() {
    let dir = setup();
    let p = dir.path();
    let out = p.join("out/toy");
    assert_eq!(code(&run(p, &["abstract", "--config", "toy.toml"])), 0);
    for f in ["raw_abstraction.json", "belief_abstraction.json", "stats.json"] {
        let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join(f)).unwrap()).unwrap();
        assert_eq!(doc["v"], 1);
        assert_eq!(doc["digest"].as_str().unwrap().len(), 16);
        assert!(doc["checksum"].is_string());
    }
    assert_eq!(code(&run(p, &["synthesize", "--config", "toy.toml"])), 0);
    let first = fs::read(out.join("controller.json")).unwrap();
    assert_eq!(code(&run(p, &["synthesize", "--config", "toy.toml"])), 0);
    assert_eq!(fs::read(out.join("controller.json")).unwrap(), first);

    let sim = run(p, &["simulate", "--config", "toy.toml"]);
    assert_eq!(code(&sim), 0, "{}", String::from_utf8_lossy(&sim.stderr));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,mode,switch,action,x1,x2,xhat1,xhat2,t_d,belief_I_lo,belief_I_hi,belief_J_lo,belief_J_hi,belief_m"
    );
    assert_eq!(trace.lines().filter(|l| !l.starts_with('#')).count(), 2001);
    assert!(trace.contains("# verdict=satisfied-at-desk-scale"));
    assert!(run(p, &["simulate", "--config", "toy.toml"]).status.success());
    assert_eq!(fs::read_to_string(out.join("trace.csv")).unwrap(), trace);

    // explicit controller path
    fs::copy(out.join("controller.json"), p.join("c.json")).unwrap();
    assert_eq!(code(&run(p, &["simulate", "--config", "toy.toml", "--controller", "c.json"])), 0);
}

#[test]
fn exit_codes() {
    let dir = setup();
    let p = dir.path();
    assert_eq!(code(&run(p, &["synthesize", "--config", "toy.toml"])), 0);
    // losing start
    assert_eq!(code(&run(p, &["synthesize", "--config", "toy.toml", "--x-init", "5.9,5.9"])), 3);
    // configuration errors
    assert_eq!(code(&run(p, &["abstract", "--config", "toy.toml", "--target-x2", "5,7"])), 2);
    assert_eq!(code(&run(p, &["abstract", "--config", "missing.toml"])), 2);
    // a different model digest, then a tampered file
    assert_eq!(code(&run(p, &["synthesize", "--config", "toy.toml"])), 0);
    assert_eq!(code(&run(p, &["simulate", "--config", "toy.toml", "--grid-n2", "7"])), 4);
    let ctl = p.join("out/toy/controller.json");
    let text = fs::read_to_string(&ctl).unwrap().replacen("\"stay\"", "\"reach\"", 1);
    fs::write(&ctl, text).unwrap();
    assert_eq!(code(&run(p, &["simulate", "--config", "toy.toml"])), 4);
    // zero-length trace cannot settle
    assert_eq!(code(&run(p, &["synthesize", "--config", "toy.toml"])), 0);
    assert_eq!(code(&run(p, &["simulate", "--config", "toy.toml", "--horizon", "0"])), 6);
}

#[test]
fn toy_baseline() {
    let dir = setup();
    let p = dir.path();
    let o = run(p, &["baseline", "--config", "toy.toml"]);
    let report = p.join("out/toy/baseline_report.json");
    assert!(report.exists());
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    let chosen = &doc["search"]["chosen"];
    assert_eq!(code(&o) == 0, !chosen.is_null());
    if !chosen.is_null() {
        assert!(p.join("out/toy/baseline_trace.csv").exists());
    }
}
