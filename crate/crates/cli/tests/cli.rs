use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sbpg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbpg")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn shipped() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/bglp.toml")
}

const SMALL: [&str; 6] = ["--horizon", "400", "--episodes", "1", "--set", "policy.points_per_dim=6"];

fn train(out: &Path, variant: &str, seed: &str) -> Output {
    let mut args = vec!["train", "--variant", variant, "--seed", seed, "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    sbpg(&args)
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn train_is_deterministic_and_writes_one_manifest() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(code(&train(a.path(), "ds2", "7")), 0);
    assert_eq!(code(&train(b.path(), "ds2", "7")), 0);
    let fa = files(a.path());
    assert_eq!(fa, files(b.path()));
    let names: Vec<_> = fa.iter().map(|(p, _)| p.to_string_lossy().into_owned()).collect();
    assert_eq!(names.iter().filter(|n| n.ends_with("manifest.json")).count(), 1);
    for n in ["trace.csv", "summaries.jsonl", "config.toml", "learner_stats.json"] {
        assert!(names.iter().any(|x| x == n), "{n} missing from {names:?}");
    }
    assert!(names.iter().any(|n| n.starts_with("maps/") && n.ends_with(".map")));

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["variant"], "ds2");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);

    let c = tempfile::tempdir().unwrap();
    assert_eq!(code(&train(c.path(), "ds2", "8")), 0);
    assert_ne!(fs::read(a.path().join("manifest.json")).unwrap(), fs::read(c.path().join("manifest.json")).unwrap());
}

#[test]
fn stack_with_two_objective_players_warns() {
    let d = tempfile::tempdir().unwrap();
    let out = train(d.path(), "stack", "0");
    assert_eq!(code(&out), 0);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warning") && err.contains("belt"), "{err}");
    let ds2 = train(d.path(), "ds2", "0");
    assert!(!String::from_utf8_lossy(&ds2.stderr).contains("warning"));
}

#[test]
fn invalid_inputs_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    assert_eq!(code(&sbpg(&["train", "--config", "/does/not/exist.toml", "--out", out])), 2);
    assert_eq!(code(&sbpg(&["train", "--variant", "nope", "--out", out])), 2);
    assert_eq!(code(&sbpg(&["train", "--set", "plant.hopper_capacity=-1", "--out", out])), 2);
    assert_eq!(code(&sbpg(&["train", "--set", "learner.unknown_key=1", "--out", out])), 2);
    assert_eq!(code(&sbpg(&["verify", "--check", "bogus"])), 2);
}

#[test]
fn verify_passes_on_shipped_config_and_fails_on_planted_violation() {
    let cfg = shipped();
    let before = fs::read(&cfg).unwrap();
    let ok = sbpg(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    assert_eq!(fs::read(&cfg).unwrap(), before);

    let d = tempfile::tempdir().unwrap();
    let bad = sbpg(&[
        "verify",
        "--set",
        "verify.planted_violation=true",
        "--check",
        "cross-partials",
        "--check",
        "potential-alignment",
        "--out",
        d.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&bad), 1);
    let stdout = String::from_utf8_lossy(&bad.stdout);
    assert!(stdout.contains("FAIL cross-partials") && stdout.contains("offending pair"), "{stdout}");
    let report: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn plot_draws_line_charts_and_comparison() {
    let d = tempfile::tempdir().unwrap();
    let runs = d.path().join("runs");
    let mut args = vec!["train", "--variant", "all", "--out", runs.to_str().unwrap()];
    args.extend(SMALL);
    assert_eq!(code(&sbpg(&args)), 0);

    let one = d.path().join("one");
    assert_eq!(code(&sbpg(&["plot", runs.join("ds2").to_str().unwrap(), "--out", one.to_str().unwrap()])), 0);
    let mut names: Vec<_> = fs::read_dir(&one).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["demand.svg", "overflow.svg", "potential.svg", "power.svg"]);

    let all = d.path().join("all");
    assert_eq!(code(&sbpg(&["plot", runs.to_str().unwrap(), "--out", all.to_str().unwrap()])), 0);
    let cmp = fs::read_to_string(all.join("comparison.svg")).unwrap();
    for v in ["sbpg", "ds2", "stack"] {
        assert!(cmp.contains(v));
    }
}

#[test]
fn plot_reports_bad_metrics() {
    let d = tempfile::tempdir().unwrap();
    let run = d.path().join("run");
    assert_eq!(code(&train(&run, "sbpg", "1")), 0);
    let trace = run.join("trace.csv");
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[2] = lines[2].replacen(",", ",notabool,", 1);
    fs::write(&trace, lines.join("\n") + "\n").unwrap();
    let out = sbpg(&["plot", run.to_str().unwrap(), "--out", d.path().join("p").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));

    let empty = d.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(code(&sbpg(&["plot", empty.to_str().unwrap(), "--out", d.path().join("q").to_str().unwrap()])), 1);
}

#[test]
fn sweep_ranks_trials_reproducibly() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("sweep.toml");
    fs::write(
        &cfg,
        "[run]\nepisodes = 1\n[policy]\npoints_per_dim = 6\n[sweep]\nhorizon = 300.0\n\
         [sweep.space.\"ds2.beta_l\"]\nmin = 0.3\nmax = 0.9\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let one = sbpg(&["sweep", "--config", c, "--trials", "1"]);
    assert_eq!(code(&one), 0);
    assert_eq!(String::from_utf8_lossy(&one.stdout).lines().count(), 1);

    let out = d.path().join("s");
    let a = sbpg(&["sweep", "--config", c, "--trials", "3", "--seed", "4", "--out", out.to_str().unwrap()]);
    let b = sbpg(&["sweep", "--config", c, "--trials", "3", "--seed", "4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(report["trials"].as_array().unwrap().len(), 3);

    assert_eq!(code(&sbpg(&["sweep", "--config", c, "--trials", "0"])), 2);
    assert_eq!(code(&sbpg(&["sweep", "--trials", "2"])), 2);
}
