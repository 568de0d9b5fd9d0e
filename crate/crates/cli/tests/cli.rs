use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subgrammar")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        assert!(run(&["fixture", "-o", p(&root)]).status.success());
        Workspace { _dir: dir, root }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Trains and extracts; returns the subgrammar path.
    fn pipeline(&self, prune: bool) -> PathBuf {
        let g = self.path("biography.grammar.json");
        let c = self.path("biography.corpus.jsonl");
        let (goal, log, sub) = (self.path("goal.txt"), self.path("log.json"), self.path("sub.json"));
        let t = run(&["train", "-g", p(&g), "-c", p(&c), "-o", p(&goal), "--log", p(&log)]);
        assert!(t.status.success(), "{t:?}");
        let mut args = vec!["extract", "-g", p(&g), "-t", p(&goal), "-o", p(&sub), "--log", p(&log)];
        if prune {
            args.push("--prune-choosers");
        }
        let e = run(&args);
        assert!(e.status.success(), "{e:?}");
        sub
    }
}

#[test]
fn train_writes_goal_curve_and_log() {
    let w = Workspace::new();
    let (goal, curve, log) = (w.path("goal.txt"), w.path("curve.csv"), w.path("log.json"));
    let o = run(&[
        "train",
        "-g",
        p(&w.path("biography.grammar.json")),
        "-c",
        p(&w.path("biography.corpus.jsonl")),
        "-o",
        p(&goal),
        "--curve",
        p(&curve),
        "--log",
        p(&log),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("32 of 42 types used"));
    assert_eq!(std::fs::read_to_string(&goal).unwrap().lines().filter(|l| !l.starts_with('#')).count(), 32);
    let csv = std::fs::read_to_string(&curve).unwrap();
    assert!(csv.starts_with("sentence,cumulative_types\n1,21\n"));
    assert!(std::fs::read_to_string(&log).unwrap().contains("speechact"));
}

#[test]
fn extracted_grammar_verifies() {
    let w = Workspace::new();
    for prune in [false, true] {
        let sub = w.pipeline(prune);
        let o = run(&[
            "verify",
            "-f",
            p(&w.path("biography.grammar.json")),
            "-g",
            p(&sub),
            "-c",
            p(&w.path("biography.corpus.jsonl")),
        ]);
        assert!(o.status.success(), "{o:?}");
        assert!(stdout(&o).contains("50 of 50 sentences equal"));
    }
}

#[test]
fn out_of_domain_exit_code_and_fallback() {
    let w = Workspace::new();
    let sub = w.pipeline(false);
    let ood = w.path("out_of_domain.jsonl");
    let o = run(&["generate", "-g", p(&sub), "-s", p(&ood)]);
    assert_eq!(o.status.code(), Some(5));
    let o = run(&["generate", "-g", p(&sub), "-s", p(&ood), "--fallback", p(&w.path("biography.grammar.json"))]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "Anni Albers admired Paul Klee.\t(fallback)\n");
    let o = run(&["verify", "-f", p(&w.path("biography.grammar.json")), "-g", p(&sub), "-c", p(&ood)]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn json_errors() {
    let w = Workspace::new();
    let bad = w.path("bad.json");
    std::fs::write(&bad, "{\"format_version\": 1,\n oops}").unwrap();
    let o = run(&["--json-errors", "systems", "-g", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "parse");
    assert_eq!(err["exit_code"], 2);
    let o = run(&["systems", "-g", p(&w.path("missing.json"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn generation_failure_exit_code() {
    let w = Workspace::new();
    let specs = w.path("bad.jsonl");
    std::fs::write(&specs, "{\"root\":\"s\",\"concepts\":{\"s\":{}}}\n").unwrap();
    let o = run(&["generate", "-g", p(&w.path("biography.grammar.json")), "-s", p(&specs)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn mismatch_exit_code() {
    let w = Workspace::new();
    // the full grammar against a grammar that spells the copula differently
    let full = w.path("biography.grammar.json");
    let text = std::fs::read_to_string(&full).unwrap();
    let other = w.path("other.json");
    std::fs::write(&other, text.replacen("\"spelling\": \"was\"", "\"spelling\": \"is\"", 1)).unwrap();
    let o = run(&["verify", "-f", p(&full), "-g", p(&other), "-c", p(&w.path("biography.corpus.jsonl"))]);
    assert_eq!(o.status.code(), Some(4), "{o:?}");
}

#[test]
fn bench_json_and_sequential_agree() {
    let w = Workspace::new();
    let sub = w.pipeline(false);
    let args = |seq: bool| {
        let mut a = vec![
            "bench".to_string(),
            "-f".into(),
            p(&w.path("biography.grammar.json")).into(),
            "-g".into(),
            p(&sub).into(),
            "-c".into(),
            p(&w.path("biography.corpus.jsonl")).into(),
            "--json".into(),
        ];
        if seq {
            a.push("--sequential".into());
        }
        a
    };
    let par = Command::new(env!("CARGO_BIN_EXE_subgrammar")).args(args(false)).output().unwrap();
    let seq = Command::new(env!("CARGO_BIN_EXE_subgrammar")).args(args(true)).output().unwrap();
    assert!(par.status.success() && seq.status.success());
    assert_eq!(par.stdout, seq.stdout);
    let report: serde_json::Value = serde_json::from_slice(&par.stdout).unwrap();
    assert_eq!(report["rows"][0]["label"], "worst");
}

#[test]
fn systems_listing() {
    let w = Workspace::new();
    let o = run(&["systems", "-g", p(&w.path("biography.grammar.json"))]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 17);
    assert!(out.contains("number_type: (OR class_name wh_nominal) = singular | plural."));
}
