use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::ValueEnum;
use lql_cli::{analyze, render, run, Command, Envelope, Format, Mode, RunConfig};

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

struct Case {
    stem: String,
    tag: String,
    args: Vec<String>,
}

fn cases() -> Vec<Case> {
    fs::read_to_string(examples().join("cases.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut words = l.split_whitespace().map(String::from);
            Case { stem: words.next().unwrap(), tag: words.next().unwrap(), args: words.collect() }
        })
        .collect()
}

fn config(args: &[String]) -> RunConfig {
    let mut cfg = RunConfig::new(Command::from_str(&args[0], false).unwrap());
    let mut it = args[1..].iter();
    while let Some(flag) = it.next() {
        let value = it.next().unwrap();
        match flag.as_str() {
            "--mode" => cfg.mode = Mode::from_str(value, false).unwrap(),
            "--format" => cfg.format = Format::from_str(value, false).unwrap(),
            "--query" => cfg.query = Some(value.clone()),
            "--initial" => cfg.initial = Some(value.clone()),
            "--steps" => cfg.steps = value.parse().unwrap(),
            other => panic!("flag {other}"),
        }
    }
    cfg
}

fn program(stem: &str) -> String {
    fs::read_to_string(examples().join(format!("{stem}.lql"))).unwrap()
}

#[test]
fn golden_outputs() {
    for case in cases() {
        let expected = fs::read_to_string(examples().join(format!("{}.{}.out", case.stem, case.tag))).unwrap();
        let out = run(&config(&case.args), &program(&case.stem));
        assert_eq!(out.code, 0, "{} {}: {}", case.stem, case.tag, out.stderr);
        assert_eq!(out.stdout, expected, "{} {}", case.stem, case.tag);
    }
}

#[test]
fn output_is_deterministic() {
    for case in cases() {
        let cfg = config(&case.args);
        let text = program(&case.stem);
        assert_eq!(run(&cfg, &text), run(&cfg, &text));
    }
}

#[test]
fn json_round_trip() {
    for case in cases() {
        let mut cfg = config(&case.args);
        cfg.format = Format::Json;
        let env = analyze(&cfg, &program(&case.stem)).unwrap();
        let text = render(&env, Format::Json);
        let back: Envelope = serde_json::from_str(&text).unwrap();
        assert_eq!(back, env, "{} {}", case.stem, case.tag);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["command", "mode", "field", "result"] {
            assert!(v.get(key).is_some(), "{key} missing");
        }
    }
}

#[test]
fn theorems_for_modus_ponens() {
    let out = run(&RunConfig::new(Command::Theorems), &program("modus_ponens"));
    assert!(out.stdout.starts_with("8 theorems\n"));
    assert!(out.stdout.lines().any(|l| l.starts_with("x*y + x + y ")));
}

#[test]
fn goedel_dot_shape() {
    let mut cfg = RunConfig::new(Command::Dynamics);
    cfg.mode = Mode::Boole;
    cfg.format = Format::Dot;
    let dot = run(&cfg, &program("goedel")).stdout;
    assert_eq!(dot.matches("[label=").count() - dot.matches("->").count(), 2);
    assert_eq!(dot.matches("->").count(), 2);
    assert_eq!(dot.matches("peripheries=2").count(), 0);
}

fn lql(args: &[&str]) -> (i32, String, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_lql")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn binary_exit_codes() {
    let ex = |s: &str| examples().join(format!("{s}.lql")).display().to_string();
    let (code, out, _) = lql(&["classify", &ex("carroll"), "--query", "c"]);
    assert_eq!((code, out.as_str()), (0, "c: ambiguous {0,1}\n"));
    assert_eq!(lql(&["theorems", &ex("carroll"), "--max-enum", "100"]).0, 2);
    assert_eq!(lql(&["worksheet", &ex("xy"), "--mode", "boole"]).0, 3);
    assert_eq!(lql(&["dynamics", &ex("quadratic_c")]).0, 3);
    assert_eq!(lql(&["solve", &ex("carroll"), "--format", "dot"]).0, 3);
    let (code, _, err) = lql(&["solve", "/nonexistent.lql"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
    let dir = std::env::temp_dir().join("lql-bad.lql");
    fs::write(&dir, "var x;\n|- x &;\n").unwrap();
    let (code, _, err) = lql(&["solve", &dir.display().to_string()]);
    assert_eq!(code, 1);
    assert!(err.contains("2:"), "{err}");
}
