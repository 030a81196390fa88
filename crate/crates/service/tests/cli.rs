use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use alias_core::replay::{parse_log, replay};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn alias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alias")).args(args).env_remove("ALIAS_TOKEN").output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("not json: {}", String::from_utf8_lossy(&out.stderr)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_then_replay_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let (config, stub) = (fixture("sim_en.toml"), fixture("stub_dose3.toml"));
    let stub_arg = format!("stub:{}", s(&stub));
    let log = dir.path().join("a.jsonl");
    let sim = stdout_json(&alias(&["simulate", "--config", s(&config), "--seed", "7", "--llm", &stub_arg, "--out", s(&log)]));
    assert_eq!(sim["end_reason"], "time_up");

    let again = dir.path().join("b.jsonl");
    alias(&["simulate", "--config", s(&config), "--seed", "7", "--llm", &stub_arg, "--out", s(&again)]);
    assert_eq!(std::fs::read(&log).unwrap(), std::fs::read(&again).unwrap());
    let other = dir.path().join("c.jsonl");
    alias(&["simulate", "--config", s(&config), "--seed", "8", "--llm", &stub_arg, "--out", s(&other)]);
    assert_ne!(std::fs::read(&log).unwrap(), std::fs::read(&other).unwrap());

    let replayed = stdout_json(&alias(&["replay", "--log", s(&log)]));
    assert_eq!(replayed["report"], sim["report"]);
    assert_eq!(replayed["session"]["phase"]["phase"], "ended");
    let events = parse_log(&std::fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(sim["events"], events.len());
    assert_eq!(replayed["report"], serde_json::to_value(replay(&events).unwrap().report).unwrap());

    let analyzed = stdout_json(&alias(&["analyze", "--log", s(&log), "--target", "third_person_s"]));
    assert_eq!(analyzed, sim["report"]);
    let plural = stdout_json(&alias(&["analyze", "--log", s(&log), "--target", "plural_noun"]));
    assert_eq!(plural["target"], "plural_noun");
}

#[test]
fn offline_simulation_uses_bank_clues() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("off.jsonl");
    let sim = stdout_json(&alias(&["simulate", "--config", s(&fixture("sim_en.toml")), "--out", s(&log)]));
    let text = std::fs::read_to_string(&log).unwrap();
    assert!(text.contains("\"generation_fallback\""));
    assert!(sim["report"]["total"].as_u64().unwrap() > 0);
}

#[test]
fn compare_fixture() {
    let out = stdout_json(&alias(&[
        "compare",
        "--robot",
        s(&fixture("robot_8min.jsonl")),
        "--educator",
        s(&fixture("educator_8min.txt")),
        "--target",
        "third_person_s",
        "--speaker",
        "EDU",
    ]));
    assert_eq!(out["robot"]["rate_per_min"], 3.0);
    assert_eq!(out["educator"]["rate_per_min"], 1.25);
    assert!((out["rate_ratio"].as_f64().unwrap() - 2.4).abs() < 1e-12);
}

#[test]
fn analyze_with_custom_lexicon() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = dir.path().join("tiny.lex");
    std::fs::write(&lexicon, "@language sv\n").unwrap();
    let out = alias(&["analyze", "--log", s(&fixture("robot_8min.jsonl")), "--target", "third_person_s", "--lexicon", s(&lexicon)]);
    assert_eq!(stderr_json(&out)["error"]["kind"], "usage");
}

#[test]
fn failures_are_json_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("robot_8min.jsonl")).unwrap();
    let gap: Vec<&str> = text.lines().enumerate().filter(|(i, _)| *i != 6).map(|(_, l)| l).collect();
    let corrupt = dir.path().join("gap.jsonl");
    std::fs::write(&corrupt, gap.join("\n")).unwrap();
    let out = alias(&["replay", "--log", s(&corrupt)]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["error"]["kind"], "corrupt_log");
    assert_eq!(err["error"]["seq"], 6);

    let missing = alias(&["replay", "--log", "/nonexistent/log.jsonl"]);
    assert_eq!(stderr_json(&missing)["error"]["kind"], "log");

    let usage = alias(&["simulate", "--config", "x.toml", "--llm", "gpt", "--out", "y"]);
    assert_eq!(usage.status.code(), Some(2));
    assert_eq!(stderr_json(&usage)["error"]["kind"], "usage");

    let no_token = alias(&["serve"]);
    assert_eq!(stderr_json(&no_token)["error"]["kind"], "usage");

    let bad_target = alias(&["analyze", "--log", s(&fixture("robot_8min.jsonl")), "--target", "dual"]);
    assert_eq!(stderr_json(&bad_target)["error"]["kind"], "morphology");

    let no_speaker = alias(&[
        "compare",
        "--robot",
        s(&fixture("robot_8min.jsonl")),
        "--educator",
        s(&fixture("educator_8min.txt")),
        "--target",
        "third_person_s",
        "--speaker",
        "NOBODY",
    ]);
    assert_eq!(stderr_json(&no_speaker)["error"]["kind"], "compare");

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "words = 5\n[session]\nlanguage = \"english\"\ntarget = \"third_person_s\"\n").unwrap();
    let no_personas = alias(&["simulate", "--config", s(&cfg), "--out", s(&dir.path().join("never.jsonl"))]);
    assert_eq!(stderr_json(&no_personas)["error"]["kind"], "simulation");
    assert!(!dir.path().join("never.jsonl").exists());
}

#[test]
fn help_succeeds() {
    let out = alias(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("simulate"));
}
