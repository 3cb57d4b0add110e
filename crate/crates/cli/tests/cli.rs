use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(fixture("golden").join(name))
        .unwrap()
        .trim_end()
        .to_string()
}

fn congame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_congame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = congame(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn value(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_matches_goldens() {
    let b = ok(&["solve", path(&fixture("buchi_example.json"))]);
    assert_eq!(value(&b), value(&golden("buchi_example_ranks.json")));
    let c = ok(&["solve", path(&fixture("cobuchi_example.json"))]);
    assert_eq!(value(&c), value(&golden("cobuchi_example_ranks.json")));
}

#[test]
fn empty_target_buchi_has_empty_winning() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(fixture("buchi_example.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&src).unwrap();
    v["objective"]["target"] = serde_json::json!([]);
    let game = dir.path().join("g.json");
    std::fs::write(&game, v.to_string()).unwrap();
    let out: serde_json::Value = serde_json::from_str(&ok(&["solve", path(&game)])).unwrap();
    assert_eq!(out["winning"], serde_json::json!([]));
}

#[test]
fn template_groups_at_s2() {
    let out = ok(&["template", path(&fixture("cobuchi_example.json"))]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["live"]["S2"], serde_json::json!([["a", "y"], ["b"], ["x"]]));
    let s = ok(&["template", path(&fixture("safety_gadget.json"))]);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["unsafe"]["g"], serde_json::json!(["u"]));
}

#[test]
fn nonmax_strategies_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for (game, strat, verdict) in [
        ("buchi_example.json", "buchi_nonmax_strategy.json", "buchi_nonmax_verdict.json"),
        ("cobuchi_example.json", "cobuchi_nonmax_strategy.json", "cobuchi_nonmax_verdict.json"),
    ] {
        let t = dir.path().join("t.json");
        ok(&["template", path(&fixture(game)), "-o", path(&t)]);
        let out = ok(&["check", path(&fixture(game)), path(&t), path(&fixture(strat))]);
        assert_eq!(value(&out), value(&golden(verdict)));
    }
}

#[test]
fn extract_check_verify_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let game = fixture("buchi_example.json");
    let t = dir.path().join("t.json");
    let s = dir.path().join("s.json");
    ok(&["template", path(&game), "-o", path(&t)]);
    ok(&["extract", path(&game), "--template", path(&t), "-o", path(&s)]);
    let verdict = ok(&["check", path(&game), path(&t), path(&s)]);
    assert_eq!(value(&verdict), serde_json::json!({"verdict": "compliant"}));
    let won = ok(&["verify", path(&game), path(&s)]);
    assert_eq!(value(&won), serde_json::json!({"winning": ["A", "B", "C"]}));
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let game = fixture("cobuchi_example.json");
    let s = dir.path().join("s.json");
    ok(&["extract", path(&game), "-o", path(&s)]);
    let args = |jobs: &'static str| {
        vec![
            "simulate".to_string(),
            path(&game).into(),
            path(&s).into(),
            "--start".into(),
            "S4".into(),
            "--episodes".into(),
            "8".into(),
            "--horizon".into(),
            "60".into(),
            "--seed".into(),
            "7".into(),
            "--opponent".into(),
            "greedy".into(),
            "--jobs".into(),
            jobs.into(),
        ]
    };
    let run = |jobs| {
        let a = args(jobs);
        ok(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("4"));
    assert_eq!(one.lines().count(), 8);
    let first: serde_json::Value = serde_json::from_str(one.lines().next().unwrap()).unwrap();
    assert_eq!(first["seed"], 7);
    assert_eq!(first["steps"].as_array().unwrap().len(), 60);
}

#[test]
fn adapt_with_fixed_opponent() {
    let dir = tempfile::tempdir().unwrap();
    let game = fixture("cobuchi_example.json");
    let reward = dir.path().join("r.json");
    let opp = dir.path().join("o.json");
    std::fs::write(&reward, r#"{"S0": 1.0}"#).unwrap();
    std::fs::write(&opp, r#"{"S2": {"d": 0.6, "e": 0.2, "f": 0.2}}"#).unwrap();
    let args = [
        "adapt",
        path(&game),
        path(&reward),
        "--start",
        "S2",
        "--horizon",
        "200",
        "--opponent",
        "fixed",
        "--opponent-file",
        path(&opp),
    ];
    let out = congame(&args);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("step,state,chosen_action,opponent_action,reward,cumulative")
    );
    assert_eq!(lines.count(), 200);
    assert!(String::from_utf8_lossy(&out.stderr).contains("violations: 0"));
    assert_eq!(csv, ok(&args));
}

#[test]
fn convert_trivial_pair() {
    let out = ok(&["convert", path(&fixture("tb_pair.json"))]);
    assert_eq!(value(&out), value(&golden("tb_pair_converted.json")));
}

#[test]
fn compose_and_incremental() {
    let dir = tempfile::tempdir().unwrap();
    let game = fixture("buchi_example.json");
    let t = dir.path().join("t.json");
    ok(&["template", path(&game), "-o", path(&t)]);
    let single: serde_json::Value =
        serde_json::from_str(&ok(&["compose", path(&game), path(&t)])).unwrap();
    let original: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&t).unwrap()).unwrap();
    assert_eq!(single["parts"], 1);
    assert_eq!(single["conflicts"], serde_json::json!([]));
    assert_eq!(single["merged"]["live"], original["live"]);

    let objs = dir.path().join("objs.json");
    std::fs::write(
        &objs,
        r#"[{"kind":"buchi","target":["C"]},{"kind":"buchi","target":["A"]}]"#,
    )
    .unwrap();
    let csv = ok(&["incremental", path(&game), path(&objs)]);
    assert!(csv.starts_with("objective_size,objectives_added,conflict_fraction\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn batch_is_deterministic_across_jobs() {
    let run = |jobs: &str| ok(&["batch", "--games", "15", "--seed", "3", "--jobs", jobs]);
    let a = run("1");
    assert_eq!(a, run("3"));
    assert_eq!(a.lines().count(), 13);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"states":["A"],"p1_actions":{"A":["a"]},"p2_actions":{"A":["b"]},"transitions":[],"objective":{"kind":"buchi","target":["A"]}}"#).unwrap();
    for args in [
        vec!["solve", path(&bad)],
        vec!["solve", "/definitely/missing.json"],
        vec!["verify", path(&fixture("buchi_example.json")), path(&fixture("buchi_nonmax_strategy.json"))],
        vec!["extract", path(&fixture("buchi_example.json")), "--eps-live", "1.5"],
        vec!["simulate", path(&fixture("buchi_example.json")), path(&fixture("buchi_nonmax_strategy.json")), "--start", "Z"],
        vec!["solve"],
    ] {
        let out = congame(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn help_documents_schemas() {
    let help = ok(&["--help"]);
    for key in ["p1_actions", "objective_kind", "geometric", "non_compliant", "conflict_fraction", "ChaCha8"] {
        assert!(help.contains(key), "{key}");
    }
}
