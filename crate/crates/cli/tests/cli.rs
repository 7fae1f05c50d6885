use std::path::PathBuf;
use std::process::Command;

use guardnet::bundle::load_bundle;
use guardnet_cli::run_command_with;
use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "core",
        "fixtures",
        &format!("{name}.json"),
    ]
    .iter()
    .collect();
    p.to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("guardnet").chain(args.iter().copied());
    let code = run_command_with(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let r = run(&full);
    (
        r.code,
        serde_json::from_str(&r.out).unwrap_or_else(|e| panic!("{e}: {}", r.out)),
    )
}

#[test]
fn usage_errors_exit_64() {
    let r = run(&["frobnicate"]);
    assert_eq!(r.code, 64);
    assert!(r.err.contains("Usage"), "{}", r.err);
    assert_eq!(run(&[]).code, 64);
    assert_eq!(run(&["reach", &fixture("fixture_a")]).code, 64);
    let help = run(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.out.contains("export-dot"));
}

#[test]
fn validate_reports_problems() {
    let r = run(&["validate", &fixture("fixture_a")]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("3 places, 2 transitions, partial guard"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture("fixture_a")).unwrap().replace(
        r#"{ "in": ["yellow"], "out": ["purple"] }"#,
        r#"{ "in": ["yellow"], "out": ["violet"] }"#,
    );
    std::fs::write(&bad, text).unwrap();
    let r = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("P3") && r.err.contains("violet"), "{}", r.err);

    std::fs::write(&bad, "{\n  \"version\": 1,\n  \"net\": [\n}").unwrap();
    let r = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("line 4"), "{}", r.err);

    let (code, v) = json(&["validate", "/no/such/file.json"]);
    assert_eq!(code, 3);
    assert!(v["error"].is_string());
}

#[test]
fn internalize_writes_a_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a_int.json");
    let r = run(&["internalize", &fixture("fixture_a"), "-o", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.err);
    let b = load_bundle(&out).unwrap();
    assert_eq!(b.guarded.net.places().len(), 7);
    assert_eq!(b.guarded.net.transitions().len(), 3);
    assert!(b.projection.is_some());
    // stdout form is the same document
    let printed = run(&["internalize", &fixture("fixture_a")]).out;
    assert_eq!(printed, std::fs::read_to_string(&out).unwrap());
}

#[test]
fn reach_exit_codes() {
    let a = fixture("fixture_a");
    let r = run(&["reach", &a, "--from", "red_start", "--to", "purple_end"]);
    assert_eq!(r.code, 1);
    assert!(r.out.contains("not reachable"));
    let r = run(&["reach", &a, "--from", "red_start", "--to", "green_middle"]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("t1(red) -> (green)"), "{}", r.out);
    assert_eq!(
        run(&["reach", &a, "--from", "P1:red", "--to", "P3:purple", "--plain"]).code,
        1
    );

    let (code, v) = json(&["reach", &a, "--from", "P1:red", "--to", "P2:green", "--plain"]);
    assert_eq!(code, 0);
    assert_eq!(v["steps"], serde_json::json!(["t1@red"]));

    let (code, v) = json(&["reach", &fixture("fixture_c"), "--from", "X:x", "--to", "Z:z"]);
    assert_eq!(code, 0);
    assert_eq!(v["outcome"], "reachable");
    assert_eq!(v["steps"].as_array().unwrap().len(), 2);

    let r = run(&["reach", &a, "--from", "P1:red", "--to", "P3:purple", "--state-cap", "1"]);
    assert_eq!(r.code, 2, "{}", r.out);
    assert_eq!(run(&["reach", &a, "--from", "P1:mauve", "--to", "P3:purple"]).code, 3);
}

#[test]
fn state_cap_from_environment() {
    let a = fixture("fixture_a");
    let status = Command::new(env!("CARGO_BIN_EXE_guardnet"))
        .args(["reach", &a, "--from", "red_start", "--to", "purple_end"])
        .env("GUARDNET_STATE_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let status = Command::new(env!("CARGO_BIN_EXE_guardnet"))
        .args(["reach", &a, "--from", "red_start", "--to", "purple_end"])
        .env_remove("GUARDNET_STATE_CAP")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
}

#[test]
fn fire_steps() {
    let a = fixture("fixture_a");
    let r = run(&["fire", &a, "--marking", "red_start", "t1@red"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("t1@red: {P2:green}"), "{}", r.out);
    let r = run(&["fire", &a, "--marking", "red_start", "t1@red", "t2@yellow"]);
    assert_eq!(r.code, 3);
    assert!(r.err.contains("not enabled"));

    let dir = tempfile::tempdir().unwrap();
    let int = dir.path().join("d.json");
    run(&["internalize", &fixture("fixture_d"), "-o", int.to_str().unwrap()]);
    let (code, v) = json(&["fire", int.to_str().unwrap(), "--marking", "X@x", "f@x", "g@y1"]);
    assert_eq!(code, 0);
    assert_eq!(v["markings"][1], serde_json::json!(["Z@z"]));
}

fn transitions_in(out: &str) -> usize {
    let v: Value = serde_json::from_str(out).unwrap();
    v["net"]["transitions"].as_array().unwrap().len()
}

#[test]
fn synchronization_counterexample() {
    let d = fixture("fixture_d");
    let args = |lifted: bool| {
        let mut a = vec![
            "compose".to_string(),
            "sync".into(),
            d.clone(),
            "--victims".into(),
            "f,g".into(),
            "--generators".into(),
            fixture("sync_generators"),
            "--witness".into(),
            fixture("sync_functor"),
        ];
        if lifted {
            a.push("--lifted".into());
        }
        a
    };
    let direct = run(&args(false).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(direct.code, 0, "{}", direct.err);
    assert_eq!(transitions_in(&direct.out), 1);

    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, &direct.out).unwrap();
    let internal = run(&["internalize", m.to_str().unwrap()]);
    assert_eq!(transitions_in(&internal.out), 1);

    let lifted = run(&args(true).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(lifted.code, 0, "{}", lifted.err);
    assert_eq!(transitions_in(&lifted.out), 2);
}

#[test]
fn compose_operations() {
    let d = fixture("fixture_d");
    let r = run(&["compose", "erase", &d, "--victims", "f"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(transitions_in(&r.out), 1);
    let r = run(&["compose", "erase", &d, "--victims", "f", "--lifted"]);
    assert_eq!(transitions_in(&r.out), 2);
    assert_eq!(run(&["compose", "erase", &d, "--victims", "nope"]).code, 3);

    let r = run(&[
        "compose",
        "add",
        &d,
        "--generators",
        &fixture("sync_generators"),
        "--witness",
        &fixture("sync_functor"),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(transitions_in(&r.out), 3);

    let identify = |lifted: bool| {
        let target = fixture("identification_target");
        let overlap = fixture("identification_overlap");
        let left = fixture("identification_left");
        let right = fixture("identification_right");
        let mut args = vec![
            "compose",
            "identify",
            &target,
            "--overlap",
            &overlap,
            "--left",
            &left,
            "--right",
            &right,
        ];
        if lifted {
            args.push("--lifted");
        }
        run(&args)
    };
    let direct = identify(false);
    assert_eq!(direct.code, 0, "{}", direct.err);
    assert_eq!(transitions_in(&direct.out), 2);
    let lifted = identify(true);
    assert_eq!(lifted.code, 0, "{}", lifted.err);
    assert_eq!(transitions_in(&lifted.out), 3);
}

#[test]
fn dot_export_is_deterministic() {
    let a = fixture("fixture_a");
    let first = run(&["export-dot", &a, "--internalize"]);
    let second = run(&["export-dot", &a, "--internalize"]);
    assert_eq!(first.code, 0);
    assert_eq!(first.out, second.out);
    let golden: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "core",
        "tests",
        "golden",
        "fixture_a_internalized.dot",
    ]
    .iter()
    .collect();
    assert_eq!(first.out, std::fs::read_to_string(golden).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.dot");
    assert_eq!(run(&["export-dot", &a, "-o", out.to_str().unwrap()]).code, 0);
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("digraph net {"));
    assert_eq!(text.matches("shape=circle").count(), 3);
}

#[test]
fn check_counterexamples_passes() {
    let r = run(&["check", "counterexamples"]);
    assert_eq!(r.code, 0, "{}", r.out);
    assert!(r.out.lines().filter(|l| l.starts_with("PASS")).count() >= 4);
    assert!(!r.out.contains("FAIL"));

    let (code, v) = json(&["check", "reachability", "--random", "5", "--seed", "9"]);
    assert_eq!(code, 0);
    assert_eq!(v["passed"], true);
    assert_eq!(v["results"].as_array().unwrap().len(), 2);
    assert_eq!(run(&["check", "nonsense"]).code, 64);
}
