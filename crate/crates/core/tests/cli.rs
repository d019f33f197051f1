use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_hardy-bellman");

const THREE: &str = r#"{"p": 2, "depth": 1, "alpha": [0.1, 0.1, 0.1], "lambda": [1, 0.5, 0.5], "phi": [1, 0.7071067811865476, 0.7071067811865476]}"#;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn check_and_ratio_on_the_three_node_tree() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "three.json", THREE);
    let (code, out, _) = run(&["check", "--instance", &path]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("testing condition: pass"));
    let (code, out, _) = run(&["ratio", "--instance", &path]);
    assert_eq!(code, 0);
    assert!((field(&out, "lhs") - 0.6).abs() < 1e-12);
    assert!((field(&out, "rhs") - 8.0).abs() < 1e-12);
    assert!((field(&out, "ratio") - 0.3).abs() < 1e-12);
    let (code, out, _) = run(&["certificate", "--instance", &path]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("chain: pass"));
}

#[test]
fn failing_testing_condition_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "heavy.json", &THREE.replace("0.1, 0.1, 0.1", "10, 10, 10"));
    let (code, out, _) = run(&["check", "--instance", &path]);
    assert_eq!(code, 1);
    assert!(out.contains("testing condition: FAIL"));
    assert_eq!(run(&["certificate", "--instance", &path]).0, 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["check"]).0, 2);
    assert_eq!(run(&["hjb"]).0, 2);
    assert_eq!(run(&["simulate", "--x0", "1,1,1,1"]).0, 2);
    assert_eq!(run(&["simulate", "--seed", "1", "--x0", "1,1,1"]).0, 2);
    assert_eq!(run(&["simulate", "--seed", "1", "--x0", "1,1,1,1", "--policy", "nope"]).0, 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        &dir,
        "bad.json",
        r#"{"p":2,"depth":1,"alpha":[1,1],"lambda":[1,1,1],"phi":[1,1,1]}"#,
    );
    let (code, _, err) = run(&["check", "--instance", &bad]);
    assert_eq!(code, 2);
    assert!(err.contains("alpha") && err.contains('3'), "{err}");
    let broken = write(&dir, "broken.json", "{\"p\": 2,\n \"depth\": }");
    let (code, _, err) = run(&["check", "--instance", &broken]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn simulate_drift_only() {
    let (code, out, _) = run(&["simulate", "--policy", "drift-only", "--x0", "1,1,1,1", "--h", "1e-3", "--seed", "0"]);
    assert_eq!(code, 0, "{out}");
    assert!((field(&out, "closed form") - 2.0).abs() < 1e-12);
    assert!((field(&out, "mean J") - 2.0).abs() < 0.05);
    assert_eq!(field(&out, "standard error"), 0.0);
}

#[test]
fn hjb_sweep_passes() {
    let (code, out, _) = run(&["hjb", "--p", "3", "--seed", "4", "--samples", "50"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn probe_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let (code, out, err) = run(&[
            "probe", "--depth", "3", "--seed", "5", "--p", "1.5,2,3", "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{out}{err}");
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,depth,family,ratio,cP,fraction");
    assert_eq!(lines.len(), 4);
    assert!(text.ends_with('\n'));
    let cells: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(cells[1], "3");
    assert_eq!(cells[2], "uniform");
    assert_eq!(cells[0], "2.0000000000000000e0");
    assert!(run(&["probe", "--depth", "3"]).0 == 2);
}

#[test]
fn report_runs_every_suite() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        &dir,
        "gen.json",
        r#"{"p": 2, "depth": 3, "family": "uniform", "saturate_alpha": true, "seed": 7}"#,
    );
    let (code, out, err) = run(&["report", "--instance", &path, "--seed", "1", "--samples", "30"]);
    assert_eq!(code, 0, "{out}{err}");
    for section in ["[check]", "[ratio]", "[certificate]", "[hjb]", "[simulate]", "[probe]"] {
        assert!(out.contains(section), "missing {section}");
    }
    let (again, _, _) = run(&["report", "--instance", &path, "--seed", "1", "--samples", "30"]);
    assert_eq!(again, 0);
}

#[test]
fn instance_round_trip() {
    let (inst, exp) = hardy_bellman::cli::parse_instance(THREE).unwrap();
    let text = hardy_bellman::cli::emit_instance(&inst, &exp);
    let (back, exp2) = hardy_bellman::cli::parse_instance(&text).unwrap();
    assert_eq!(back, inst);
    assert_eq!(exp2, exp);
}
