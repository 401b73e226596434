use std::path::Path;
use std::process::{Command, Output};

fn dynrefl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynrefl")).args(args).output().expect("spawn dynrefl")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn paper_suite_exact_at_two_bodies() {
    let o = dynrefl(&["verify", "--suite", "paper", "--n", "2", "--mode", "exact"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let passed = stdout(&o).lines().filter(|l| l.contains(" PASS ")).count();
    assert!(passed >= 20, "only {passed} identities");
}

#[test]
fn paper_suite_random_at_four_bodies() {
    let o = dynrefl(&["verify", "--suite", "paper", "--n", "4", "--mode", "random", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn exact_four_body_three_leg_check_warns() {
    let o = dynrefl(&["verify", "--identity", "dybe-b", "--n", "4"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let quiet = dynrefl(&["verify", "--identity", "dybe-b", "--n", "3"]);
    assert!(!String::from_utf8_lossy(&quiet.stderr).contains("warning"));
}

#[test]
fn printed_classical_form_is_reported_as_failure() {
    let o = dynrefl(&["verify", "--identity", "classical-printed", "--n", "2"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("syntax.toml", "[campaign\nname ="),
        ("unknown.toml", "[[item]]\nidentity = \"nope\"\nn = 2\n"),
        ("field.toml", "[[item]]\nidentity = \"rll\"\nn = 2\ncolour = 1\n"),
        ("empty.toml", "[campaign]\nname = \"x\"\n"),
    ] {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        let o = dynrefl(&["verify", "--config", p.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{name}");
    }
    let o = dynrefl(&["verify", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["build", "nonsense"][..],
        &["verify", "--identity", "nope"],
        &["verify", "--suite", "paper", "--n", "1"],
        &["verify", "--identity", "reduction", "--n", "3"],
        &["verify", "--mode", "fuzzy"],
        &["eigen", "--mu", "0"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&dynrefl(args)), 2, "{args:?}");
    }
}

#[test]
fn build_hamiltonian_is_json() {
    let o = dynrefl(&["build", "hamiltonian", "--n", "3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n"], 3);
    assert_eq!(v["equals_closed_form"], true);
    assert_eq!(v["operator"].as_array().unwrap().len(), 3);
    assert!(v.get("relative_coordinates").is_none());
}

#[test]
fn every_builder_produces_json() {
    for what in ["bcd-from-a", "dual", "fuse", "dress", "monodromy", "hamiltonian"] {
        let o = dynrefl(&["build", what, "--n", "2"]);
        assert_eq!(code(&o), 0, "{what}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["n"], 2);
    }
}

#[test]
fn eigen_equal_masses_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    let o = dynrefl(&["eigen", "--m1", "1", "--m2", "1", "--samples", "20", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["max_relative_residual"].as_f64().unwrap() <= 1e-9);
    let rows = std::fs::read_to_string(&csv).unwrap().lines().count();
    assert_eq!(rows, 21);
}

#[test]
fn eigen_printed_exponent_fails_for_unequal_masses() {
    let o = dynrefl(&["eigen", "--m1", "2", "--m2", "1", "--exponent", "printed"]);
    assert_eq!(code(&o), 1);
    let o = dynrefl(&["eigen", "--m1", "2", "--m2", "1"]);
    assert_eq!(code(&o), 0);
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for e in walk(dir) {
        out.push((e.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&e).unwrap()));
    }
    out.sort();
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            v.extend(walk(&p));
        } else {
            v.push(p);
        }
    }
    v
}

#[test]
fn reruns_are_bit_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "[campaign]\nname = \"repro\"\n\n[[item]]\nsuite = \"structure\"\nn = 3\nmode = \"random\"\nseed = 11\n\n[[item]]\nidentity = \"reduction\"\nn = 2\n",
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = cfg.to_str().unwrap();
    assert_eq!(code(&dynrefl(&["verify", "--config", c, "--out", a.to_str().unwrap(), "--threads", "4"])), 0);
    assert_eq!(code(&dynrefl(&["verify", "--config", c, "--out", b.to_str().unwrap(), "--threads", "1"])), 0);
    let fa = files(&a);
    assert!(fa.iter().any(|(n, _)| n == "summary.csv"));
    assert!(fa.iter().any(|(n, _)| n == "report.md"));
    assert_eq!(fa, files(&b));
}

#[test]
fn report_aggregates_campaigns() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    dynrefl(&["verify", "--identity", "rll", "--identity", "dual", "--out", a.to_str().unwrap()]);
    dynrefl(&["verify", "--identity", "classical-printed", "--out", b.to_str().unwrap()]);
    let md = dir.path().join("all.md");
    let o = dynrefl(&["report", a.to_str().unwrap(), b.join("summary.json").to_str().unwrap(), "--out", md.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let text = std::fs::read_to_string(md).unwrap();
    assert!(text.contains("2 of 3 checks pass"));
    assert!(text.contains("### Failures"));
    assert_eq!(code(&dynrefl(&["report", dir.path().join("nothing").to_str().unwrap()])), 2);
}
