use std::path::PathBuf;
use std::process::Command;

use manna_cli::format::{parse_str, read_file, to_json, InstanceFile};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn manna(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_manna"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn f(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).expect("stdout is JSON")
}

fn verdict(report: &Value, check: &str) -> bool {
    report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["check"] == check)
        .unwrap_or_else(|| panic!("no verdict {check}"))["holds"]
        .as_bool()
        .unwrap()
}

#[test]
fn check_hz_on_twins_holds() {
    let (code, out, _) = manna(&["check", "hz", &f("twins.json"), &f("twins_uniform.json"), &f("prices_2_0.json")]);
    assert_eq!(code, 0);
    assert!(verdict(&json(&out), "hz"));
}

#[test]
fn check_ef_on_figure_one_fails_with_pair() {
    let (code, out, _) = manna(&["check", "ef", &f("fig1.json"), &f("fig1_t1.json")]);
    assert_eq!(code, 1);
    let r = json(&out);
    assert_eq!(r["verdicts"][0]["witness"]["envier"], "i");
    assert_eq!(r["verdicts"][0]["witness"]["envied"], "i'");
    assert_eq!(r["envy"]["multiplicative_ratio"], "10/1");
}

#[test]
fn check_po_single_agent() {
    let (code, _, _) = manna(&["check", "po", &f("single.json"), &f("single_alloc.json")]);
    assert_eq!(code, 0);
}

#[test]
fn solve_two_type_on_figure_two() {
    let (code, out, _) = manna(&["solve", "two-type", &f("fig2.json")]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["results"]["allocation"][0][1], "1/2");
    assert!(verdict(&r, "ef") && verdict(&r, "po"));
}

#[test]
fn solve_pcnb_on_figure_two() {
    let (code, out, _) = manna(&["solve", "pcnb", &f("fig2.json")]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["results"]["allocation"][0][1], "0/1");
    assert_eq!(r["results"]["product"], "1/1");
    assert!(!verdict(&r, "ef"));
}

#[test]
fn solve_grid_hz_twins() {
    let (code, out, _) = manna(&["solve", "grid-hz", "--delta", "1/4", "--cap", "2", &f("twins.json")]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["results"]["prices"], serde_json::json!(["2/1", "0/1"]));
    assert_eq!(r["results"]["allocation"], serde_json::json!([["1/2", "1/2"], ["1/2", "1/2"]]));
    assert!(verdict(&r, "hz") && verdict(&r, "earnings"));
}

#[test]
fn grid_hz_exhaustion_and_size_exit_3() {
    let (code, _, err) = manna(&["solve", "grid-hz", "--delta", "1/4", "--cap", "3/2", &f("twins.json")]);
    assert_eq!(code, 3);
    assert!(err.contains("--cap"), "{err}");
    let (code, _, _) = manna(&["solve", "pcnb", &f("big_chores.json")]);
    assert_eq!(code, 3);
}

#[test]
fn wrong_arity_is_a_usage_error() {
    let (code, _, err) = manna(&["solve", "two-type", &f("single.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("expected 2 agents"));
}

#[test]
fn transforms() {
    let (code, out, _) = manna(&["transform", "to-earnings", &f("prices_2_0.json")]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["earnings"], serde_json::json!(["0/1", "2/1"]));

    let (_, out, _) = manna(&["transform", "shift", "--c", "10,1", &f("fig1.json")]);
    let shifted: InstanceFile = parse_str(&out, &fixture("out")).unwrap();
    let inst = shifted.to_instance(&fixture("out")).unwrap();
    assert!(inst.all_nonnegative());

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_string_lossy().into_owned();
    let (code, _, _) = manna(&["transform", "dichotomize", &f("bivalued.json"), "--out", &d]);
    assert_eq!(code, 0);
    let red: InstanceFile = read_file(&dir.path().join("instance.json")).unwrap();
    let inst = red.to_instance(&dir.path().join("instance.json")).unwrap();
    assert!(inst.utilities().iter().flatten().all(|u| u.is_integer() && (*u.numer() == 0.into() || *u.numer() == 1.into())));
    let recs: Value = read_file(&dir.path().join("records.json")).unwrap();
    assert_eq!(recs["records"][0]["low"], "-5/1");

    let (code, _, err) = manna(&["transform", "dichotomize", &f("fig2.json")]);
    assert_eq!(code, 0, "{err}");
    let (code, _, _) = manna(&["transform", "scale", "--a", "-1", &f("fig2.json")]);
    assert_eq!(code, 2);
    let (code, _, _) = manna(&["transform", "normalize", &f("prices_1_3.json")]);
    assert_eq!(code, 2);
}

#[test]
fn demos() {
    for c in ["2", "10", "100"] {
        let (code, out, _) = manna(&["demo", "fig1", "--param", c]);
        assert_eq!(code, 0);
        let r = json(&out);
        assert_eq!(r["results"]["optimizer_t"], "1/1");
        assert_eq!(r["results"]["envy_factor"], format!("{c}/1"));
    }
    let (code, out, _) = manna(&["demo", "fig2"]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["results"]["optimizer_t"], "0/1");
    assert_eq!(r["results"]["additive_envy_gap"], "1/1");
    assert_eq!(r["results"]["ef_alternative_t"], "1/2");

    let (code, _, _) = manna(&["demo", "fig2", "--param", "3"]);
    assert_eq!(code, 2);
    let (code, _, _) = manna(&["demo", "fig1", "--param", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn demo_writes_curve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_string_lossy().into_owned();
    let (code, out, _) = manna(&["demo", "fig1", "--param", "10", "--delta", "1/4", "--out", &d]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let csv = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,objective,envy_gap");
    assert_eq!(lines.len(), 6);
    // (10t + 1 - t)(1 - t) at t = 1/2 is 11/4; identical bundles, no envy
    assert_eq!(lines[3], "1/2,11/4,0/1");
    // t = 1/4: i' holds 3/4 of j' and sees 1/4 of it in i's bundle
    assert_eq!(lines[2], "1/4,39/16,1/2");
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn parse_errors_exit_2_with_position() {
    let (code, _, err) = manna(&["validate", &f("float.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("float.json:4:20"), "{err}");
    let (code, _, _) = manna(&["check", "hz", &f("twins.json"), &f("twins_uniform.json")]);
    assert_eq!(code, 2);
    let (code, _, _) = manna(&["check", "ef", &f("twins.json"), &f("single_alloc.json")]);
    assert_eq!(code, 2);
    let (code, _, _) = manna(&["validate", &f("missing.json")]);
    assert_eq!(code, 2);
    let (code, _, _) = manna(&["solve", "nope", &f("twins.json")]);
    assert_eq!(code, 2);
}

#[test]
fn reports_are_deterministic() {
    let args = ["solve", "grid-hz", "--delta", "1/4", &f("fig2.json")];
    let (_, a, _) = manna(&args);
    let (_, b, _) = manna(&args);
    assert_eq!(a, b);
    let mut one = vec!["--workers", "1"];
    one.extend_from_slice(&args);
    let (_, c, _) = manna(&one);
    assert_eq!(a, c);
}

#[test]
fn fixtures_round_trip() {
    for name in ["fig1.json", "fig2.json", "twins.json", "single.json", "bivalued.json", "two_type.json", "big_chores.json"] {
        let path = fixture(name);
        let file: InstanceFile = read_file(&path).unwrap();
        let inst = file.to_instance(&path).unwrap();
        let again: InstanceFile = parse_str(&to_json(&file), &path).unwrap();
        assert_eq!(again.to_instance(&path).unwrap(), inst, "{name}");
    }
}
