use std::fs;
use std::process::{Command, Output};

use regionsynth::fixtures::{RUNNING, WITHOUT_A};
use tempfile::TempDir;

fn run(dir: &TempDir, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regionsynth"))
        .args(args)
        .current_dir(dir.path())
        .output()
        .unwrap()
}

fn workspace() -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("running.lts"), RUNNING).unwrap();
    fs::write(dir.path().join("no-a.lts"), WITHOUT_A).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_and_input_errors_exit_with_two() {
    let dir = workspace();
    assert_eq!(run(&dir, &["check", "running.lts"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["check", "--property", "both", "missing.lts"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["check", "--property", "both", "--jobs", "0", "running.lts"]).status.code(), Some(2));

    fs::write(dir.path().join("bad.lts"), "lts bad\ninitial s0\ns0 a\n").unwrap();
    let o = run(&dir, &["check", "--property", "both", "bad.lts"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn synthesized_net_round_trips_through_files() {
    let dir = workspace();
    let o = run(&dir, &["synth", "--property", "both", "no-a.lts", "--out", "no-a.pn"]);
    assert_eq!(o.status.code(), Some(0));
    for relation in ["embedding", "language", "realization"] {
        let v = run(&dir, &["verify", "--relation", relation, "no-a.lts", "no-a.pn"]);
        assert_eq!(v.status.code(), Some(0), "{relation}: {}", stdout(&v));
        assert!(stdout(&v).starts_with(&format!("{relation} verified")));
    }
    let rg = run(&dir, &["rg", "no-a.pn"]);
    assert_eq!(rg.status.code(), Some(0));
}

#[test]
fn synthesis_of_a_failing_property_is_refused() {
    let dir = workspace();
    let o = run(&dir, &["synth", "--property", "essp", "running.lts"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reachability_cap_is_an_error() {
    let dir = workspace();
    fs::write(dir.path().join("pump.pn"), "net pump\nplace p 0\ntransition t\narc t p 1\n").unwrap();
    let o = run(&dir, &["rg", "--cap", "5", "pump.pn"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn invalid_removal_exits_with_one() {
    let dir = workspace();
    // dropping u leaves the x and y edges behind s0 unreachable
    fs::write(dir.path().join("u.rm"), "remove event u\n").unwrap();
    let o = run(&dir, &["apply", "running.lts", "u.rm"]);
    assert_eq!(o.status.code(), Some(1));

    fs::write(dir.path().join("ghost.rm"), "remove state nowhere\n").unwrap();
    let o = run(&dir, &["apply", "running.lts", "ghost.rm"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn repair_writes_an_applicable_removal() {
    let dir = workspace();
    let o = run(&dir, &[
        "repair", "--mode", "event", "--property", "realization", "running.lts", "--out", "fix.rm",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let fixed = run(&dir, &["apply", "running.lts", "fix.rm", "--out", "fixed.lts"]);
    assert_eq!(fixed.status.code(), Some(0));
    let check = run(&dir, &["check", "--property", "both", "fixed.lts"]);
    assert_eq!(check.status.code(), Some(0));
}

#[test]
fn hitting_set_budget_decides_the_exit_code() {
    let dir = workspace();
    let text = "universe X0 X1 X2\nset X0 X1\nset X1 X2\nset X0 X2\nlambda 1\n";
    fs::write(dir.path().join("tri.hs"), text).unwrap();
    let o = run(&dir, &["hs", "tri.hs"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("size=2"));
    fs::write(dir.path().join("tri2.hs"), text.replace("lambda 1", "lambda 2")).unwrap();
    assert_eq!(run(&dir, &["hs", "tri2.hs"]).status.code(), Some(0));
}
