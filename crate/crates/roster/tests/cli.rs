use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use roster::cli::{EXIT_INFEASIBLE, EXIT_INPUT, EXIT_VIOLATIONS};
use roster::formats::{read_instance, read_roster_csv, to_json_pretty};
use roster_core::model::check_feasibility;
use roster_core::RosterInstance;

fn roster(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roster"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn toy(dir: &Path, employees: &str, weeks: &str, seed: &str) {
    ok(&roster(
        &["generate", "--toy", "--employees", employees, "--weeks", weeks, "--seed", seed, "-o", "inst.json"],
        dir,
    ));
}

fn assert_feasible(inst: &Path, roster_csv: &Path) {
    let inst = read_instance(inst).unwrap();
    let x = read_roster_csv(roster_csv, &inst).unwrap();
    assert!(check_feasibility(&inst, &x).unwrap().feasible);
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        ok(&roster(
            &["generate", "--employees", "12", "--weeks", "8", "--seed", "1", "-o", name],
            dir.path(),
        ));
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    let c = roster(&["generate", "--employees", "12", "--weeks", "8", "--seed", "2"], dir.path());
    assert_ne!(ok(&c).into_bytes(), a);
}

#[test]
fn solve_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    toy(d, "4", "1", "7");
    let out = ok(&roster(
        &["solve", "-i", "inst.json", "-o", "out", "--gap", "0.05", "--mode", "hybrid"],
        d,
    ));
    assert!(out.contains("objective"), "{out}");
    for f in ["roster.csv", "stats.csv", "trace.ndjson", "result.json"] {
        assert!(d.join("out").join(f).exists(), "{f}");
    }
    assert_eq!(ok(&roster(&["check", "-i", "inst.json", "--roster", "out/roster.csv"], d)).trim(), "feasible");
    assert_feasible(&d.join("inst.json"), &d.join("out/roster.csv"));
    let grid = ok(&roster(&["export", "-i", "inst.json", "--roster", "out/roster.csv"], d));
    assert_eq!(grid.matches("employee ").count(), 4);
}

#[test]
fn malformed_files_exit_with_input_code_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.json"), "{\n  \"weeks\": 1,\n  \"employees\": nope\n}\n").unwrap();
    let out = roster(&["solve", "-i", "bad.json", "-o", "out"], d);
    assert_eq!(out.status.code(), Some(EXIT_INPUT as i32));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");

    toy(d, "3", "1", "1");
    fs::write(d.join("r.csv"), "employee,week,day,slot,shift\n0,1,Mon,Q,S\n").unwrap();
    let out = roster(&["check", "-i", "inst.json", "--roster", "r.csv"], d);
    assert_eq!(out.status.code(), Some(EXIT_INPUT as i32));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r.csv:2: slot"));
}

fn infeasible_instance(d: &Path) -> RosterInstance {
    toy(d, "3", "1", "1");
    let mut inst = read_instance(&d.join("inst.json")).unwrap();
    // Two people on shift 0 in each of the first two blocks needs four
    // people, as nobody may work both; there are three.
    for e in 0..3 {
        inst.availability[e].fill(1);
        inst.vacation[e].fill(0);
    }
    inst.no_license.iter_mut().for_each(Vec::clear);
    for row in inst.cover.iter_mut() {
        row.fill(0);
    }
    inst.cover[0][0] = 2;
    inst.cover[1][0] = 2;
    inst
}

#[test]
fn infeasible_instances_have_their_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let inst = infeasible_instance(d);
    fs::write(d.join("inf.json"), to_json_pretty(&inst)).unwrap();
    let out = roster(&["solve", "-i", "inf.json", "-o", "out"], d);
    assert_eq!(out.status.code(), Some(EXIT_INFEASIBLE as i32), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn check_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let inst = infeasible_instance(d);
    fs::write(d.join("inf.json"), to_json_pretty(&inst)).unwrap();
    fs::write(d.join("empty.csv"), "employee,week,day,slot,shift\n").unwrap();
    let out = roster(&["check", "-i", "inf.json", "--roster", "empty.csv"], d);
    assert_eq!(out.status.code(), Some(EXIT_VIOLATIONS as i32));
    assert!(!out.stdout.is_empty());
}

#[test]
fn reopt_rolling_and_patterns_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    toy(d, "4", "2", "11");
    ok(&roster(&["solve", "-i", "inst.json", "-o", "base", "--gap", "0.1"], d));

    fs::write(d.join("none.json"), "[]").unwrap();
    let out = ok(&roster(
        &["reopt", "-i", "inst.json", "--roster", "base/roster.csv", "--changes", "none.json", "-o", "re"],
        d,
    ));
    assert!(out.contains("deviation 0"), "{out}");
    assert_feasible(&d.join("re/instance.json"), &d.join("re/roster.csv"));

    let out = ok(&roster(
        &["rolling", "-i", "inst.json", "--period-weeks", "1", "--adaptive", "-o", "roll", "--gap", "0.1"],
        d,
    ));
    assert!(out.contains("weekend spread"), "{out}");
    assert!(d.join("roll/period-2/roster.csv").exists());
    assert!(d.join("roll/plan.json").exists());

    fs::write(d.join("pattern.txt"), "M M - - P P P\nA - A - - - -\n").unwrap();
    let out = ok(&roster(
        &["patterns", "-i", "inst.json", "--pattern", "pattern.txt", "-o", "pat", "--gap", "0.1", "--gamma", "0.5"],
        d,
    ));
    assert!(out.contains("pattern deviation"), "{out}");
    assert_feasible(&d.join("inst.json"), &d.join("pat/roster.csv"));
}

#[test]
fn bench_prints_one_row_per_gap_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(&roster(
        &[
            "bench", "--trials", "2", "--modes", "hybrid,milp", "--employees", "3", "--weeks", "1", "--time-limit", "5",
            "--phase1-time", "2", "-o", "b",
        ],
        d,
    ));
    let rows: Vec<&str> = out.lines().skip(2).collect();
    let gaps: Vec<&str> = rows.iter().map(|r| r.split('|').nth(1).unwrap().trim()).collect();
    assert_eq!(gaps, ["50%", "20%", "10%", "5%", "3%", "1%"]);
    assert!(out.lines().next().unwrap().contains("hybrid") && out.contains("milp"));
    assert!(d.join("b/report.json").exists());
}
