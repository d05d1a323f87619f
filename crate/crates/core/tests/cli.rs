use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclic-covers")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn empirical_theory_compare_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let emp = dir.path().join("emp.csv");
    let th = dir.path().join("th.json");
    let out = run(&["empirical", "--q", "5", "--r", "2", "--degrees", "6", "--format", "csv", "--out", path(&emp)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["theory", "--q", "5", "--r", "2", "--out", path(&th)]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["compare", "--empirical", path(&emp), "--theory", path(&th), "--threshold-degree", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let tv = rep["total_variation"].as_f64().unwrap();
    assert!(tv > 0.0 && tv < 0.05);

    // the same comparison against an unreachable threshold reports a mismatch
    let out = run(&["compare", "--empirical", path(&emp), "--theory", path(&th), "--threshold", "0.001"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn keyspace_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert!(run(&["theory", "--q", "5", "--r", "2", "--out", path(&a)]).status.success());
    assert!(run(&["theory", "--q", "7", "--r", "2", "--out", path(&b)]).status.success());
    let out = run(&["compare", "--empirical", path(&a), "--theory", path(&b)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_and_budget_errors_exit_two() {
    assert_eq!(run(&["theory", "--q", "7", "--r", "4"]).status.code(), Some(2));
    assert_eq!(run(&["empirical", "--q", "5", "--r", "2", "--degrees", "8", "--budget", "1000"]).status.code(), Some(2));
    assert_eq!(run(&["empirical", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["empirical", "--q", "5", "--r", "2", "--degrees", "2", "--mode", "montecarlo", "--samples", "0"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "q = 7\nr = 3\nn_max = 3\nformat = \"csv\"\n").unwrap();
    let out = run(&["heuristic", "--config", path(&cfg), "--q", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# report: "));
    assert_eq!(lines[1], "q,n,enumerated,closed_form,matches,error");
    assert_eq!(lines[2], "5,1,24,24,true,");
    assert_eq!(lines.len(), 5);
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    for args in [
        vec!["empirical", "--q", "7", "--r", "3", "--degrees", "2,1", "--mode", "montecarlo", "--samples", "4000", "--seed", "3"],
        vec!["empirical", "--q", "5", "--r", "4", "--degrees", "2,1,1"],
        vec!["verify-counts", "--q", "7", "--r", "6", "--max-weight", "4", "--format", "csv"],
    ] {
        let one = run(&[args.as_slice(), &["--workers", "1"]].concat());
        let eight = run(&[args.as_slice(), &["--workers", "8"]].concat());
        assert!(one.status.success());
        assert_eq!(one.stdout, eight.stdout, "{args:?}");
    }
}

#[test]
fn verify_counts_passes_on_a_quartic_family() {
    let out = run(&["verify-counts", "--q", "5", "--r", "2", "--degrees", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["mismatches"], 0);
    assert_eq!(rep["members"], 2400);
}
