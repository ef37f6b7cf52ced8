use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pldist(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pldist")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_sigmoid_passes_three_checks() {
    let d = tempfile::tempdir().unwrap();
    let o = pldist(&["verify", "sigmoid"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let passes = out.lines().filter(|l| l.trim_end().ends_with("pass") && !l.starts_with("runtime")).count();
    assert_eq!(passes, 3, "{out}");
}

#[test]
fn verify_copeland_reports_winner_and_distortion() {
    let d = tempfile::tempdir().unwrap();
    let o = pldist(&["verify", "copeland-lb", "--beta", "30", "--trials", "3", "-n", "20000"], d.path());
    let out = stdout(&o);
    assert!(out.contains("W = 1"), "{out}");
    assert!(out.contains("population distortion"), "{out}");
    // the distortion line decides the exit code
    let distortion_passed = out.lines().any(|l| l.starts_with("population distortion") && l.trim_end().ends_with("pass"));
    assert_eq!(o.status.code(), Some(if distortion_passed { 0 } else { 1 }));
}

#[test]
fn construct_writes_instance_and_report() {
    let d = tempfile::tempdir().unwrap();
    let o = pldist(&["construct", "copeland", "--beta", "30", "--epsilon", "0.1", "--out", "c"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("c/copeland_report.json")).unwrap()).unwrap();
    assert!(report["internal_params"]["p"].as_f64().unwrap() > 0.0);
    assert!(report["validity_flags"]["margin_BW_gt_half"].as_bool().unwrap());
    let inst = pldist::Instance::load(d.path().join("c/copeland_instance.json")).unwrap();
    assert_eq!(inst.m(), 3);
}

#[test]
fn construct_rejects_out_of_range_epsilon() {
    let d = tempfile::tempdir().unwrap();
    let o = pldist(&["construct", "copeland", "--beta", "30", "--epsilon", "0.3"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(0, 1/4)"), "{}", stderr(&o));
}

#[test]
fn tournament_auto_beta_is_recorded() {
    let d = tempfile::tempdir().unwrap();
    let args = ["construct", "tournament", "--rho", "0.05", "--epsilon", "0.1", "--gamma", "0.01", "--beta", "auto"];
    let o = pldist(&args, d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("tournament_report.json")).unwrap()).unwrap();
    let beta0 = report["internal_params"]["beta0"].as_f64().unwrap();
    assert_eq!(report["instance"]["beta"].as_f64().unwrap(), beta0);
}

#[test]
fn run_records_unknown_rule_per_row() {
    let d = tempfile::tempdir().unwrap();
    let m = r#"{"id": "cop", "construct": {"family": "copeland", "beta": 30, "epsilon": 0.1},
        "rules": ["copeland", "bogus"], "betas": [30, 40], "n": 2000, "trials": 2, "seed": 4}"#;
    fs::write(d.path().join("m.json"), m).unwrap();
    let o = pldist(&["run", "m.json", "--out", "runs"], d.path());
    assert_eq!(o.status.code(), Some(1));
    let csv = fs::read_to_string(d.path().join("runs/cop.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(csv.lines().filter(|l| l.contains("unknown rule")).count(), 2);
    assert!(d.path().join("runs/cop.json").exists());

    let o = pldist(&["report", "runs/cop.csv", "--out", "plots"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(d.path().join("plots/copeland.svg").exists());
}

#[test]
fn report_names_bad_row() {
    let d = tempfile::tempdir().unwrap();
    let header = "rule,m,beta,n,trials,seed,population_distortion,empirical_mean,ci_lo,ci_hi,ub,lb,satisfied,version,error\n";
    fs::write(d.path().join("bad.csv"), format!("{header}borda,3,oops,1,1,1,,,,,,,,0.1.0,\n")).unwrap();
    let o = pldist(&["report", "bad.csv"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
}

#[test]
fn sample_dumps_rankings() {
    let d = tempfile::tempdir().unwrap();
    pldist::Instance::single(2.0, vec![0.0, 1.0, 0.5]).unwrap().save(d.path().join("i.json")).unwrap();
    let o = pldist(&["sample", "i.json", "-n", "25", "--seed", "3"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 26);
    assert_eq!(out.lines().next().unwrap(), "rank0,rank1,rank2");
    assert_eq!(out, stdout(&pldist(&["sample", "i.json", "-n", "25", "--seed", "3"], d.path())));
}

#[test]
fn bounds_prints_every_rule() {
    let d = tempfile::tempdir().unwrap();
    let o = pldist(&["bounds", "--beta", "5", "--m", "10"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 8);
    assert!(out.contains("copeland,5,10,0.1,5.067837"), "{out}");
}

#[test]
fn usage_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(pldist(&["frobnicate"], d.path()).status.code(), Some(2));
    assert_eq!(pldist(&["verify", "nope"], d.path()).status.code(), Some(2));
    assert_eq!(pldist(&["construct", "rd", "--m", "5"], d.path()).status.code(), Some(2));
}
