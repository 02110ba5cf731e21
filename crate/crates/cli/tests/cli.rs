use std::path::Path;
use std::process::{Command, Output};

use subadd_lab::report::Report;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subadd-lab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_abs_text() {
    let o = run(&["analyze", "ABS"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "beta = 1"), "{}", text);
    assert!(text.contains("gamma+ = 1"));
}

#[test]
fn json_output_parses_back() {
    let o = run(&["--format", "json", "check", "T1", "VEE(2,1)"]);
    assert_eq!(o.status.code(), Some(0));
    let r = Report::from_json(&o.stdout).unwrap();
    assert_eq!(r.sections.len(), 1);
    assert_eq!(r.sections[0].body["status"], "verified-at-scale");
    assert_eq!(r.config["function"]["name"], "VEE(2,1)");
}

#[test]
fn exit_codes() {
    // hypotheses not met
    assert_eq!(run(&["check", "T1", "SQRT_ABS"]).status.code(), Some(2));
    // superadditive, so the pair probe finds violations
    assert_eq!(run(&["analyze", "-abs(t)"]).status.code(), Some(1));
    // S(0) != 0 is a failed precondition of the growth constants
    assert_eq!(run(&["analyze", "abs(t) + 1"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "ABS", "--format", "xml"]).status.code(), Some(3));
    assert_eq!(run(&["check", "T3", "ABS"]).status.code(), Some(3));
    assert_eq!(run(&["check", "T2", "ABS"]).status.code(), Some(3));
    assert_eq!(run(&["analyze", "max(t"]).status.code(), Some(3));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(run(&["extend", "ABS", "--subgroup", "<1, sqrt2>"]).status.code(), Some(2));
}

#[test]
fn config_file_and_sfn() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("vee.sfn"), "# right slope 2\nmax(2*t, t)\n").unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "[function]\nfile = vee.sfn\n\n[subgroup]\nspec = Q\n\n[sigma]\nspec = dyadic\n\n[output]\nformat = json\n",
    )
    .unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "check", "T5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = Report::from_json(&o.stdout).unwrap();
    assert_eq!(r.config["function"]["expr"], "max(2*t, t)");
    assert_eq!(r.config["subgroup"], "Q");

    std::fs::write(&cfg, "[schedules]\nt_maxx = 10\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "analyze", "ABS"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn csv_bundle_to_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traces");
    let o = run(&[
        "--format",
        "csv-bundle",
        "--out",
        out.to_str().unwrap(),
        "envelope",
        "ABS",
        "--at",
        "sqrt2",
        "--subgroup",
        "Q<1, sqrt2>",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let read = |name: &str| std::fs::read_to_string(Path::new(&out).join(name)).unwrap();
    let partials = read("star_envelope__star_partials.csv");
    assert!(partials.starts_with("n,n_s_lo,n_s_hi\n"));
    assert_eq!(partials.lines().count(), 1001);
    let steps = read("limit_envelopes__delta_sup_inf.csv");
    assert!(steps.starts_with("delta,height,points,sup_lo"));
}

#[test]
fn gallery_and_traces() {
    let o = run(&["gallery"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("IRR_INDICATOR: indicator_irr(t) [subadditive]"));
    assert_eq!(run(&["gallery", "NOPE"]).status.code(), Some(3));
    let o = run(&["--format", "csv-bundle", "trace", "VEE(2,1)", "--quantity", "beta"]);
    let text = stdout(&o);
    assert!(text.starts_with("# beta_trace__beta.csv\nx,x_approx,ratio_lo,ratio_hi\n"));
    assert!(text.lines().skip(2).all(|l| l.ends_with(",2/1,2/1")));
}

#[test]
fn jobs_do_not_change_bytes() {
    let args = ["--format", "json", "analyze", "VEE(2,1)"];
    let a = run(&[&["--jobs", "1"][..], &args].concat());
    let b = run(&[&["--jobs", "4"][..], &args].concat());
    assert_eq!(a.stdout, b.stdout);
}
