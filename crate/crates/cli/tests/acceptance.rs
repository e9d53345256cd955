//! Release criteria, one line each on stderr.
//!
//! Lines are written straight to the stderr handle so they show up in
//! `cargo test` output even when the test passes.

use std::fs;
use std::io::Write;
use std::time::Instant;

use hawkit_cli::commands::{cmd_play, cmd_verify};
use hawkit_cli::config::RunConfig;
use hawkit_cli::suites::{run_suite, Scale, Status, SuiteReport};

const DESK: &str = include_str!("../configs/desk.toml");

// Wall-clock budgets, in seconds, for the two criteria that carry one.
const HEIGHT_BUDGET_SECS: u64 = 120;
const GAMES_BUDGET_SECS: u64 = 600;

fn desk() -> RunConfig {
    RunConfig::from_toml(DESK).expect("shipped config loads")
}

fn report(criterion: u32, pass: bool, summary: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "acceptance criterion {criterion:>2}: {verdict} {summary}");
}

fn summarize(rep: &SuiteReport) -> String {
    rep.lines
        .iter()
        .map(|l| format!("{}={}/{} {}", l.check, l.instances - l.failures.min(l.instances), l.instances, l.status))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Runs a suite at full scale, reports it and asserts every line passed.
fn strict(criterion: u32, suite: &str, budget: Option<u64>) -> SuiteReport {
    let start = Instant::now();
    let rep = run_suite(suite, &desk(), &Scale::full()).expect("suite runs");
    let secs = start.elapsed().as_secs();
    let in_time = budget.is_none_or(|b| secs < b);
    let pass = rep.lines.iter().all(|l| l.status == Status::Pass) && in_time;
    let timing = budget.map_or(String::new(), |b| format!(" ({secs}s, budget {b}s)"));
    report(criterion, pass, &format!("[{suite}] {}{timing}", summarize(&rep)));
    assert!(pass, "{}", rep.to_text());
    rep
}

#[test]
fn criterion_01_height_bounds() {
    strict(1, "lemma-q", Some(HEIGHT_BUDGET_SECS));
}

#[test]
fn criterion_02_witnesses() {
    strict(2, "bpv", None);
}

#[test]
fn criterion_03_family_partition() {
    strict(3, "part", None);
}

#[test]
fn criterion_04_budget() {
    let rep = strict(4, "budget", None);
    assert!(rep.find("paper_series_bound").is_some());
}

#[test]
fn criterion_05_end_to_end() {
    let rep = strict(5, "e2e", Some(GAMES_BUDGET_SECS));
    assert_eq!(rep.lines.iter().map(|l| l.instances).sum::<usize>(), 40);
}

#[test]
fn criterion_06_inner_products() {
    strict(6, "inequ", None);
}

#[test]
fn criterion_07_flow_correspondence() {
    let rep = run_suite("dani", &desk(), &Scale::full()).expect("suite runs");
    let line = |c: &str| rep.find(c).expect("check present");
    let stated = line("backward_conversion_lambda");
    let forward_ok = ["forward_per_denominator", "forward_conversion_constant"].iter().all(|c| line(c).status == Status::Pass);
    let corrected = line("backward_conversion_mu");
    // The criterion as stated includes the lambda-exponent backward
    // conversion, which does not hold for lambda > mu; it is reported as a
    // failure with the corrected conversion alongside.
    let pass = forward_ok && stated.status == Status::Pass;
    report(
        7,
        pass,
        &format!(
            "[dani] {}; backward conversion with exponent 1/(1+lambda) fails at {} of {} points, with exponent 1/(1+mu) at {}",
            summarize(&rep),
            stated.failures,
            stated.instances,
            corrected.failures
        ),
    );
    assert!(forward_ok, "{}", rep.to_text());
    assert_eq!(corrected.status, Status::Pass, "{}", rep.to_text());
    assert!(stated.status != Status::Fail, "{}", rep.to_text());
    assert!(stated.instances >= 50);
}

#[test]
fn criterion_08_systole() {
    strict(8, "systole", None);
}

#[test]
fn criterion_09_integer_shear() {
    strict(9, "slice", None);
}

#[test]
fn criterion_10_determinism() {
    let base = tempfile::tempdir().unwrap();
    let text = DESK.replace("seeds = [0, 1, 2]", "seeds = [0, 7]");
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let mut cfg = RunConfig::from_toml(&text).unwrap();
        cfg.output_dir = base.path().join(run);
        let played = cmd_play(&cfg).unwrap();
        let verified = cmd_verify(&cfg, &["lemma-q".into(), "budget".into(), "dani".into(), "systole".into()], true).unwrap();
        let mut files: Vec<_> = played.files.iter().chain(&verified.files).cloned().collect();
        files.sort();
        let bytes: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(p).unwrap()))
            .collect();
        outputs.push((played.text + &verified.text, bytes));
    }
    let same = outputs[0] == outputs[1];
    let n = outputs[0].1.len();
    report(10, same, &format!("{n} transcript and report files byte-identical across two runs"));
    assert!(same);
    assert!(n >= 8);
}
