use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hawkit::numerics::format_rational;
use hawkit_cli::suites::golden_truncation;

const DESK: &str = include_str!("../configs/desk.toml");
const PAPER: &str = include_str!("../configs/paper.toml");

fn hawkit(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hawkit"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn shorter(text: &str) -> String {
    text.replace("seeds = [0, 1, 2]", "seeds = [0]").replace("rounds = 15", "rounds = 9")
}

#[test]
fn replayed_transcript_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "desk.toml", &shorter(DESK));
    let first = dir.path().join("first");
    let o = hawkit(&cfg, &first, &["play"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("game bob=random seed=0 verdict=alice_certified"));
    let original = first.join("transcript_random_0.jsonl");
    let replay_cfg = shorter(DESK)
        .replace("bob = \"random\"", "bob = \"replay\"")
        .replace("# replay = \"out/transcript_random_0.jsonl\"", &format!("replay = {:?}", original.display().to_string()));
    let cfg2 = write_config(dir.path(), "replay.toml", &replay_cfg);
    let second = dir.path().join("second");
    let o = hawkit(&cfg2, &second, &["play"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let a = fs::read(&original).unwrap();
    let b = fs::read(second.join("transcript_replay.jsonl")).unwrap();
    assert!(a == b, "replay differs from the original transcript");
    assert_eq!(fs::read(first.join("rounds_random_0.txt")).unwrap(), fs::read(second.join("rounds_replay.txt")).unwrap());
}

#[test]
fn invalid_fields_are_named_and_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for (from, to, field) in [
        ("beta = \"1/2\"", "beta = \"1\"", "game.beta"),
        ("lambda = \"2/3\"", "lambda = \"1/3\"", "weights.lambda"),
        ("epsilon = \"1/1024\"", "epsilon = \"1/x\"", "stage.epsilon"),
        ("mode = \"desk\"", "mode = \"office\"", "stage.mode"),
    ] {
        let cfg = write_config(dir.path(), "bad.toml", &DESK.replace(from, to));
        let o = hawkit(&cfg, dir.path(), &["play"]);
        assert_eq!(o.status.code(), Some(2), "{field}");
        assert!(stderr(&o).contains(field), "{field}: {}", stderr(&o));
    }
    let cfg = write_config(dir.path(), "extra.toml", &format!("{DESK}\n[extra]\nkey = 1\n"));
    assert_eq!(hawkit(&cfg, dir.path(), &["play"]).status.code(), Some(2));
    let missing = hawkit(&dir.path().join("nope.toml"), dir.path(), &["play"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn verify_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "desk.toml", DESK);
    let o = hawkit(&cfg, dir.path(), &["verify", "--quick", "lemma-q", "slice"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report = fs::read_to_string(dir.path().join("verify_lemma-q.txt")).unwrap();
    assert!(report.starts_with("suite=lemma-q check=height_between_q_and_q_pow instances="));
    assert!(report.lines().all(|l| l.contains("status=pass")));
    assert!(dir.path().join("verify_slice.txt").exists());

    let o = hawkit(&cfg, dir.path(), &["verify", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown suite"));

    // Findings are reported without failing the run.
    let o = hawkit(&cfg, dir.path(), &["verify", "--quick", "dani"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("check=backward_conversion_lambda"));
    assert!(stdout(&o).contains("status=finding"), "{}", stdout(&o));

    // A check that fails sets exit code 1.
    let short = write_config(dir.path(), "short.toml", &DESK.replace("rounds = 15", "rounds = 1"));
    let o = hawkit(&short, dir.path(), &["verify", "--quick", "e2e"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("status=fail"));
    let o = hawkit(&cfg, dir.path(), &["dani", "--point", "1/3,1/2,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("corrected_holds=true"));
}

#[test]
fn paper_mode_warns_about_empty_windows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "paper.toml", &PAPER.replace("rounds = 6", "rounds = 3"));
    let o = hawkit(&cfg, dir.path(), &["play"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("warning: paper mode"), "{text}");
    assert!(text.contains("empty below stage 10"), "{text}");
    assert!(text.contains("truncated at q_max = 1000"), "{text}");
}

#[test]
fn systole_profile_at_origin_decays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "desk.toml", DESK);
    let o = hawkit(&cfg, dir.path(), &["systole", "--point", "0,0,0", "--float"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("systole_profile.csv")).unwrap();
    assert_eq!(csv, stdout(&o));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t_index,sigma,m,systole,argmin_p,argmin_r,argmin_q,systole_approx"));
    let values: Vec<(String, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].to_string(), f[3].to_string())
        })
        .collect();
    assert_eq!(values[0], ("1/1".into(), "1/1".into()));
    assert_eq!(values[1], ("4/5".into(), "64/125".into()));
    assert_eq!(values.len(), 22);
}

#[test]
fn badness_examples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "desk.toml", DESK);
    let o = hawkit(&cfg, dir.path(), &["badness", "--point", "2/7,-3/5,1", "--q-max", "40"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("badness=0/1\n"), "{text}");
    assert!(text.contains("argmin=10 -21 35\n"), "{text}");

    let g = |k| format_rational(&golden_truncation(k));
    let point = format!("{},{},0", g(40), g(43));
    let o = hawkit(&cfg, dir.path(), &["badness", "--point", &point, "--q-max", "1000", "--float"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let approx: f64 = text.lines().find_map(|l| l.strip_prefix("badness_approx=")).unwrap().parse().unwrap();
    assert!(approx > 0.0, "{text}");
    assert!(!text.contains("badness=0/1\n"));

    let o = hawkit(&cfg, dir.path(), &["badness", "--point", "1/2,x,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("point coordinate"));
}
