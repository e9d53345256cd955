//! Subcommand implementations. Each returns the text it would print and
//! writes its files under the configured output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hawkit::diophantine::target_oracle;
use hawkit::dynamics::{badness_constant, dani_check, profile_csv, trajectory_profile};
use hawkit::games::{play, Bob, CenterBob, GameTranscript, GreedyBob, RandomBob, ReplayBob};
use hawkit::numerics::{format_rational, parse_rational, Rational};
use hawkit::strategy::{StrategyOptions, StrategyState};
use thiserror::Error;

use crate::config::{BobKind, ConfigError, RunConfig};
use crate::suites::{run_suite, Scale, SuiteError, SuiteReport, SUITES};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("{0}")]
    Engine(String),
}

impl CommandError {
    /// 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) | CommandError::Usage(_) => 2,
            CommandError::Suite(SuiteError::Unknown(_)) => 2,
            _ => 1,
        }
    }
}

/// Printed text plus whether every check passed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub ok: bool,
    pub files: Vec<PathBuf>,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CommandError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CommandError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io(&path))?;
    Ok(path)
}

/// Parses `x,y,z` as three rationals.
pub fn parse_point(s: &str) -> Result<[Rational; 3], CommandError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [x, y, z] = parts.as_slice() else {
        return Err(CommandError::Usage(format!("point {s:?} must be three comma-separated rationals")));
    };
    let p = |t: &str| parse_rational(t).map_err(|e| CommandError::Usage(format!("point coordinate {t:?}: {e}")));
    Ok([p(x)?, p(y)?, p(z)?])
}

fn make_bob(cfg: &RunConfig, seed: u64) -> Result<Box<dyn Bob>, CommandError> {
    let b0 = cfg.stage.b0.clone();
    Ok(match cfg.play.bob {
        BobKind::Random => Box::new(RandomBob::new(b0, seed)),
        BobKind::Greedy => Box::new(GreedyBob::new(b0, cfg.play.greedy_q_bound)),
        BobKind::Center => Box::new(CenterBob::new(b0)),
        BobKind::Replay => {
            let path = cfg.play.replay.as_ref().expect("checked at load");
            let text = fs::read_to_string(path)
                .map_err(|e| CommandError::Usage(format!("play.replay {}: {e}", path.display())))?;
            let t = GameTranscript::from_jsonl(&text)
                .map_err(|e| CommandError::Usage(format!("play.replay {}: {e}", path.display())))?;
            Box::new(ReplayBob::from_transcript(&t))
        }
    })
}

/// Plays one game per configured seed and writes each transcript.
pub fn cmd_play(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let sp = &cfg.stage;
    let oracle = target_oracle(sp.epsilon.clone(), sp.weights.clone(), sp.q_max);
    let mut text = String::new();
    let mut files = Vec::new();
    for w in &cfg.warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let seeds = if cfg.play.bob == BobKind::Replay { vec![0] } else { cfg.play.seeds.clone() };
    for seed in seeds {
        let mut alice = StrategyState::new(sp.clone(), StrategyOptions::default())
            .map_err(|e| CommandError::Engine(e.to_string()))?;
        let mut bob = make_bob(cfg, seed)?;
        let t = play(&mut alice, bob.as_mut(), &cfg.game, Some(&oracle)).map_err(|e| CommandError::Engine(e.to_string()))?;
        let name = cfg.play.bob.name();
        let stem = if cfg.play.bob == BobKind::Replay { name.to_string() } else { format!("{name}_{seed}") };
        files.push(write_file(&cfg.output_dir, &format!("transcript_{stem}.jsonl"), &t.to_jsonl())?);
        let mut rounds = String::new();
        for log in alice.logs() {
            let stage = log.stage.map_or("none".into(), |n| n.to_string());
            let filter = log.filter.as_ref().map_or("none".into(), |f| f.holds.to_string());
            let planes: Vec<String> = log.planes.iter().map(|p| format!("k{}:{}", p.k, p.choice.plane)).collect();
            let _ = writeln!(
                rounds,
                "round={} stage={stage} first_in_stage={} filter={filter} planes={} trimmed={} findings={}",
                log.round,
                log.first_in_stage,
                if planes.is_empty() { "none".into() } else { planes.join(";") },
                log.trimmed,
                log.findings.len(),
            );
        }
        files.push(write_file(&cfg.output_dir, &format!("rounds_{stem}.txt"), &rounds)?);
        let verdict = serde_json::to_value(t.verdict).map_err(|e| CommandError::Engine(e.to_string()))?;
        let basis = t.verdict_evidence.get("basis").and_then(|b| b.as_str()).unwrap_or("none");
        let _ = writeln!(text, "game bob={name} seed={seed} verdict={} basis={basis}", verdict.as_str().unwrap_or("?"));
        text.push_str(&rounds);
    }
    Ok(Outcome { text, ok: true, files })
}

/// Runs the named suites (all when `names` is empty).
pub fn cmd_verify(cfg: &RunConfig, names: &[String], quick: bool) -> Result<Outcome, CommandError> {
    let scale = if quick || cfg.verify.quick { Scale::quick() } else { Scale::full() };
    let names: Vec<String> = if names.is_empty() { SUITES.iter().map(|s| s.to_string()).collect() } else { names.to_vec() };
    if let Some(bad) = names.iter().find(|n| !SUITES.contains(&n.as_str())) {
        return Err(SuiteError::Unknown(bad.clone()).into());
    }
    let mut text = String::new();
    let mut files = Vec::new();
    let mut ok = true;
    for name in &names {
        let rep: SuiteReport = run_suite(name, cfg, &scale)?;
        ok &= rep.passed();
        let body = rep.to_text();
        files.push(write_file(&cfg.output_dir, &format!("verify_{name}.txt"), &body)?);
        text.push_str(&body);
    }
    Ok(Outcome { text, ok, files })
}

/// Systole profile along the configured `σ` grid.
pub fn cmd_systole(cfg: &RunConfig, point: &[Rational; 3], float: bool) -> Result<Outcome, CommandError> {
    let [x, y, z] = point;
    let rows = trajectory_profile(x, y, z, &cfg.weights, &cfg.sigma_grid()).map_err(|e| CommandError::Engine(e.to_string()))?;
    let csv = profile_csv(&rows, float);
    let file = write_file(&cfg.output_dir, "systole_profile.csv", &csv)?;
    Ok(Outcome { text: csv, ok: true, files: vec![file] })
}

/// Exact badness constant over `1 ≤ q ≤ q_max`.
pub fn cmd_badness(cfg: &RunConfig, point: &[Rational; 3], q_max: u64, float: bool) -> Result<Outcome, CommandError> {
    let [x, y, z] = point;
    let b = badness_constant(x, y, z, &cfg.weights, q_max).map_err(|e| CommandError::Engine(e.to_string()))?;
    let [p, r, q] = &b.argmin;
    let mut text = String::new();
    let _ = writeln!(text, "x={}\ny={}\nz={}", format_rational(x), format_rational(y), format_rational(z));
    let _ = writeln!(text, "weights={}\nq_max={q_max}\nbadness={}\nargmin={p} {r} {q}", cfg.weights, b.value);
    if float {
        let _ = writeln!(text, "badness_approx={:e}", b.value.to_f64());
    }
    let file = write_file(&cfg.output_dir, "badness.txt", &text)?;
    Ok(Outcome { text, ok: true, files: vec![file] })
}

/// Truncated systole–badness correspondence at one point.
pub fn cmd_dani(cfg: &RunConfig, point: &[Rational; 3], q_max: u64) -> Result<Outcome, CommandError> {
    let [x, y, z] = point;
    let r = dani_check(x, y, z, &cfg.weights, q_max, &cfg.sigma_grid()).map_err(|e| CommandError::Engine(e.to_string()))?;
    let text = r.to_kv();
    let file = write_file(&cfg.output_dir, "dani.txt", &text)?;
    Ok(Outcome { text, ok: r.corrected_holds(), files: vec![file] })
}
