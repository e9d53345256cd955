//! TOML run configuration, validated into engine parameters.

use std::path::{Path, PathBuf};

use hawkit::diophantine::{q_window, Mode, StageParams};
use hawkit::dynamics::geometric_sigma_grid;
use hawkit::games::GameParams;
use hawkit::geometry::{Ball, Point};
use hawkit::numerics::{format_rational, parse_rational, Rational, Weights};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field}: {reason}")]
    Field { field: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
}

fn field(field: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Field { field: field.into(), reason: reason.to_string() }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub weights: RawWeights,
    pub game: RawGame,
    pub stage: RawStage,
    #[serde(default)]
    pub play: RawPlay,
    #[serde(default)]
    pub verify: RawVerify,
    #[serde(default)]
    pub dynamics: RawDynamics,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawWeights {
    pub lambda: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGame {
    pub beta: String,
    pub gamma: String,
    pub rounds: usize,
    pub shrink_cap: Option<String>,
    pub k_max: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawStage {
    pub mode: String,
    #[serde(rename = "R")]
    pub r: String,
    pub epsilon: String,
    pub kappa: String,
    pub rho0: String,
    pub center: [String; 3],
    pub q_max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BobKind {
    Random,
    Greedy,
    Center,
    Replay,
}

impl BobKind {
    pub fn name(self) -> &'static str {
        match self {
            BobKind::Random => "random",
            BobKind::Greedy => "greedy",
            BobKind::Center => "center",
            BobKind::Replay => "replay",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawPlay {
    pub bob: BobKind,
    pub seeds: Vec<u64>,
    pub greedy_q_bound: u64,
    pub replay: Option<PathBuf>,
}

impl Default for RawPlay {
    fn default() -> Self {
        Self { bob: BobKind::Random, seeds: vec![0], greedy_q_bound: 8, replay: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawVerify {
    pub seed: u64,
    pub quick: bool,
}

impl Default for RawVerify {
    fn default() -> Self {
        Self { seed: 1, quick: false }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawDynamics {
    pub sigma_ratio: String,
    pub decay_floor: String,
    pub q_max: u64,
}

impl Default for RawDynamics {
    fn default() -> Self {
        Self { sigma_ratio: "4/5".into(), decay_floor: "1/1048576".into(), q_max: 200 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawOutput {
    pub dir: PathBuf,
}

impl Default for RawOutput {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub weights: Weights,
    pub game: GameParams,
    pub stage: StageParams,
    pub play: RawPlay,
    pub verify: RawVerify,
    pub sigma_ratio: Rational,
    pub decay_floor: Rational,
    pub dani_q_max: u64,
    pub output_dir: PathBuf,
    pub warnings: Vec<String>,
}

fn rational(name: &str, s: &str) -> Result<Rational, ConfigError> {
    parse_rational(s).map_err(|e| field(name, e))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let lambda = rational("weights.lambda", &raw.weights.lambda)?;
        let weights = Weights::from_lambda(lambda).map_err(|e| field("weights.lambda", e))?;

        let beta = rational("game.beta", &raw.game.beta)?;
        let gamma = rational("game.gamma", &raw.game.gamma)?;
        let mut game = GameParams::potential(beta.clone(), gamma.clone(), 3, raw.game.rounds, raw.game.k_max);
        if let Some(s) = &raw.game.shrink_cap {
            game.shrink_cap = rational("game.shrink_cap", s)?;
        }
        game.validate().map_err(|e| match e {
            hawkit::games::GameError::InvalidParam { field: f, reason } => field(&format!("game.{f}"), reason),
            other => field("game", other),
        })?;
        if raw.game.rounds == 0 {
            return Err(field("game.rounds", "must be positive"));
        }

        let mode = match raw.stage.mode.as_str() {
            "desk" => Mode::Desk,
            "paper" => Mode::Paper,
            other => return Err(field("stage.mode", format!("unknown mode {other:?}, expected \"desk\" or \"paper\""))),
        };
        let center = raw
            .stage
            .center
            .iter()
            .enumerate()
            .map(|(i, s)| rational(&format!("stage.center[{i}]"), s))
            .collect::<Result<Vec<_>, _>>()?;
        let rho0 = rational("stage.rho0", &raw.stage.rho0)?;
        let b0 = Ball::new(Point(center), rho0).map_err(|e| field("stage.rho0", e))?;
        let k_max = u32::try_from(raw.game.k_max).map_err(|e| field("game.k_max", e))?;
        let stage = StageParams {
            b0,
            kappa: rational("stage.kappa", &raw.stage.kappa)?,
            r: rational("stage.R", &raw.stage.r)?,
            epsilon: rational("stage.epsilon", &raw.stage.epsilon)?,
            beta,
            gamma,
            weights: weights.clone(),
            mode,
            q_max: raw.stage.q_max,
            k_max,
        };
        stage.validate().map_err(|e| match e {
            hawkit::diophantine::DiophantineError::InvalidParam { field: f, reason } => {
                field(&format!("stage.{f}"), reason)
            }
            other => field("stage", other),
        })?;

        let sigma_ratio = rational("dynamics.sigma_ratio", &raw.dynamics.sigma_ratio)?;
        let decay_floor = rational("dynamics.decay_floor", &raw.dynamics.decay_floor)?;
        geometric_sigma_grid(&sigma_ratio, weights.denominator(), &decay_floor)
            .map_err(|e| field("dynamics.sigma_ratio", e))?;
        if raw.dynamics.q_max == 0 {
            return Err(field("dynamics.q_max", "must be positive"));
        }
        if raw.play.bob == BobKind::Replay && raw.play.replay.is_none() {
            return Err(field("play.replay", "required when play.bob = \"replay\""));
        }

        let mut cfg = Self {
            weights,
            game,
            stage,
            play: raw.play,
            verify: raw.verify,
            sigma_ratio,
            decay_floor,
            dani_q_max: raw.dynamics.q_max,
            output_dir: raw.output.dir,
            warnings: Vec::new(),
        };
        cfg.warnings = cfg.window_warnings();
        Ok(cfg)
    }

    /// Grid of `σ` values for trajectory profiles.
    pub fn sigma_grid(&self) -> Vec<Rational> {
        geometric_sigma_grid(&self.sigma_ratio, self.weights.denominator(), &self.decay_floor).expect("checked at load")
    }

    /// Where the stage windows are empty or cut at `q_max`.
    fn window_warnings(&self) -> Vec<String> {
        const HORIZON: u32 = 400;
        let mut first_nonempty = None;
        let mut first_truncated = None;
        for n in 1..=HORIZON {
            let Ok(w) = q_window(n, &self.stage) else { break };
            if first_nonempty.is_none() && !w.is_empty() {
                first_nonempty = Some(n);
            }
            if w.truncated {
                first_truncated = Some(n);
                break;
            }
        }
        let mut out = Vec::new();
        if self.stage.mode == Mode::Paper {
            out.push(format!(
                "paper mode with epsilon = {}: V_B enumeration is {}",
                format_rational(&self.stage.epsilon),
                match first_nonempty {
                    Some(n) => format!("empty below stage {n}"),
                    None => format!("empty through stage {HORIZON}"),
                }
            ));
        }
        if let Some(n) = first_truncated {
            out.push(format!("V_B enumeration is truncated at q_max = {} from stage {n} on", self.stage.q_max));
        }
        out
    }
}
