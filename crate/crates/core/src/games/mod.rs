//! Referees for the classical ball game, the hyperplane absolute game and the
//! hyperplane potential game, with pluggable players and replayable transcripts.

mod players;
mod referee;
mod transcript;

pub use players::{
    absolute_escape, CenterAlice, CenterBob, EmptyAlice, GreedyBob, RandomBob, RandomSchmidtAlice, ReplayBob,
    ShiftBob, SlabThroughCenterAlice,
};
pub use referee::{
    budget_fits, check_alice_move, check_bob_move, play, referee_absolute, referee_potential, referee_schmidt, verify_transcript,
    TargetOracle, Violation,
};
pub use transcript::{Entry, GameTranscript, Mover, MoveRecord, Termination, TranscriptError, Verdict};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Ball, Slab};
use crate::numerics::{format_rational, opt_rational_serde, rat, rational_serde, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("invalid game parameter {field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("referee for {expected:?} games called with {got:?} parameters")]
    WrongKind { expected: GameKind, got: GameKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Schmidt,
    Absolute,
    Potential,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameParams {
    pub kind: GameKind,
    #[serde(with = "opt_rational_serde")]
    pub alpha: Option<Rational>,
    #[serde(with = "rational_serde")]
    pub beta: Rational,
    #[serde(with = "opt_rational_serde")]
    pub gamma: Option<Rational>,
    pub dimension: usize,
    pub max_rounds: usize,
    /// Upper bound on `ρ_{i+1}/ρ_i` for Bob in the absolute and potential games.
    #[serde(with = "rational_serde")]
    pub shrink_cap: Rational,
    /// Longest slab list Alice may declare in one potential round.
    pub k_max: usize,
}

impl GameParams {
    pub fn default_shrink_cap() -> Rational {
        rat(99, 100)
    }

    pub fn schmidt(alpha: Rational, beta: Rational, dimension: usize, max_rounds: usize) -> Self {
        Self {
            kind: GameKind::Schmidt,
            alpha: Some(alpha),
            beta,
            gamma: None,
            dimension,
            max_rounds,
            shrink_cap: Self::default_shrink_cap(),
            k_max: 0,
        }
    }

    pub fn absolute(beta: Rational, dimension: usize, max_rounds: usize) -> Self {
        Self {
            kind: GameKind::Absolute,
            alpha: None,
            beta,
            gamma: None,
            dimension,
            max_rounds,
            shrink_cap: Self::default_shrink_cap(),
            k_max: 1,
        }
    }

    pub fn potential(beta: Rational, gamma: Rational, dimension: usize, max_rounds: usize, k_max: usize) -> Self {
        Self {
            kind: GameKind::Potential,
            alpha: None,
            beta,
            gamma: Some(gamma),
            dimension,
            max_rounds,
            shrink_cap: Self::default_shrink_cap(),
            k_max,
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let open_unit = |field: &'static str, v: &Rational| {
            if v.is_positive() && *v < Rational::one() {
                Ok(())
            } else {
                Err(GameError::InvalidParam { field, reason: format!("{} not in (0,1)", format_rational(v)) })
            }
        };
        if self.dimension == 0 {
            return Err(GameError::InvalidParam { field: "dimension", reason: "must be positive".into() });
        }
        if self.max_rounds == 0 {
            return Err(GameError::InvalidParam { field: "max_rounds", reason: "must be positive".into() });
        }
        open_unit("shrink_cap", &self.shrink_cap)?;
        match self.kind {
            GameKind::Schmidt => {
                let alpha = self.alpha.as_ref().ok_or(GameError::InvalidParam {
                    field: "alpha",
                    reason: "required for schmidt games".into(),
                })?;
                open_unit("alpha", alpha)?;
                open_unit("beta", &self.beta)?;
            }
            GameKind::Absolute => {
                if !self.beta.is_positive() || self.beta >= rat(1, 3) {
                    return Err(GameError::InvalidParam {
                        field: "beta",
                        reason: format!("{} not in (0,1/3)", format_rational(&self.beta)),
                    });
                }
            }
            GameKind::Potential => {
                open_unit("beta", &self.beta)?;
                let gamma = self.gamma.as_ref().ok_or(GameError::InvalidParam {
                    field: "gamma",
                    reason: "required for potential games".into(),
                })?;
                if !gamma.is_positive() {
                    return Err(GameError::InvalidParam {
                        field: "gamma",
                        reason: format!("{} must be positive", format_rational(gamma)),
                    });
                }
                if self.k_max == 0 {
                    return Err(GameError::InvalidParam { field: "k_max", reason: "must be positive".into() });
                }
            }
        }
        Ok(())
    }

    pub fn alpha_or_zero(&self) -> Rational {
        self.alpha.clone().unwrap_or_else(Rational::zero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AliceMove {
    Schmidt { ball: Ball },
    Absolute { slab: Slab },
    Potential { slabs: Vec<Slab> },
}

impl AliceMove {
    pub fn kind(&self) -> GameKind {
        match self {
            AliceMove::Schmidt { .. } => GameKind::Schmidt,
            AliceMove::Absolute { .. } => GameKind::Absolute,
            AliceMove::Potential { .. } => GameKind::Potential,
        }
    }

    pub fn slabs(&self) -> &[Slab] {
        match self {
            AliceMove::Schmidt { .. } => &[],
            AliceMove::Absolute { slab } => std::slice::from_ref(slab),
            AliceMove::Potential { slabs } => slabs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BobAction {
    Move(Ball),
    Resign,
}

/// Alice as a self-contained state machine.
pub trait Alice {
    fn respond(&mut self, round: usize, ball: &Ball, params: &GameParams) -> AliceMove;

    /// Free-form record appended to the transcript's final line.
    fn evidence(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

/// Bob as a self-contained state machine.
pub trait Bob {
    /// The starting ball `B_0`.
    fn open(&mut self, params: &GameParams) -> BobAction;

    /// `B_round` given `B_{round-1}` and Alice's reply to it.
    fn respond(&mut self, round: usize, ball: &Ball, alice: &AliceMove, params: &GameParams) -> BobAction;
}

impl<T: Alice + ?Sized> Alice for Box<T> {
    fn respond(&mut self, round: usize, ball: &Ball, params: &GameParams) -> AliceMove {
        (**self).respond(round, ball, params)
    }

    fn evidence(&self) -> serde_json::Value {
        (**self).evidence()
    }
}

impl<T: Bob + ?Sized> Bob for Box<T> {
    fn open(&mut self, params: &GameParams) -> BobAction {
        (**self).open(params)
    }

    fn respond(&mut self, round: usize, ball: &Ball, alice: &AliceMove, params: &GameParams) -> BobAction {
        (**self).respond(round, ball, alice, params)
    }
}
