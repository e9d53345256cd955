//! Danger zones `Δ_ε(v)` around rational points, Minkowski witnesses and
//! heights, the stage families of balls and vectors, and the separation bound.

mod delta;
mod separation;
mod stages;
mod witness;

pub use delta::{delta_contains, delta_meets_ball, meeting_box, target_oracle, DeltaMeet, MeetConfig};
pub use separation::{separation_bound_check, separation_exponent, SeparationOutcome, SeparationValues};
pub use stages::{
    class_of, class_window_contains, height_threshold, in_family, kappa_box, q_window, r2_condition, stage_of_ball,
    v_class, v_family, Family, FamilyEntry, QWindow,
};
pub use witness::{height, minkowski_witness, plane_of, select_witness, witness_set, SelectedWitness};

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Ball;
use crate::numerics::{bigint_serde, format_rational, rat, rational_serde, NumericsError, Rational, Weights};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiophantineError {
    #[error("invalid stage parameter {field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("witness search exhausted for v = {v} at z = {z}")]
    WitnessSearchExhausted { v: String, z: String },
    #[error("q must be at least 1, got {0}")]
    NonPositiveQ(String),
    #[error("points must have dimension 3, got {0}")]
    Dimension(usize),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, DiophantineError>;

/// `v = (p, r, q)` with `q ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntVec {
    #[serde(with = "bigint_serde")]
    pub p: BigInt,
    #[serde(with = "bigint_serde")]
    pub r: BigInt,
    #[serde(with = "bigint_serde")]
    pub q: BigInt,
}

impl IntVec {
    pub fn new(p: impl Into<BigInt>, r: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self> {
        let q = q.into();
        if q < BigInt::one() {
            return Err(DiophantineError::NonPositiveQ(q.to_string()));
        }
        Ok(Self { p: p.into(), r: r.into(), q })
    }

    pub fn q_rational(&self) -> Rational {
        Rational::from_integer(self.q.clone())
    }

    /// `(p/q, r/q)`.
    pub fn point(&self) -> (Rational, Rational) {
        (Rational::new(self.p.clone(), self.q.clone()), Rational::new(self.r.clone(), self.q.clone()))
    }

    pub fn q_u64(&self) -> Option<u64> {
        self.q.to_u64()
    }
}

impl fmt::Display for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.p, self.r, self.q)
    }
}

/// Integer vector `(a, b, c)` with `(a, b) ≠ (0, 0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Witness {
    #[serde(with = "bigint_serde")]
    pub a: BigInt,
    #[serde(with = "bigint_serde")]
    pub b: BigInt,
    #[serde(with = "bigint_serde")]
    pub c: BigInt,
}

impl Witness {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        Self { a: a.into(), b: b.into(), c: c.into() }
    }

    /// `a·p + b·r + c·q`.
    pub fn dot(&self, v: &IntVec) -> BigInt {
        &self.a * &v.p + &self.b * &v.r + &self.c * &v.q
    }

    pub fn is_nondegenerate(&self) -> bool {
        !(self.a.is_zero() && self.b.is_zero())
    }

    /// `max{|a|, |b + z·a|}`.
    pub fn spread(&self, z: &Rational) -> Rational {
        let a = Rational::from_integer(self.a.clone());
        let t = Rational::from_integer(self.b.clone()) + z * &a;
        a.abs().max(t.abs())
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The constant inequalities required by the winning-strategy proof.
    Paper,
    /// Small enumerable constants; only `R > 1/β` and `ε > 0` are enforced.
    Desk,
}

/// Constants of the strategy and the starting ball `B_0` they are tied to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageParams {
    pub b0: Ball,
    #[serde(with = "rational_serde")]
    pub kappa: Rational,
    #[serde(rename = "R", with = "rational_serde")]
    pub r: Rational,
    #[serde(with = "rational_serde")]
    pub epsilon: Rational,
    #[serde(with = "rational_serde")]
    pub beta: Rational,
    #[serde(with = "rational_serde")]
    pub gamma: Rational,
    #[serde(with = "weights_serde")]
    pub weights: Weights,
    pub mode: Mode,
    pub q_max: u64,
    pub k_max: u32,
}

mod weights_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &Weights, s: S) -> std::result::Result<S::Ok, S::Error> {
        format_rational(w.lambda()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Weights, D::Error> {
        let s = String::deserialize(d)?;
        let lambda = crate::numerics::parse_rational(&s).map_err(serde::de::Error::custom)?;
        Weights::from_lambda(lambda).map_err(serde::de::Error::custom)
    }
}

/// Outcome of the exact check of one constant inequality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstantCheck {
    pub name: &'static str,
    pub holds: bool,
    /// False when interval refinement could not separate the two sides.
    pub exact: bool,
}

impl StageParams {
    pub fn rho0(&self) -> &Rational {
        self.b0.radius()
    }

    /// `H_n = 3εκ ρ₀⁻¹ Rⁿ`.
    pub fn h(&self, n: u32) -> Rational {
        rat(3, 1) * &self.epsilon * &self.kappa / self.rho0() * crate::numerics::pow_i(&self.r, n as i64)
    }

    /// `R^{-n} ρ₀`, the top radius of stage `n`.
    pub fn stage_radius(&self, n: u32) -> Rational {
        self.rho0() * crate::numerics::pow_i(&self.r, -(n as i64))
    }

    /// The paper-mode inequalities, each decided exactly.
    pub fn constant_checks(&self) -> Vec<ConstantCheck> {
        let one = Rational::one();
        let c = self.b0.center().coords();
        let kappa_ok = c.iter().all(|x| x.abs() + self.rho0() <= &self.kappa - &one);
        let r_ok = self.r >= rat(4, 1) / &self.beta
            && self.r >= Rational::from_integer(BigInt::from(10_000_000u64)) * crate::numerics::pow_i(&self.kappa, 4);
        let eps_bound = rat(1, 100) * crate::numerics::pow_i(&self.kappa, -2) * crate::numerics::pow_i(&self.r, -10) * self.rho0();
        let r2 = r2_condition(&self.r, &self.beta, &self.gamma);
        vec![
            ConstantCheck { name: "kappa", holds: kappa_ok, exact: true },
            ConstantCheck { name: "R", holds: r_ok, exact: true },
            ConstantCheck { name: "epsilon", holds: self.epsilon <= eps_bound, exact: true },
            ConstantCheck { name: "R2", holds: r2.as_ref().is_ok_and(|d| d.ordering != std::cmp::Ordering::Less), exact: r2.is_ok_and(|d| d.exact) },
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: String| Err(DiophantineError::InvalidParam { field, reason });
        let one = Rational::one();
        if self.b0.dim() != 3 {
            return Err(DiophantineError::Dimension(self.b0.dim()));
        }
        if self.rho0() > &one {
            return bad("rho0", format!("{} exceeds 1", format_rational(self.rho0())));
        }
        if self.kappa <= one {
            return bad("kappa", format!("{} must exceed 1", format_rational(&self.kappa)));
        }
        if !self.beta.is_positive() || self.beta >= one {
            return bad("beta", format!("{} not in (0,1)", format_rational(&self.beta)));
        }
        if !self.gamma.is_positive() {
            return bad("gamma", format!("{} must be positive", format_rational(&self.gamma)));
        }
        if !self.epsilon.is_positive() {
            return bad("epsilon", format!("{} must be positive", format_rational(&self.epsilon)));
        }
        if &self.r * &self.beta <= one {
            return bad("R", format!("{} must exceed 1/beta", format_rational(&self.r)));
        }
        if self.q_max == 0 {
            return bad("q_max", "must be positive".into());
        }
        if self.k_max == 0 {
            return bad("k_max", "must be positive".into());
        }
        if self.mode == Mode::Paper {
            for check in self.constant_checks() {
                if !check.holds || !check.exact {
                    let reason = if check.exact { "inequality fails" } else { "inequality undecided at precision cap" };
                    return bad(check.name, reason.into());
                }
            }
        }
        Ok(())
    }
}
