//! Bounds on `|v₁·w₂|` for two vectors of the same class whose zones meet a common ball.

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use super::delta::{delta_meets_ball, DeltaMeet, MeetConfig};
use super::stages::{stage_of_ball, v_class};
use super::witness::select_witness;
use super::{IntVec, Result, StageParams};
use crate::geometry::{ball_contains_ball, Ball};
use crate::numerics::{int, pow_i, Rational};

/// `8` for the first class, `2` afterwards.
pub fn separation_exponent(k: u32) -> i64 {
    if k == 1 {
        8
    } else {
        2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationValues {
    #[serde(with = "crate::numerics::bigint_serde")]
    pub v1_w2: BigInt,
    #[serde(with = "crate::numerics::bigint_serde")]
    pub v2_w1: BigInt,
    #[serde(with = "crate::numerics::rational_serde")]
    pub bound_12: Rational,
    #[serde(with = "crate::numerics::rational_serde")]
    pub bound_21: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SeparationOutcome {
    HypothesesUnmet { reason: String },
    Holds(SeparationValues),
    Violated(SeparationValues),
}

/// `6εR^{d_k} + 72εκ²(q₁/q₂)R^{k+1}`.
fn bound(sp: &StageParams, k: u32, q1: &BigInt, q2: &BigInt) -> Rational {
    let e = &sp.epsilon;
    int(6) * e * pow_i(&sp.r, separation_exponent(k))
        + int(72) * e * &sp.kappa * &sp.kappa * Rational::new(q1.clone(), q2.clone()) * pow_i(&sp.r, k as i64 + 1)
}

/// Checks both inner-product bounds for `v₁ ∈ V_{B₁,k}`, `v₂ ∈ V_{B₂,k}` with
/// `B₁, B₂` of stage `n + k` inside `B` of stage `n`, and both zones meeting `B`.
///
/// That `B` was accepted into the strategy's filtered family is not checked here.
pub fn separation_bound_check(
    big: &Ball,
    b1: &Ball,
    v1: &IntVec,
    b2: &Ball,
    v2: &IntVec,
    sp: &StageParams,
    k: u32,
) -> Result<SeparationOutcome> {
    let unmet = |reason: String| Ok(SeparationOutcome::HypothesesUnmet { reason });
    let Some(n) = stage_of_ball(big, sp) else {
        return unmet("outer ball has no stage".into());
    };
    for (j, bj, vj) in [(1, b1, v1), (2, b2, v2)] {
        if stage_of_ball(bj, sp) != Some(n + k) {
            return unmet(format!("ball {j} is not of stage {}", n + k));
        }
        if !ball_contains_ball(big, bj).unwrap_or(false) {
            return unmet(format!("ball {j} is not inside the outer ball"));
        }
        if !v_class(bj, n + k, k, sp, vj)? {
            return unmet(format!("v{j} = {vj} is not in class {k} of ball {j}"));
        }
        match delta_meets_ball(vj, &sp.epsilon, &sp.weights, big, &MeetConfig::default())? {
            DeltaMeet::Meets(_) => {}
            DeltaMeet::Empty => return unmet(format!("zone of v{j} misses the outer ball")),
            DeltaMeet::Undecided => return unmet(format!("zone of v{j} not certified to meet the outer ball")),
        }
    }
    let w1 = select_witness(b1, v1, &sp.weights)?.witness;
    let w2 = select_witness(b2, v2, &sp.weights)?.witness;
    let values = SeparationValues {
        v1_w2: w2.dot(v1),
        v2_w1: w1.dot(v2),
        bound_12: bound(sp, k, &v1.q, &v2.q),
        bound_21: bound(sp, k, &v2.q, &v1.q),
    };
    let holds = Rational::from_integer(values.v1_w2.abs()) <= values.bound_12
        && Rational::from_integer(values.v2_w1.abs()) <= values.bound_21;
    Ok(if holds { SeparationOutcome::Holds(values) } else { SeparationOutcome::Violated(values) })
}
