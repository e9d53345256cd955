use num_traits::One;
use serde::Serialize;
use serde_json::json;

use super::players::absolute_escape;
use super::transcript::{Entry, GameTranscript, MoveRecord, Mover, Termination, Verdict};
use super::{Alice, AliceMove, Bob, BobAction, GameError, GameKind, GameParams};
use crate::geometry::{ball_avoids_slab, ball_contains_ball, point_in_slab, Ball, Point};
use crate::numerics::{cmp_power_sums, format_rational, PowerProduct, Rational};

/// Finite-horizon membership test for the target set.
pub type TargetOracle<'a> = &'a dyn Fn(&Point) -> bool;

/// Interval refinement cap for fractional-exponent budgets.
const BUDGET_CAP_BITS: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub round: usize,
    pub mover: Option<Mover>,
    pub reason: String,
}

fn geo<T>(r: crate::geometry::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn radius_eq(label: &str, got: &Rational, want: &Rational) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{label} radius {} but must equal {}", format_rational(got), format_rational(want)))
    }
}

fn within(label: &str, outer_center: &Point, inner_center: &Point, reach: &Rational) -> Result<(), String> {
    let d2 = geo(outer_center.dist_sq(inner_center))?;
    if d2 <= reach * reach {
        Ok(())
    } else {
        Err(format!("{label} center moved farther than {}", format_rational(reach)))
    }
}

fn radius_window(params: &GameParams, prev: &Ball, next: &Ball) -> Result<(), String> {
    let lo = &params.beta * prev.radius();
    let hi = &params.shrink_cap * prev.radius();
    if next.radius() < &lo {
        return Err(format!("radius {} below beta*rho = {}", format_rational(next.radius()), format_rational(&lo)));
    }
    if next.radius() > &hi {
        return Err(format!(
            "radius {} above shrink_cap*rho = {}",
            format_rational(next.radius()),
            format_rational(&hi)
        ));
    }
    Ok(())
}

/// `Σ width^γ ≤ (β·ρ)^γ`; undecidable ties count as legal.
pub(crate) fn budget_holds(params: &GameParams, rho: &Rational, widths: &[Rational]) -> Result<bool, String> {
    let gamma = params.gamma.clone().ok_or("gamma missing")?;
    let lhs: Vec<PowerProduct> = widths
        .iter()
        .map(|w| PowerProduct::power(w.clone(), gamma.clone()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let rhs = PowerProduct::power(&params.beta * rho, gamma).map_err(|e| e.to_string())?;
    Ok(cmp_power_sums(&lhs, &[rhs], BUDGET_CAP_BITS).is_le())
}

/// Whether slabs of these widths fit the potential-game budget at radius `rho`.
pub fn budget_fits(params: &GameParams, rho: &Rational, slabs: &[crate::geometry::Slab]) -> bool {
    let widths: Vec<Rational> = slabs.iter().map(|s| s.width().clone()).collect();
    budget_holds(params, rho, &widths).unwrap_or(false)
}

/// Legality of Alice's reply to `ball`; `Err` carries the reason.
pub fn check_alice_move(params: &GameParams, ball: &Ball, mv: &AliceMove) -> Result<(), String> {
    if mv.kind() != params.kind {
        return Err(format!("{:?} move in a {:?} game", mv.kind(), params.kind));
    }
    match mv {
        AliceMove::Schmidt { ball: a } => {
            if a.dim() != ball.dim() {
                return Err(format!("dimension {} vs {}", a.dim(), ball.dim()));
            }
            let alpha = params.alpha_or_zero();
            radius_eq("alice", a.radius(), &(&alpha * ball.radius()))?;
            within("alice", ball.center(), a.center(), &((Rational::one() - alpha) * ball.radius()))
        }
        AliceMove::Absolute { slab } => {
            if slab.plane().dim() != ball.dim() {
                return Err(format!("dimension {} vs {}", slab.plane().dim(), ball.dim()));
            }
            let cap = &params.beta * ball.radius();
            if slab.width() > &cap {
                return Err(format!("slab width {} above beta*rho = {}", format_rational(slab.width()), format_rational(&cap)));
            }
            Ok(())
        }
        AliceMove::Potential { slabs } => {
            if slabs.len() > params.k_max {
                return Err(format!("{} slabs declared, k_max is {}", slabs.len(), params.k_max));
            }
            if let Some(s) = slabs.iter().find(|s| s.plane().dim() != ball.dim()) {
                return Err(format!("dimension {} vs {}", s.plane().dim(), ball.dim()));
            }
            let widths: Vec<Rational> = slabs.iter().map(|s| s.width().clone()).collect();
            if budget_holds(params, ball.radius(), &widths)? {
                Ok(())
            } else {
                Err("slab budget exceeds (beta*rho)^gamma".into())
            }
        }
    }
}

/// Legality of Bob's `next` after `prev` and Alice's reply `alice`.
pub fn check_bob_move(params: &GameParams, prev: &Ball, alice: &AliceMove, next: &Ball) -> Result<(), String> {
    if next.dim() != params.dimension {
        return Err(format!("dimension {} but game has {}", next.dim(), params.dimension));
    }
    match alice {
        AliceMove::Schmidt { ball: a } => {
            radius_eq("bob", next.radius(), &(&params.beta * a.radius()))?;
            within("bob", a.center(), next.center(), &((Rational::one() - &params.beta) * a.radius()))
        }
        AliceMove::Absolute { slab } => {
            if !geo(ball_contains_ball(prev, next))? {
                return Err("ball not contained in the previous ball".into());
            }
            if !geo(ball_avoids_slab(next, slab))? {
                return Err("ball meets Alice's slab".into());
            }
            radius_window(params, prev, next)
        }
        AliceMove::Potential { .. } => {
            if !geo(ball_contains_ball(prev, next))? {
                return Err("ball not contained in the previous ball".into());
            }
            radius_window(params, prev, next)
        }
    }
}

fn require_kind(params: &GameParams, expected: GameKind) -> Result<(), GameError> {
    if params.kind == expected {
        Ok(())
    } else {
        Err(GameError::WrongKind { expected, got: params.kind })
    }
}

pub fn referee_schmidt(
    alice: &mut dyn Alice,
    bob: &mut dyn Bob,
    params: &GameParams,
    oracle: Option<TargetOracle>,
) -> Result<GameTranscript, GameError> {
    require_kind(params, GameKind::Schmidt)?;
    play(alice, bob, params, oracle)
}

pub fn referee_absolute(
    alice: &mut dyn Alice,
    bob: &mut dyn Bob,
    params: &GameParams,
    oracle: Option<TargetOracle>,
) -> Result<GameTranscript, GameError> {
    require_kind(params, GameKind::Absolute)?;
    play(alice, bob, params, oracle)
}

pub fn referee_potential(
    alice: &mut dyn Alice,
    bob: &mut dyn Bob,
    params: &GameParams,
    oracle: Option<TargetOracle>,
) -> Result<GameTranscript, GameError> {
    require_kind(params, GameKind::Potential)?;
    play(alice, bob, params, oracle)
}

/// Runs `params.max_rounds` rounds of the game selected by `params.kind`.
pub fn play(
    alice: &mut dyn Alice,
    bob: &mut dyn Bob,
    params: &GameParams,
    oracle: Option<TargetOracle>,
) -> Result<GameTranscript, GameError> {
    params.validate()?;
    let mut moves = Vec::new();
    let mut termination = Termination::Completed;
    let mut current = match bob.open(params) {
        BobAction::Resign => None,
        BobAction::Move(b) if b.dim() != params.dimension => {
            termination = Termination::BobForfeit {
                round: 0,
                reason: format!("dimension {} but game has {}", b.dim(), params.dimension),
                attempted: Some(b),
            };
            None
        }
        BobAction::Move(b) => Some(b),
    };
    match &current {
        Some(b0) => moves.push(MoveRecord { round: 0, entry: Entry::Bob(b0.clone()) }),
        None if termination == Termination::Completed => termination = Termination::BobResigned { round: 0 },
        None => {}
    }

    if let Some(mut ball) = current.take() {
        for i in 0..params.max_rounds {
            let mv = alice.respond(i, &ball, params);
            if let Err(reason) = check_alice_move(params, &ball, &mv) {
                termination = Termination::AliceForfeit { round: i, reason, attempted: mv };
                break;
            }
            moves.push(MoveRecord { round: i, entry: Entry::Alice(mv.clone()) });
            match bob.respond(i + 1, &ball, &mv, params) {
                BobAction::Resign => {
                    let stuck = match &mv {
                        AliceMove::Absolute { slab } => absolute_escape(&ball, slab, params).is_none(),
                        _ => false,
                    };
                    termination = if stuck {
                        Termination::BobStuck { round: i + 1 }
                    } else {
                        Termination::BobResigned { round: i + 1 }
                    };
                    break;
                }
                BobAction::Move(next) => {
                    if let Err(reason) = check_bob_move(params, &ball, &mv, &next) {
                        termination = Termination::BobForfeit { round: i + 1, reason, attempted: Some(next) };
                        break;
                    }
                    moves.push(MoveRecord { round: i + 1, entry: Entry::Bob(next.clone()) });
                    ball = next;
                }
            }
        }
        current = Some(ball);
    }

    let mut t = GameTranscript {
        params: params.clone(),
        moves,
        final_ball: current,
        verdict: Verdict::Undetermined,
        verdict_evidence: serde_json::Value::Null,
        termination,
    };
    let (verdict, basis, slab_hit, oracle_result) = decide(&t, oracle);
    t.verdict = verdict;
    t.verdict_evidence = json!({
        "basis": basis,
        "slab_hit": slab_hit,
        "oracle": oracle_result,
        "alice": alice.evidence(),
    });
    Ok(t)
}

type Decision = (Verdict, Option<&'static str>, Option<serde_json::Value>, Option<bool>);

fn decide(t: &GameTranscript, oracle: Option<TargetOracle>) -> Decision {
    match t.termination {
        Termination::Completed => {}
        Termination::AliceForfeit { .. } => return (Verdict::Undetermined, Some("alice_forfeit"), None, None),
        _ => return (Verdict::AliceCertified, Some("bob_forfeit"), None, None),
    }
    let Some(fin) = &t.final_ball else {
        return (Verdict::Undetermined, None, None, None);
    };
    let x = fin.center();
    let oracle_result = oracle.map(|f| f(x));
    if t.params.kind == GameKind::Potential {
        for (round, mv) in t.alice_moves() {
            for (index, s) in mv.slabs().iter().enumerate() {
                if point_in_slab(x, s).unwrap_or(false) {
                    let hit = json!({ "round": round, "index": index });
                    return (Verdict::AliceCertified, Some("slab"), Some(hit), oracle_result);
                }
            }
        }
    }
    if oracle_result == Some(true) {
        (Verdict::AliceCertified, Some("oracle"), None, oracle_result)
    } else {
        (Verdict::Undetermined, None, None, oracle_result)
    }
}

/// Replays every legality predicate over a transcript.
pub fn verify_transcript(t: &GameTranscript) -> Vec<Violation> {
    let mut out = Vec::new();
    let params = &t.params;
    if let Err(e) = params.validate() {
        out.push(Violation { round: 0, mover: None, reason: e.to_string() });
        return out;
    }
    let mut prev: Option<&Ball> = None;
    let mut pending: Option<&AliceMove> = None;
    let mut expected_round = 0;
    for m in &t.moves {
        let mut flag = |reason: String| out.push(Violation { round: m.round, mover: Some(m.mover()), reason });
        match &m.entry {
            Entry::Bob(b) => {
                if pending.is_none() && prev.is_some() {
                    flag("two consecutive bob moves".into());
                }
                if m.round != expected_round {
                    flag(format!("round index {} out of sequence, expected {}", m.round, expected_round));
                }
                match (prev, pending) {
                    (Some(p), Some(a)) => {
                        if let Err(reason) = check_bob_move(params, p, a, b) {
                            flag(reason);
                        }
                    }
                    _ => {
                        if b.dim() != params.dimension {
                            flag(format!("dimension {} but game has {}", b.dim(), params.dimension));
                        }
                    }
                }
                prev = Some(b);
                pending = None;
            }
            Entry::Alice(a) => {
                match prev {
                    None => flag("alice moved before bob's opening ball".into()),
                    Some(p) => {
                        if pending.is_some() {
                            flag("two consecutive alice moves".into());
                        }
                        if m.round != expected_round {
                            flag(format!("round index {} out of sequence, expected {}", m.round, expected_round));
                        }
                        if let Err(reason) = check_alice_move(params, p, a) {
                            flag(reason);
                        }
                    }
                }
                pending = Some(a);
                expected_round += 1;
            }
        }
    }
    if expected_round > params.max_rounds {
        out.push(Violation {
            round: expected_round,
            mover: None,
            reason: format!("{} rounds played, max_rounds is {}", expected_round, params.max_rounds),
        });
    }
    if t.final_ball.as_ref() != prev {
        out.push(Violation { round: expected_round, mover: None, reason: "final ball differs from bob's last ball".into() });
    }
    out
}
