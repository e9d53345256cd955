//! Alice's slab strategy for the hyperplane potential game with target the
//! weighted badly approximable points.
//!
//! Each ball Bob plays is classified by stage. The first ball of each stage
//! that survives the filter (inside the previous filtered ball, disjoint from
//! every zone `Δ_ε(v)` with `v ∈ V_B`) triggers a move: one slab per class
//! `k = 1..k_max`, around a plane shared by the zones that can still reach it.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::diophantine::{
    class_window_contains, delta_meets_ball, in_family, meeting_box, plane_of, q_window, stage_of_ball, v_class,
    DeltaMeet, DiophantineError, IntVec, MeetConfig, StageParams,
};
use crate::games::{Alice, AliceMove, GameParams};
use crate::geometry::{ball_contains_ball, Ball, Hyperplane, Slab};
use crate::numerics::{int, pow_i, Rational};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("lambda = mu = 1/2 needs allow_equal_weights")]
    EqualWeights,
    #[error(transparent)]
    Params(#[from] DiophantineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StrategyOptions {
    /// Accept `λ = μ`, outside the range the construction is argued for.
    pub allow_equal_weights: bool,
    pub meet: MeetConfig,
}

/// Zones that may meet a ball, collected over a range of denominators.
#[derive(Debug, Clone, Default)]
struct Candidates {
    vectors: Vec<IntVec>,
    truncated: bool,
    undecided: usize,
}

fn zone_candidates(
    b: &Ball,
    stage: u32,
    class: Option<u32>,
    sp: &StageParams,
    cfg: &MeetConfig,
) -> Result<Candidates, DiophantineError> {
    let window = q_window(stage, sp)?;
    let mut out = Candidates { truncated: window.truncated, ..Default::default() };
    for q in window.iter() {
        if let Some(k) = class {
            if !class_window_contains(q, stage, k, sp)? {
                continue;
            }
        }
        let (r_lo, r_hi, p_lo, p_hi) = meeting_box(q, &sp.epsilon, b)?;
        let mut r = r_lo;
        while r <= r_hi {
            let mut p = p_lo.clone();
            while p <= p_hi {
                let v = IntVec { p: p.clone(), r: r.clone(), q: BigInt::from(q) };
                match delta_meets_ball(&v, &sp.epsilon, &sp.weights, b, cfg)? {
                    DeltaMeet::Empty => {}
                    DeltaMeet::Meets(_) => out.vectors.push(v),
                    DeltaMeet::Undecided => {
                        out.undecided += 1;
                        out.vectors.push(v);
                    }
                }
                p += 1;
            }
            r += 1;
        }
    }
    Ok(out)
}

/// Result of the filter test for one ball.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterOutcome {
    pub holds: bool,
    pub contained: bool,
    /// A vector of `V_B` whose zone meets the ball, when one was found.
    pub blocking: Option<IntVec>,
    pub truncated: bool,
    /// Zone meetings left undecided and counted as meeting.
    pub undecided: usize,
}

/// How a plane was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneCase {
    /// No zone of the class reaches the ball.
    Default,
    /// The selected-witness plane of a representative zone.
    Common,
    /// All first-class candidates are multiples of one vector.
    Tilted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaneChoice {
    pub plane: Hyperplane,
    pub case: PlaneCase,
    pub candidates: usize,
    /// Distinct selected-witness planes among the candidates.
    pub distinct_planes: usize,
    pub truncated: bool,
    pub undecided: usize,
}

fn parallel(u: &IntVec, v: &IntVec) -> bool {
    let cross = [&u.r * &v.q - &u.q * &v.r, &u.q * &v.p - &u.p * &v.q, &u.p * &v.r - &u.r * &v.p];
    cross.iter().all(Zero::is_zero)
}

/// The plane `L_k(B)` for a ball `b` accepted at stage `n`.
///
/// Candidates are the vectors with `q` in the `k`-th class window of stage
/// `n + k` whose zones may meet `b` and which belong to `V_{B″,k}` for the
/// concentric ball `B″` of radius `R^{-(n+k)}ρ₀`.
pub fn construct_plane(
    b: &Ball,
    n: u32,
    k: u32,
    sp: &StageParams,
    cfg: &MeetConfig,
) -> Result<PlaneChoice, DiophantineError> {
    let stage = n + k;
    let rep = Ball::new(b.center().clone(), sp.stage_radius(stage)).expect("positive radius");
    let found = zone_candidates(b, stage, Some(k), sp, cfg)?;
    let mut vectors = Vec::new();
    for v in found.vectors {
        if v_class(&rep, stage, k, sp, &v)? {
            vectors.push(v);
        }
    }
    let choice = |plane, case, distinct| PlaneChoice {
        plane,
        case,
        candidates: vectors.len(),
        distinct_planes: distinct,
        truncated: found.truncated,
        undecided: found.undecided,
    };
    if vectors.is_empty() {
        return Ok(choice(Hyperplane::coordinate(3, 0), PlaneCase::Default, 0));
    }
    if k == 1 && vectors.iter().all(|v| parallel(v, &vectors[0])) {
        let v0 = vectors.iter().min_by(|a, b| a.q.cmp(&b.q)).expect("nonempty");
        let (x0, y0) = v0.point();
        let z = b.z();
        let plane = Hyperplane::vertical(Rational::one(), -z.clone(), z * y0 - x0).expect("nonzero normal");
        return Ok(choice(plane, PlaneCase::Tilted, 1));
    }
    let c = b.center().coords();
    let dist = |v: &IntVec| {
        let (x, y) = v.point();
        let (dx, dy) = (x - &c[0], y - &c[1]);
        &dx * &dx + &dy * &dy
    };
    let mut planes = BTreeSet::new();
    let mut best: Option<(Rational, &IntVec)> = None;
    for v in &vectors {
        let plane = plane_of(&rep, v, &sp.weights)?;
        planes.insert(plane.to_string());
        let d = dist(v);
        if best.as_ref().is_none_or(|(bd, _)| &d < bd) {
            best = Some((d, v));
        }
    }
    let (_, v) = best.expect("nonempty");
    Ok(choice(plane_of(&rep, v, &sp.weights)?, PlaneCase::Common, planes.len()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmittedPlane {
    pub k: u32,
    #[serde(flatten)]
    pub choice: PlaneChoice,
    #[serde(with = "crate::numerics::rational_serde")]
    pub width: Rational,
}

/// What the strategy saw and did in one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundLog {
    pub round: usize,
    pub stage: Option<u32>,
    pub first_in_stage: bool,
    pub filter: Option<FilterOutcome>,
    pub condition: bool,
    pub planes: Vec<EmittedPlane>,
    /// Slabs dropped from the end so the move fits the budget.
    pub trimmed: usize,
    pub findings: Vec<String>,
}

/// Per-game strategy state, owned by one game.
#[derive(Debug, Clone)]
pub struct StrategyState {
    sp: StageParams,
    opts: StrategyOptions,
    history: Vec<(usize, Ball, Option<u32>)>,
    bprime_flags: BTreeMap<usize, bool>,
    i_n: BTreeMap<u32, usize>,
    planes: BTreeMap<(u32, u32), Hyperplane>,
    seen: BTreeSet<u32>,
    logs: Vec<RoundLog>,
}

impl StrategyState {
    pub fn new(sp: StageParams, opts: StrategyOptions) -> Result<Self, StrategyError> {
        sp.validate()?;
        if sp.weights.is_degenerate() && !opts.allow_equal_weights {
            return Err(StrategyError::EqualWeights);
        }
        Ok(Self {
            sp,
            opts,
            history: Vec::new(),
            bprime_flags: BTreeMap::new(),
            i_n: BTreeMap::new(),
            planes: BTreeMap::new(),
            seen: BTreeSet::new(),
            logs: Vec::new(),
        })
    }

    pub fn params(&self) -> &StageParams {
        &self.sp
    }

    pub fn history(&self) -> &[(usize, Ball, Option<u32>)] {
        &self.history
    }

    pub fn bprime_flags(&self) -> &BTreeMap<usize, bool> {
        &self.bprime_flags
    }

    /// Stage `n` to the round at which it was accepted.
    pub fn accepted_rounds(&self) -> &BTreeMap<u32, usize> {
        &self.i_n
    }

    pub fn planes(&self) -> &BTreeMap<(u32, u32), Hyperplane> {
        &self.planes
    }

    pub fn logs(&self) -> &[RoundLog] {
        &self.logs
    }

    /// The ball accepted at stage `n`, if any.
    pub fn accepted_ball(&self, n: u32) -> Option<&Ball> {
        let i = self.i_n.get(&n)?;
        self.history.iter().find(|(r, _, _)| r == i).map(|(_, b, _)| b)
    }

    /// Whether `b`, of stage `n ≥ 1`, passes the filter: it lies inside the
    /// ball accepted at stage `n − 1` and no zone of `V_B` meets it.
    pub fn bprime_test(&self, b: &Ball, n: u32) -> Result<FilterOutcome, DiophantineError> {
        let contained = n >= 1 && self.accepted_ball(n - 1).is_some_and(|outer| ball_contains_ball(outer, b).unwrap_or(false));
        let mut out = FilterOutcome { holds: false, contained, blocking: None, truncated: false, undecided: 0 };
        if !contained {
            return Ok(out);
        }
        let found = zone_candidates(b, n, None, &self.sp, &self.opts.meet)?;
        out.truncated = found.truncated;
        out.undecided = found.undecided;
        for v in found.vectors {
            if in_family(b, n, &self.sp, &v)?.is_some() {
                out.blocking = Some(v);
                return Ok(out);
            }
        }
        out.holds = true;
        Ok(out)
    }

    fn slabs_for(&mut self, round: usize, b: &Ball, n: u32, log: &mut RoundLog) -> Result<Vec<Slab>, DiophantineError> {
        let mut slabs = Vec::new();
        for k in 1..=self.sp.k_max {
            let choice = construct_plane(b, n, k, &self.sp, &self.opts.meet)?;
            if choice.distinct_planes > 1 {
                log.findings.push(format!("round {round}: class {k} candidates span {} planes", choice.distinct_planes));
            }
            let width = int(2) * self.sp.stage_radius(n + k);
            self.planes.insert((n, k), choice.plane.clone());
            slabs.push(Slab::new(choice.plane.clone(), width.clone()).expect("positive width"));
            log.planes.push(EmittedPlane { k, choice, width });
        }
        Ok(slabs)
    }

    /// Classifies `b` as Bob's ball of round `round` and returns Alice's slabs.
    pub fn alice_respond(&mut self, round: usize, b: &Ball, params: &GameParams) -> AliceMove {
        let stage = stage_of_ball(b, &self.sp);
        self.history.push((round, b.clone(), stage));
        let mut log = RoundLog {
            round,
            stage,
            first_in_stage: false,
            filter: None,
            condition: false,
            planes: Vec::new(),
            trimmed: 0,
            findings: Vec::new(),
        };
        let mut slabs = Vec::new();
        if let Some(n) = stage {
            if self.seen.insert(n) {
                log.first_in_stage = true;
                if n >= 2 && !self.seen.contains(&(n - 1)) {
                    log.findings.push(format!("stage {} skipped", n - 1));
                }
                let accepted = if n == 0 {
                    Ok(true)
                } else {
                    self.bprime_test(b, n).map(|f| {
                        let holds = f.holds;
                        log.filter = Some(f);
                        holds
                    })
                };
                match accepted {
                    Ok(true) => {
                        self.bprime_flags.insert(round, true);
                        self.i_n.insert(n, round);
                        log.condition = true;
                        match self.slabs_for(round, b, n, &mut log) {
                            Ok(s) => slabs = s,
                            Err(e) => log.findings.push(format!("plane construction failed: {e}")),
                        }
                    }
                    Ok(false) => {
                        self.bprime_flags.insert(round, false);
                    }
                    Err(e) => log.findings.push(format!("filter failed: {e}")),
                }
            }
        } else if round == 0 {
            log.findings.push("opening ball differs from the configured starting ball".into());
        }
        while !slabs.is_empty() && !crate::games::budget_fits(params, b.radius(), &slabs) {
            slabs.pop();
            log.trimmed += 1;
        }
        self.logs.push(log);
        AliceMove::Potential { slabs }
    }
}

impl Alice for StrategyState {
    fn respond(&mut self, round: usize, ball: &Ball, params: &GameParams) -> AliceMove {
        self.alice_respond(round, ball, params)
    }

    fn evidence(&self) -> Value {
        serde_json::to_value(&self.logs).unwrap_or(Value::Null)
    }
}

/// `Σ_k (2R^{-(n+k)}ρ₀)^γ` for `k = 1..k_max`, as exact widths.
pub fn slab_widths(sp: &StageParams, n: u32) -> Vec<Rational> {
    (1..=sp.k_max).map(|k| int(2) * sp.rho0() * pow_i(&sp.r, -((n + k) as i64))).collect()
}

/// One instance of the budget chain at stage `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetChainStep {
    pub n: u32,
    /// `(2R^{-n}ρ₀)^γ(R^γ − 1)^{-1} ≤ (β·βR^{-n}ρ₀)^γ`, decided as
    /// `(2R^{-n}ρ₀)^γ + (β²R^{-n}ρ₀)^γ ≤ (β²R^{-n}ρ₀)^γ R^γ`.
    pub holds: bool,
    pub exact: bool,
}

/// The full geometric series of slab budgets against the smallest radius a
/// stage-`n` ball can have, for `n = 0..=n_max`.
pub fn budget_chain(sp: &StageParams, n_max: u32) -> Result<Vec<BudgetChainStep>, DiophantineError> {
    use crate::numerics::{cmp_power_sums, PowerProduct};
    let g = sp.gamma.clone();
    (0..=n_max)
        .map(|n| {
            let scale = pow_i(&sp.r, -(n as i64)) * sp.rho0();
            let slab = PowerProduct::power(int(2) * &scale, g.clone())?;
            let floor = PowerProduct::power(&sp.beta * &sp.beta * &scale, g.clone())?;
            let rg = PowerProduct::power(sp.r.clone(), g.clone())?;
            let d = cmp_power_sums(&[slab, floor.clone()], &[floor.mul(&rg)], 4096);
            Ok(BudgetChainStep { n, holds: d.ordering != std::cmp::Ordering::Greater, exact: d.exact })
        })
        .collect()
}
