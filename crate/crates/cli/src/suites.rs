//! Verification suites. Each suite generates its instances from a seeded RNG,
//! evaluates them concurrently and reports one line per checked property.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use hawkit::diophantine::{
    class_window_contains, delta_contains, delta_meets_ball, meeting_box, minkowski_witness, select_witness,
    separation_bound_check, target_oracle, v_class, v_family, DeltaMeet, IntVec, MeetConfig, Mode,
    SeparationOutcome, StageParams, Witness,
};
use hawkit::dynamics::{
    badness_constant, dani_check, flow_apply, geometric_sigma_grid, sup_norm, systole, unipotent, unipotent_inverse,
    FlowTime, LatticeBasis,
};
use hawkit::games::{play, verify_transcript, Alice, Bob, CenterBob, GameParams, GameTranscript, GreedyBob, RandomBob, Verdict};
use hawkit::geometry::{point_in_slab, Ball, Point, Slab};
use hawkit::numerics::{
    ceil, cmp_pow, cmp_power_sums, floor, format_rational, int, pow_i, rat, PowerProduct, Rational, Weights,
};
use hawkit::strategy::{budget_chain, StrategyOptions, StrategyState};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::RunConfig;

pub const SUITES: &[&str] =
    &["lemma-q", "bpv", "part", "inequ", "main1", "main2", "budget", "slice", "dani", "systole", "e2e"];

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}; known suites: {list}", list = SUITES.join(", "))]
    Unknown(String),
    #[error("{0}")]
    Engine(String),
}

fn engine<E: fmt::Display>(e: E) -> SuiteError {
    SuiteError::Engine(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Outside what the configured constants guarantee; reported, not failed.
    Finding,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Finding => "finding",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckLine {
    pub suite: String,
    pub check: String,
    pub instances: usize,
    pub failures: usize,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "suite={} check={} instances={} failures={} status={}",
            self.suite, self.check, self.instances, self.failures, self.status
        )?;
        if !self.detail.is_empty() {
            write!(f, " detail=\"{}\"", self.detail.replace('"', "'"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: String,
    pub lines: Vec<CheckLine>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self { suite: suite.into(), lines: Vec::new() }
    }

    fn line(&mut self, check: &str, instances: usize, failures: usize, status: Status, detail: impl Into<String>) {
        self.lines.push(CheckLine {
            suite: self.suite.clone(),
            check: check.into(),
            instances,
            failures,
            status,
            detail: detail.into(),
        });
    }

    /// Zero failures required, and at least `min` instances.
    fn strict(&mut self, check: &str, instances: usize, failures: usize, min: usize, detail: impl Into<String>) {
        let mut detail = detail.into();
        let status = if failures == 0 && instances >= min { Status::Pass } else { Status::Fail };
        if instances < min {
            detail = format!("{detail} only {instances} instances, need {min}").trim().to_string();
        }
        self.line(check, instances, failures, status, detail);
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.status != Status::Fail)
    }

    pub fn find(&self, check: &str) -> Option<&CheckLine> {
        self.lines.iter().find(|l| l.check == check)
    }

    pub fn to_text(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

/// Instance counts. `full` meets the documented targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub lemma_q: usize,
    pub bpv_per_z: usize,
    pub part: usize,
    pub inequ: usize,
    pub main_games: usize,
    pub budget_games: usize,
    pub slice_points: usize,
    pub slice_q: u64,
    pub dani_random: usize,
    pub systole_bases: usize,
    pub e2e_games: usize,
}

impl Scale {
    pub fn full() -> Self {
        Self {
            lemma_q: 10_000,
            bpv_per_z: 250,
            part: 120,
            inequ: 16,
            main_games: 16,
            budget_games: 210,
            slice_points: 50,
            slice_q: 500,
            dani_random: 30,
            systole_bases: 1000,
            e2e_games: 20,
        }
    }

    pub fn quick() -> Self {
        Self {
            lemma_q: 300,
            bpv_per_z: 8,
            part: 12,
            inequ: 6,
            main_games: 2,
            budget_games: 12,
            slice_points: 4,
            slice_q: 80,
            dani_random: 4,
            systole_bases: 60,
            e2e_games: 2,
        }
    }
}

pub fn run_suite(name: &str, cfg: &RunConfig, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let seed = cfg.verify.seed;
    match name {
        "lemma-q" => lemma_q(seed, scale),
        "bpv" => bpv(seed, scale),
        "part" => part(seed, scale),
        "inequ" => inequ(seed, scale),
        "main1" => main1(cfg, seed, scale),
        "main2" => main2(cfg, seed, scale),
        "budget" => budget(cfg, seed, scale),
        "slice" => slice(cfg, seed, scale),
        "dani" => dani(cfg, &cfg.weights, seed, scale),
        "systole" => systole_suite(seed, scale),
        "e2e" => e2e(cfg, scale),
        other => Err(SuiteError::Unknown(other.into())),
    }
}

fn rng_for(seed: u64, suite: &str) -> ChaCha8Rng {
    let salt = suite.bytes().fold(0u64, |h, b| h.wrapping_mul(131).wrapping_add(b as u64));
    ChaCha8Rng::seed_from_u64(seed ^ salt)
}

fn rand_rat(rng: &mut ChaCha8Rng, bound: i64, den: i64) -> Rational {
    rat(rng.gen_range(-bound * den..=bound * den), den)
}

fn weights(l: i64, m: i64) -> Weights {
    Weights::from_lambda(rat(l, m)).expect("valid weights")
}

fn ball(c: [Rational; 3], r: Rational) -> Ball {
    Ball::new(Point(c.to_vec()), r).expect("positive radius")
}

/// Ball of radius `rho` whose centre lies within `(ρ(outer) − rho)/2` of the
/// outer centre in each coordinate, so it sits inside `outer`.
fn ball_inside(rng: &mut ChaCha8Rng, outer: &Ball, rho: Rational) -> Ball {
    let slack = (outer.radius() - &rho) / int(2);
    let c = outer.center().coords();
    let mut off = || &slack * rat(rng.gen_range(-64..=64), 64);
    ball([&c[0] + off(), &c[1] + off(), &c[2] + off()], rho)
}

fn random_intvec(rng: &mut ChaCha8Rng, q_max: i64) -> IntVec {
    let q = rng.gen_range(1..=q_max);
    IntVec::new(rng.gen_range(-2 * q..=2 * q), rng.gen_range(-2 * q..=2 * q), q).expect("q ≥ 1")
}

fn desk_params(b0: Ball, epsilon: Rational, r: i64, w: Weights, q_max: u64) -> StageParams {
    StageParams {
        b0,
        kappa: int(2),
        r: int(r),
        epsilon,
        beta: rat(1, 2),
        gamma: int(1),
        weights: w,
        mode: Mode::Desk,
        q_max,
        k_max: 3,
    }
}

fn origin(r: Rational) -> Ball {
    ball([int(0), int(0), int(0)], r)
}

// ---------------------------------------------------------------------------

fn lemma_q(seed: u64, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let mut rng = rng_for(seed, "lemma-q");
    let ws = [weights(1, 2), weights(2, 3), weights(3, 4), weights(3, 5)];
    let instances: Vec<_> = (0..scale.lemma_q)
        .map(|i| {
            let c = [rand_rat(&mut rng, 1, 64), rand_rat(&mut rng, 1, 64), rand_rat(&mut rng, 2, 16)];
            let r = Rational::new(BigInt::one(), BigInt::from(rng.gen_range(1..=4096)));
            (ball(c, r), random_intvec(&mut rng, 500), ws[i % ws.len()].clone())
        })
        .collect();
    let failures = instances
        .par_iter()
        .filter(|(b, v, w)| {
            let Ok(s) = select_witness(b, v, w) else { return true };
            let q = v.q_rational();
            // H = q max{|a|, |b + z a|}, recomputed from the witness.
            let spread = Rational::from_integer(s.witness.a.abs())
                .max((Rational::from_integer(s.witness.b.clone()) + b.z() * Rational::from_integer(s.witness.a.clone())).abs());
            let h = &q * spread;
            let upper = cmp_pow(&q, &(w.lambda() + Rational::one()), &h).map(|o| o != Ordering::Less).unwrap_or(false);
            h != s.height || q > h || !upper
        })
        .count();
    let mut rep = SuiteReport::new("lemma-q");
    rep.strict("height_between_q_and_q_pow", instances.len(), failures, 10_000.min(scale.lemma_q), "q <= H_B(v) <= q^(1+lambda), q <= 500, 4 weight vectors");
    Ok(rep)
}

// ---------------------------------------------------------------------------

/// `λ = l/m` as integers.
fn lm(w: &Weights) -> (u32, u32) {
    let l = w.lambda().numer().to_u32().expect("small");
    let m = w.lambda().denom().to_u32().expect("small");
    (l, m)
}

/// Validity by integer arithmetic: `(a, b) ≠ 0`, `ap + br + cq = 0`,
/// `|a|^m ≤ q^l`, `|bt + sa|^m ≤ t^m q^{m−l}` for `z = s/t`.
fn witness_valid(wt: &Witness, v: &IntVec, z: &Rational, w: &Weights) -> bool {
    let (l, m) = lm(w);
    let (s, t) = (z.numer().clone(), z.denom().clone());
    let nonzero = !(wt.a.is_zero() && wt.b.is_zero());
    let dot = &wt.a * &v.p + &wt.b * &v.r + &wt.c * &v.q;
    let a_ok = wt.a.abs().pow(m) <= v.q.pow(l);
    let b_ok = (&wt.b * &t + &s * &wt.a).abs().pow(m) <= t.pow(m) * v.q.pow(m - l);
    nonzero && dot.is_zero() && a_ok && b_ok
}

/// Whether any valid witness exists, by scanning the whole window.
fn witness_exists(v: &IntVec, z: &Rational, w: &Weights) -> bool {
    let (l, m) = lm(w);
    let (s, t) = (z.numer().clone(), z.denom().clone());
    let a_max = v.q.pow(l).nth_root(m);
    let b_span = (t.pow(m) * v.q.pow(m - l)).nth_root(m);
    let mut a = -a_max.clone();
    while a <= a_max {
        // bt + sa ∈ [−b_span, b_span]
        let lo = Rational::new(-&b_span - &s * &a, t.clone());
        let hi = Rational::new(&b_span - &s * &a, t.clone());
        let mut b = ceil(&lo);
        while b <= floor(&hi) {
            let rest = &a * &v.p + &b * &v.r;
            if !(a.is_zero() && b.is_zero()) && (&rest % &v.q).is_zero() {
                return true;
            }
            b += 1;
        }
        a += 1;
    }
    false
}

fn bpv(seed: u64, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let mut rng = rng_for(seed, "bpv");
    let ws = [weights(1, 2), weights(2, 3), weights(3, 4)];
    let mut instances = Vec::new();
    for j in 0..=40 {
        let z = rat(-20 + j, 10);
        for i in 0..scale.bpv_per_z {
            instances.push((z.clone(), random_intvec(&mut rng, 200), ws[i % ws.len()].clone(), i % 10 == 0));
        }
    }
    let results: Vec<(bool, Option<bool>)> = instances
        .par_iter()
        .map(|(z, v, w, brute)| {
            let got = minkowski_witness(z, v, w);
            let valid = got.as_ref().is_ok_and(|wt| witness_valid(wt, v, z, w));
            let agree = brute.then(|| witness_exists(v, z, w) == got.is_ok());
            (valid, agree)
        })
        .collect();
    let failures = results.iter().filter(|r| !r.0).count();
    let brute: Vec<_> = results.iter().filter_map(|r| r.1).collect();
    let mut rep = SuiteReport::new("bpv");
    rep.strict("witness_found_and_valid", results.len(), failures, 10_000.min(41 * scale.bpv_per_z), "z in -2..2 step 1/10, q <= 200");
    rep.strict("agrees_with_window_scan", brute.len(), brute.iter().filter(|a| !**a).count(), 1, "");
    Ok(rep)
}

// ---------------------------------------------------------------------------

pub fn part_variants() -> Vec<StageParams> {
    [
        (rat(1, 2), rat(1, 1024), 8, weights(1, 2), 24),
        (rat(1, 2), rat(1, 1024), 8, weights(2, 3), 24),
        (int(1), rat(1, 48), 8, weights(1, 2), 8),
        (int(1), rat(1, 48), 8, weights(3, 4), 8),
        (rat(1, 2), rat(1, 256), 4, weights(3, 4), 24),
        (rat(1, 2), rat(1, 128), 4, weights(2, 3), 24),
    ]
    .into_iter()
    .map(|(rho0, eps, r, w, q_max)| desk_params(origin(rho0), eps, r, w, q_max))
    .collect()
}

/// `V_B` from its definition over the κ-box, with `q` limited only by
/// `q ≤ H_B(v) ≤ 2H_{n+1}` and `H_n ≤ H_B(v) ≤ q^{1+λ}`.
pub fn direct_family(b: &Ball, n: u32, sp: &StageParams) -> Result<BTreeSet<(BigInt, BigInt, BigInt)>, SuiteError> {
    let one = Rational::one();
    let e = sp.weights.lambda() + &one;
    let top = floor(&(int(2) * sp.h(n + 1))).to_u64().unwrap_or(0).min(sp.q_max);
    let mut out = BTreeSet::new();
    for q in 1..=top {
        if cmp_pow(&int(q), &e, &sp.h(n)).map_err(engine)? == Ordering::Less {
            continue;
        }
        let qr = int(q);
        let r_max = floor(&(&qr * (&sp.kappa - &one + &sp.epsilon)));
        let p_max = floor(&(&qr * (&sp.kappa - &one + &sp.kappa * &sp.epsilon + &sp.epsilon)));
        let mut r = -r_max.clone();
        while r <= r_max {
            let mut p = -p_max.clone();
            while p <= p_max {
                let v = IntVec { p: p.clone(), r: r.clone(), q: BigInt::from(q) };
                let s = select_witness(b, &v, &sp.weights).map_err(engine)?;
                if sp.h(n) <= s.height && s.height <= int(2) * sp.h(n + 1) {
                    out.insert((v.p, v.r, v.q));
                }
                p += 1;
            }
            r += 1;
        }
    }
    Ok(out)
}

fn part(seed: u64, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let mut rng = rng_for(seed, "part");
    let variants = part_variants();
    let instances: Vec<_> = (0..scale.part)
        .map(|i| {
            let sp = variants[i % variants.len()].clone();
            let n = 1 + (i / variants.len()) as u32 % 2;
            let b = ball_inside(&mut rng, &sp.b0, sp.stage_radius(n));
            (sp, n, b)
        })
        .collect();
    let results: Vec<Result<(bool, bool, bool), SuiteError>> = instances
        .par_iter()
        .map(|(sp, n, b)| {
            let direct = direct_family(b, *n, sp)?;
            let mut union = BTreeSet::new();
            for (p, r, q) in &direct {
                let v = IntVec { p: p.clone(), r: r.clone(), q: q.clone() };
                for k in 1..=*n {
                    if v_class(b, *n, k, sp, &v).map_err(engine)? {
                        union.insert((p.clone(), r.clone(), q.clone()));
                    }
                }
            }
            let listed: BTreeSet<_> =
                v_family(b, *n, sp).map_err(engine)?.entries.into_iter().map(|e| (e.v.p, e.v.r, e.v.q)).collect();
            Ok((!direct.is_empty(), direct == union, direct == listed))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let nonempty: Vec<_> = results.iter().filter(|r| r.0).collect();
    let mut rep = SuiteReport::new("part");
    let target = 100.min(scale.part * 3 / 4);
    rep.strict("family_is_union_of_classes", nonempty.len(), nonempty.iter().filter(|r| !r.1).count(), target, format!("{} instances generated", results.len()));
    rep.strict("enumeration_matches_definition", results.len(), results.iter().filter(|r| !r.2).count(), 1, "");
    Ok(rep)
}

// ---------------------------------------------------------------------------

fn class_members(b: &Ball, n: u32, k: u32, sp: &StageParams, outer: &Ball) -> Result<Vec<IntVec>, SuiteError> {
    let cfg = MeetConfig::default();
    let mut out = Vec::new();
    for e in v_family(b, n, sp).map_err(engine)?.entries {
        if v_class(b, n, k, sp, &e.v).map_err(engine)?
            && matches!(delta_meets_ball(&e.v, &sp.epsilon, &sp.weights, outer, &cfg).map_err(engine)?, DeltaMeet::Meets(_))
        {
            out.push(e.v);
        }
    }
    Ok(out)
}

fn inequ(seed: u64, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let mut rng = rng_for(seed, "inequ");
    let variants = [weights(2, 3), weights(3, 4), weights(1, 2)];
    let instances: Vec<_> = (0..scale.inequ)
        .map(|i| {
            let sp = desk_params(origin(int(1)), rat(1, 48), 8, variants[i % variants.len()].clone(), 10);
            let b1 = ball_inside(&mut rng, &sp.b0, sp.stage_radius(1));
            let b2 = ball_inside(&mut rng, &sp.b0, sp.stage_radius(1));
            (sp, b1, b2, rng.gen::<u64>())
        })
        .collect();
    let results: Vec<Result<Vec<SeparationOutcome>, SuiteError>> = instances
        .par_iter()
        .map(|(sp, b1, b2, pick)| {
            let big = sp.b0.clone();
            let v1s = class_members(b1, 1, 1, sp, &big)?;
            let v2s = class_members(b2, 1, 1, sp, &big)?;
            let mut out = Vec::new();
            if v1s.is_empty() || v2s.is_empty() {
                return Ok(out);
            }
            let mut r = ChaCha8Rng::seed_from_u64(*pick);
            for _ in 0..4 {
                let v1 = &v1s[r.gen_range(0..v1s.len())];
                let v2 = &v2s[r.gen_range(0..v2s.len())];
                out.push(separation_bound_check(&big, b1, v1, b2, v2, sp, 1).map_err(engine)?);
            }
            Ok(out)
        })
        .collect();
    let outcomes: Vec<_> = results.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().flatten().collect();
    let met: Vec<_> = outcomes.iter().filter(|o| !matches!(o, SeparationOutcome::HypothesesUnmet { .. })).collect();
    let violated = met.iter().filter(|o| matches!(o, SeparationOutcome::Violated(_))).count();
    let mut rep = SuiteReport::new("inequ");
    rep.strict("inner_product_bounds", met.len(), violated, 50.min(scale.inequ), format!("{} pairs tried", outcomes.len()));
    Ok(rep)
}

// ---------------------------------------------------------------------------

/// Plays games against alternating random and greedy Bobs, keeping Alice's state.
fn strategy_games(cfg: &RunConfig, count: usize, seed: u64) -> Result<Vec<(StrategyState, GameTranscript)>, SuiteError> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut alice = StrategyState::new(cfg.stage.clone(), StrategyOptions::default()).map_err(engine)?;
            let b0 = cfg.stage.b0.clone();
            // Greedy Bobs steer toward rational points, so zones come close.
            let mut bob: Box<dyn Bob> = if i % 2 == 0 {
                Box::new(RandomBob::new(b0, seed.wrapping_add(i as u64)))
            } else {
                Box::new(GreedyBob::new(b0, 4 + i as u64))
            };
            let t = play(&mut alice, bob.as_mut(), &cfg.game, None).map_err(engine)?;
            Ok((alice, t))
        })
        .collect()
}

fn accepted(alice: &StrategyState) -> Vec<(u32, Ball)> {
    alice.accepted_rounds().keys().filter_map(|&n| alice.accepted_ball(n).map(|b| (n, b.clone()))).collect()
}

fn grid_points(b: &Ball, steps: i64) -> Vec<Point> {
    let c = b.center().coords();
    let mut out = Vec::new();
    for i in -steps..=steps {
        for j in -steps..=steps {
            for k in -steps..=steps {
                let s = |t: i64| b.radius() * rat(t, steps);
                let p = Point(vec![&c[0] + s(i), &c[1] + s(j), &c[2] + s(k)]);
                if b.contains_point(&p).unwrap_or(false) {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn desk_status(sp: &StageParams, failures: usize) -> Status {
    match (failures, sp.mode) {
        (0, _) => Status::Pass,
        (_, Mode::Desk) => Status::Finding,
        (_, Mode::Paper) => Status::Fail,
    }
}

fn main1(cfg: &RunConfig, seed: u64, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let sp = &cfg.stage;
    let games = strategy_games(cfg, scale.main_games, seed)?;
    let balls: Vec<(u32, Ball)> = games.iter().flat_map(|(a, _)| accepted(a)).collect();
    let e = sp.weights.lambda() + Rational::one();
    let meet = MeetConfig::default();
    let results: Vec<Result<[usize; 5], SuiteError>> = balls
        .par_iter()
        .map(|(n, b)| {
            let top = int(2) * sp.h(n + 1);
            let samples = grid_points(b, 4);
            // [q values, vectors in a meeting box, exact meets, undecided, sample hits]
            let mut c = [0usize; 5];
            for q in 1..=sp.q_max {
                if cmp_pow(&int(q), &e, &top).map_err(engine)? == Ordering::Greater {
                    break;
                }
                c[0] += 1;
                let (r_lo, r_hi, p_lo, p_hi) = meeting_box(q, &sp.epsilon, b).map_err(engine)?;
                let mut r = r_lo;
                while r <= r_hi {
                    let mut p = p_lo.clone();
                    while p <= p_hi {
                        let v = IntVec { p: p.clone(), r: r.clone(), q: BigInt::from(q) };
                        c[1] += 1;
                        match delta_meets_ball(&v, &sp.epsilon, &sp.weights, b, &meet).map_err(engine)? {
                            DeltaMeet::Empty => {}
                            DeltaMeet::Meets(_) => c[2] += 1,
                            DeltaMeet::Undecided => c[3] += 1,
                        }
                        for x in &samples {
                            if delta_contains(&v, &sp.epsilon, &sp.weights, x).map_err(engine)? {
                                c[4] += 1;
                                break;
                            }
                        }
                        p += 1;
                    }
                    r += 1;
                }
            }
            Ok(c)
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let total = |i: usize| results.iter().map(|c| c[i]).sum::<usize>();
    let (pairs, boxed, hits, undecided, samples) = (total(0), total(1), total(2), total(3), total(4));
    let mut rep = SuiteReport::new("main1");
    // Instances are (ball, q) pairs; the meeting box already excludes most p, r.
    rep.line(
        "zones_miss_filtered_balls",
        pairs,
        hits + undecided,
        desk_status(sp, hits + undecided),
        format!("{} filtered balls from {} games, {boxed} vectors in meeting boxes, {undecided} undecided", balls.len(), games.len()),
    );
    rep.line("grid_samples_avoid_zones", pairs, samples, desk_status(sp, samples), "81-point grid per ball");
    Ok(rep)
}

/// `x` pulled toward the centre of `outer` so the ball of radius `r` about
/// the result lies in `outer` and still contains `x`.
fn pull_inside(outer: &Ball, x: &Point, r: &Rational) -> Ball {
    let s = (outer.radius() - r) / outer.radius();
    let c = outer.center().coords();
    let centre: Vec<Rational> = c.iter().zip(x.coords()).map(|(ci, xi)| ci + (xi - ci) * &s).collect();
    Ball::new(Point(centre), r.clone()).expect("positive radius")
}

fn main2(cfg: &RunConfig, seed: u64, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let sp = &cfg.stage;
    let games = strategy_games(cfg, scale.main_games, seed)?;
    let mut jobs = Vec::new();
    for (alice, _) in &games {
        for (n, b) in accepted(alice) {
            for k in 1..=sp.k_max {
                if let Some(plane) = alice.planes().get(&(n, k)) {
                    jobs.push((n, k, plane.clone(), b.clone()));
                }
            }
        }
    }
    let meet = MeetConfig::default();
    // Each zone meeting B gives an inner ball B' of stage n + k through the
    // meeting point; the check applies when v is in class k of B'.
    let results: Vec<Result<[usize; 3], SuiteError>> = jobs
        .par_iter()
        .map(|(n, k, plane, b)| {
            let stage = n + k;
            let width = sp.stage_radius(stage);
            let slab = Slab::new(plane.clone(), width.clone()).map_err(engine)?;
            // [inner balls, zone points checked, points outside the slab]
            let mut c = [0usize; 3];
            let window = hawkit::diophantine::q_window(stage, sp).map_err(engine)?;
            for q in window.iter() {
                if !class_window_contains(q, stage, *k, sp).map_err(engine)? {
                    continue;
                }
                let (r_lo, r_hi, p_lo, p_hi) = meeting_box(q, &sp.epsilon, b).map_err(engine)?;
                let mut r = r_lo;
                while r <= r_hi {
                    let mut p = p_lo.clone();
                    while p <= p_hi {
                        let v = IntVec { p: p.clone(), r: r.clone(), q: BigInt::from(q) };
                        p += 1;
                        let DeltaMeet::Meets(x) = delta_meets_ball(&v, &sp.epsilon, &sp.weights, b, &meet).map_err(engine)? else {
                            continue;
                        };
                        let inner = pull_inside(b, &x, &width);
                        if !v_class(&inner, stage, *k, sp, &v).map_err(engine)? {
                            continue;
                        }
                        c[0] += 1;
                        let mut pts = vec![x];
                        for y in grid_points(&inner, 3) {
                            if delta_contains(&v, &sp.epsilon, &sp.weights, &y).map_err(engine)? {
                                pts.push(y);
                            }
                        }
                        for y in pts {
                            c[1] += 1;
                            if !point_in_slab(&y, &slab).map_err(engine)? {
                                c[2] += 1;
                            }
                        }
                    }
                    r += 1;
                }
            }
            Ok(c)
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let total = |i: usize| results.iter().map(|c| c[i]).sum::<usize>();
    let (inner, points, outside) = (total(0), total(1), total(2));
    let mut rep = SuiteReport::new("main2");
    rep.line(
        "zone_points_inside_plane_neighbourhood",
        points,
        outside,
        desk_status(sp, outside),
        format!("{inner} inner balls under {} (ball, k) pairs", jobs.len()),
    );
    Ok(rep)
}

// ---------------------------------------------------------------------------

/// `Σ w^γ ≤ (βρ)^γ`, decided with power sums independently of the referee.
fn budget_ok(params: &GameParams, rho: &Rational, widths: &[Rational]) -> bool {
    let g = params.gamma.clone().expect("potential game");
    let lhs: Vec<_> = widths.iter().map(|w| PowerProduct::power(w.clone(), g.clone()).expect("positive")).collect();
    let rhs = PowerProduct::power(&params.beta * rho, g).expect("positive");
    let d = cmp_power_sums(&lhs, &[rhs], 4096);
    d.exact && d.ordering != Ordering::Greater
}

/// Paper constants for `β = 1/2, γ = 1, κ = 2, ρ₀ = 1/2`: `R = 2^28`,
/// `ε = ρ₀/(100κ²R^{10})`.
pub fn paper_reference_params(w: Weights) -> StageParams {
    let r = pow_i(&int(2), 28);
    let rho0 = rat(1, 2);
    let kappa = int(2);
    let epsilon = &rho0 / (int(100) * &kappa * &kappa * pow_i(&r, 10));
    StageParams {
        b0: ball([rat(1, 3), rat(1, 5), rat(1, 7)], rho0),
        kappa,
        r,
        epsilon,
        beta: rat(1, 2),
        gamma: int(1),
        weights: w,
        mode: Mode::Paper,
        q_max: 1000,
        k_max: 3,
    }
}

fn budget(cfg: &RunConfig, seed: u64, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let gammas = [int(1), rat(1, 2), int(2)];
    let ws = [weights(2, 3), weights(3, 4), weights(3, 5)];
    let mut rng = rng_for(seed, "budget");
    let jobs: Vec<_> = (0..scale.budget_games)
        .map(|i| {
            let g = gammas[i % 3].clone();
            let c = [rand_rat(&mut rng, 1, 8) / int(2), rand_rat(&mut rng, 1, 8) / int(2), rand_rat(&mut rng, 1, 8) / int(2)];
            let mut sp = desk_params(ball(c, rat(1, 2)), rat(1, 1024), 8, ws[(i / 3) % 3].clone(), 64);
            sp.gamma = g.clone();
            let params = GameParams::potential(rat(1, 2), g, 3, 10, 3);
            (sp, params, i % 3, rng.gen::<u64>())
        })
        .collect();
    let results: Vec<Result<(usize, usize, usize), SuiteError>> = jobs
        .par_iter()
        .map(|(sp, params, kind, s)| {
            let mut alice = StrategyState::new(sp.clone(), StrategyOptions::default()).map_err(engine)?;
            let mut bob: Box<dyn Bob> = match kind {
                0 => Box::new(RandomBob::new(sp.b0.clone(), *s)),
                1 => Box::new(GreedyBob::new(sp.b0.clone(), 4 + s % 12)),
                _ => Box::new(CenterBob::new(sp.b0.clone())),
            };
            let t = play(&mut alice, bob.as_mut(), params, None).map_err(engine)?;
            let (mut rounds, mut bad) = (0, 0);
            let balls: Vec<_> = t.bob_balls().cloned().collect();
            for (round, mv) in t.alice_moves() {
                rounds += 1;
                let widths: Vec<_> = mv.slabs().iter().map(|s| s.width().clone()).collect();
                if !budget_ok(params, balls[round].radius(), &widths) {
                    bad += 1;
                }
            }
            Ok((rounds, bad, verify_transcript(&t).len()))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let rounds: usize = results.iter().map(|r| r.0).sum();
    let bad: usize = results.iter().map(|r| r.1).sum();
    let violations: usize = results.iter().map(|r| r.2).sum();
    let mut rep = SuiteReport::new("budget");
    rep.strict("round_budget", rounds, bad, 1, format!("{} games, gamma in {{1, 1/2, 2}}", results.len()));
    rep.strict("referee_replay", results.len(), violations, 200.min(scale.budget_games), "");
    let paper = if cfg.stage.mode == Mode::Paper { cfg.stage.clone() } else { paper_reference_params(cfg.weights.clone()) };
    paper.validate().map_err(engine)?;
    let chain = budget_chain(&paper, 64).map_err(engine)?;
    let broken = chain.iter().filter(|s| !(s.holds && s.exact)).count();
    rep.strict(
        "paper_series_bound",
        chain.len(),
        broken,
        1,
        format!("R = {}, beta = {}, gamma = {}, stages 0..64", format_rational(&paper.r), format_rational(&paper.beta), format_rational(&paper.gamma)),
    );
    Ok(rep)
}

// ---------------------------------------------------------------------------

fn slice(cfg: &RunConfig, seed: u64, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let mut rng = rng_for(seed, "slice");
    let points: Vec<_> = (0..scale.slice_points)
        .map(|_| {
            let dx = rng.gen_range(501..3000);
            let dy = rng.gen_range(501..3000);
            (rat(rng.gen_range(-dx..=dx), dx), rat(rng.gen_range(-dy..=dy), dy))
        })
        .collect();
    let w = &cfg.weights;
    let q = scale.slice_q;
    let results: Vec<Result<usize, SuiteError>> = points
        .par_iter()
        .map(|(x, y)| {
            let mut bad = 0;
            for z in -2..=2 {
                let z = int(z);
                let a = badness_constant(x, y, &z, w, q).map_err(engine)?;
                let b = badness_constant(&(x - &z * y), y, &int(0), w, q).map_err(engine)?;
                if a.value != b.value {
                    bad += 1;
                }
            }
            Ok(bad)
        })
        .collect();
    let bad: usize = results.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().sum();
    let mut rep = SuiteReport::new("slice");
    rep.strict("integer_shear_equality", 5 * points.len(), bad, 5 * 50.min(scale.slice_points), format!("Q = {q}, z in -2..2"));
    Ok(rep)
}

// ---------------------------------------------------------------------------

/// `⌊φ·2^k⌋/2^k` for `φ = (√5 − 1)/2`.
pub fn golden_truncation(k: u32) -> Rational {
    let half = BigInt::one() << (k - 1);
    let root = (BigInt::from(5) * &half * &half).sqrt();
    Rational::new(root - &half, BigInt::one() << k)
}

pub fn dani_points(seed: u64, random: usize) -> Vec<[Rational; 3]> {
    let mut pts = vec![
        [rat(1, 3), rat(1, 2), int(0)],
        [int(0), int(0), int(0)],
        [rat(2, 5), rat(3, 7), int(1)],
        [rat(1, 7), rat(5, 6), int(-1)],
        [rat(3, 8), rat(1, 8), rat(1, 2)],
        [rat(5, 11), rat(2, 11), int(0)],
        [rat(1, 2), rat(1, 2), int(-2)],
        [rat(7, 9), rat(4, 9), rat(1, 3)],
        [rat(1, 6), rat(5, 12), rat(-3, 2)],
        [rat(11, 13), rat(3, 13), int(2)],
    ];
    for k in (8..=32).step_by(2) {
        let g = golden_truncation(k);
        let g2 = golden_truncation(k + 3);
        pts.push([g.clone(), &g2 * &g2, int(0)]);
        pts.push([g, g2, rat(k as i64 % 5 - 2, 3)]);
    }
    let mut rng = rng_for(seed, "dani");
    for _ in 0..random {
        let d = rng.gen_range(200..2000);
        let e = rng.gen_range(200..2000);
        pts.push([rat(rng.gen_range(0..d), d), rat(rng.gen_range(0..e), e), rand_rat(&mut rng, 2, 7)]);
    }
    pts
}

/// Runs the systole–badness correspondence on the standard point set.
pub fn dani(cfg: &RunConfig, w: &Weights, seed: u64, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let grid = geometric_sigma_grid(&cfg.sigma_ratio, w.denominator(), &cfg.decay_floor).map_err(engine)?;
    let points = dani_points(seed, scale.dani_random);
    let q = cfg.dani_q_max;
    let reports: Vec<Result<_, SuiteError>> = points
        .par_iter()
        .map(|[x, y, z]| dani_check(x, y, z, w, q, &grid).map_err(engine))
        .collect();
    let reports = reports.into_iter().collect::<Result<Vec<_>, _>>()?;
    let n = reports.len();
    let count = |f: &dyn Fn(&hawkit::dynamics::DaniReport) -> bool| reports.iter().filter(|r| !f(r)).count();
    let need = 50.min(36 + scale.dani_random);
    let mut rep = SuiteReport::new("dani");
    let floor_txt = format!("Q = {q}, weights {w}, {} grid times down to decay {}", grid.len(), format_rational(&cfg.decay_floor));
    rep.strict("forward_per_denominator", n, count(&|r| r.forward_violations.is_empty()), need, floor_txt);
    rep.strict("forward_conversion_constant", n, count(&|r| r.forward_constant_holds != Some(false)), need, "eps >= 2^(-lambda) delta^(1+lambda) over covered q");
    rep.strict("backward_conversion_mu", n, count(&|r| r.backward_mu_holds), need, "delta = min(eps^(1/(1+mu)), 1)");
    let stated = count(&|r| r.backward_lambda_holds);
    let status = match (stated, w.is_degenerate()) {
        (0, _) => Status::Pass,
        (_, true) => Status::Fail,
        (_, false) => Status::Finding,
    };
    rep.line(
        "backward_conversion_lambda",
        n,
        stated,
        status,
        if stated > 0 && !w.is_degenerate() {
            "delta = min(eps^(1/(1+lambda)), 1) is too large when lambda > mu: the second coordinate needs delta^(1+mu) <= eps"
        } else {
            "delta = min(eps^(1/(1+lambda)), 1)"
        },
    );
    Ok(rep)
}

// ---------------------------------------------------------------------------

/// Minimum sup norm for an upper-triangular basis by back substitution,
/// starting from the bound 1 that any unimodular lattice meets.
pub fn triangular_systole_oracle(b: &LatticeBasis) -> Rational {
    let m = b.rows();
    assert!(m[1][0].is_zero() && m[2][0].is_zero() && m[2][1].is_zero(), "upper triangular input");
    let u = (0..3).map(|j| sup_norm(&b.column(j))).min().expect("three columns").min(int(1));
    let range = |shift: &Rational, diag: &Rational| {
        let c = -shift / diag;
        let d = &u / diag.abs();
        (ceil(&(&c - &d)), floor(&(&c + &d)))
    };
    let mut best = u.clone();
    let (lo3, hi3) = range(&Rational::zero(), &m[2][2]);
    let mut n3 = lo3;
    while n3 <= hi3 {
        let t3 = Rational::from_integer(n3.clone());
        let (lo2, hi2) = range(&(&m[1][2] * &t3), &m[1][1]);
        let mut n2 = lo2;
        while n2 <= hi2 {
            let t2 = Rational::from_integer(n2.clone());
            let (lo1, hi1) = range(&(&m[0][1] * &t2 + &m[0][2] * &t3), &m[0][0]);
            let mut n1 = lo1;
            while n1 <= hi1 {
                if !(n1.is_zero() && n2.is_zero() && n3.is_zero()) {
                    best = best.min(sup_norm(&b.apply(&[n1.clone(), n2.clone(), n3.clone()])));
                }
                n1 += 1;
            }
            n2 += 1;
        }
        n3 += 1;
    }
    best
}

fn elementary_product(rng: &mut ChaCha8Rng) -> LatticeBasis {
    let mut t = LatticeBasis::identity();
    for _ in 0..rng.gen_range(0..6) {
        let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
        if i == j {
            continue;
        }
        let mut e = LatticeBasis::identity().rows().clone();
        e[i][j] = int(rng.gen_range(-3..=3));
        t = t.mul(&LatticeBasis::new(e));
    }
    t
}

fn systole_suite(seed: u64, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let mut rng = rng_for(seed, "systole");
    let ws = [weights(1, 2), weights(2, 3), weights(3, 4), weights(3, 5)];
    let sigmas = [int(1), rat(1, 2), rat(2, 3), rat(3, 4), rat(4, 5)];
    let jobs: Vec<_> = (0..scale.systole_bases)
        .map(|_| {
            let w = ws[rng.gen_range(0..ws.len())].clone();
            let s = sigmas[rng.gen_range(0..sigmas.len())].clone();
            let ft = FlowTime::new(s, w.denominator() * rng.gen_range(1..=2)).expect("valid time");
            let (x, y, z) = (rand_rat(&mut rng, 1, 6), rand_rat(&mut rng, 1, 6), rand_rat(&mut rng, 2, 4));
            let tri = flow_apply(&w, &ft, &unipotent_inverse(&x, &y, &z)).expect("shared denominator");
            let tri = unipotent(&rand_rat(&mut rng, 1, 3), &rand_rat(&mut rng, 1, 3), &rand_rat(&mut rng, 1, 3)).mul(&tri);
            (tri, elementary_product(&mut rng))
        })
        .collect();
    let results: Vec<Result<(bool, bool, bool), SuiteError>> = jobs
        .par_iter()
        .map(|(tri, t)| {
            let mixed = tri.mul(t);
            let s = systole(&mixed).map_err(engine)?;
            let oracle = triangular_systole_oracle(tri);
            let attained = sup_norm(&mixed.apply(&s.argmin)) == s.value;
            Ok((mixed.is_unimodular() && s.value == oracle && attained, s.value <= int(1), attained))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut rep = SuiteReport::new("systole");
    rep.strict("matches_enumeration_oracle", results.len(), results.iter().filter(|r| !r.0).count(), 1000.min(scale.systole_bases), "");
    rep.strict("at_most_one", results.len(), results.iter().filter(|r| !r.1).count(), 1, "");
    let z3 = systole(&LatticeBasis::identity()).map_err(engine)?;
    let d = systole(&LatticeBasis::diagonal([int(2), int(2), rat(1, 4)])).map_err(engine)?;
    let e3 = [BigInt::zero(), BigInt::zero(), BigInt::one()];
    let fixed = [z3.value == int(1), d.value == rat(1, 4) && d.argmin == e3];
    rep.strict("fixed_examples", 2, fixed.iter().filter(|x| !**x).count(), 2, "Z^3 -> 1, diag(2,2,1/4) -> 1/4 at e3");
    Ok(rep)
}

// ---------------------------------------------------------------------------

/// One end-to-end game result.
#[derive(Debug, Clone)]
pub struct GameResult {
    pub bob: &'static str,
    pub index: usize,
    pub verdict: Verdict,
    pub basis: String,
    pub rounds: usize,
}

pub fn play_one(cfg: &RunConfig, alice: &mut dyn Alice, bob: &mut dyn Bob) -> Result<GameTranscript, SuiteError> {
    let sp = &cfg.stage;
    let oracle = target_oracle(sp.epsilon.clone(), sp.weights.clone(), sp.q_max);
    play(alice, bob, &cfg.game, Some(&oracle)).map_err(engine)
}

pub fn e2e_games(cfg: &RunConfig, games: usize) -> Result<Vec<GameResult>, SuiteError> {
    let jobs: Vec<(&'static str, usize)> =
        (0..games).map(|i| ("random", i)).chain((0..games).map(|i| ("greedy", i))).collect();
    jobs.par_iter()
        .map(|&(kind, i)| {
            let mut alice = StrategyState::new(cfg.stage.clone(), StrategyOptions::default()).map_err(engine)?;
            let b0 = cfg.stage.b0.clone();
            let mut bob: Box<dyn Bob> = match kind {
                "random" => Box::new(RandomBob::new(b0, cfg.verify.seed.wrapping_add(i as u64))),
                _ => Box::new(GreedyBob::new(b0, 4 + i as u64)),
            };
            let t = play_one(cfg, &mut alice, bob.as_mut())?;
            let basis = t.verdict_evidence["basis"].as_str().unwrap_or("none").to_string();
            Ok(GameResult { bob: kind, index: i, verdict: t.verdict, basis, rounds: t.alice_moves().count() })
        })
        .collect()
}

fn e2e(cfg: &RunConfig, scale: &Scale) -> Result<SuiteReport, SuiteError> {
    let results = e2e_games(cfg, scale.e2e_games)?;
    let mut rep = SuiteReport::new("e2e");
    for kind in ["random", "greedy"] {
        let mine: Vec<_> = results.iter().filter(|r| r.bob == kind).collect();
        let bad = mine
            .iter()
            .filter(|r| !(r.verdict == Verdict::AliceCertified && (r.basis == "slab" || r.basis == "oracle")))
            .count();
        let slab = mine.iter().filter(|r| r.basis == "slab").count();
        rep.strict(
            &format!("final_point_certified_{kind}"),
            mine.len(),
            bad,
            20.min(scale.e2e_games),
            format!("{slab} in a slab, {} by the target oracle, {} rounds", mine.len() - slab - bad, cfg.game.max_rounds),
        );
    }
    Ok(rep)
}
