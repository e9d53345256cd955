//! Built-in players for tests and the command line.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::transcript::GameTranscript;
use super::{Alice, AliceMove, Bob, BobAction, GameParams};
use crate::geometry::{ball_avoids_slab, ball_contains_ball, dot, norm_sq, Ball, Hyperplane, Point, Slab};
use crate::numerics::{floor, int, rat, root_interval, Rational};

/// Rational `s` with `lo ≤ s·√n2 ≤ hi`, if the interval is wide enough.
fn scale_for_length(n2: &Rational, lo: &Rational, hi: &Rational) -> Option<Rational> {
    if lo > hi || !n2.is_positive() {
        return None;
    }
    let target = (lo + hi) / int(2);
    let mut bits = 16;
    while bits <= 1024 {
        let (_, sqrt_hi) = root_interval(n2, 1, 2, bits);
        let s = &target / &sqrt_hi;
        let s2n = &s * &s * n2;
        if s2n >= lo * lo && s2n <= hi * hi {
            return Some(s);
        }
        bits *= 2;
    }
    None
}

/// A legal absolute-game reply of radius `βρ` on the far side of `slab`,
/// built exactly; `None` when no such ball exists along the normal.
pub fn absolute_escape(ball: &Ball, slab: &Slab, params: &GameParams) -> Option<Ball> {
    let r = &params.beta * ball.radius();
    let n = slab.plane().normal();
    let side = slab.plane().eval(ball.center()).ok()?;
    let dir: Vec<Rational> = if side.is_negative() { n.iter().map(|c| -c).collect() } else { n.to_vec() };
    let s = scale_for_length(&norm_sq(n), &(&r + slab.width()), &(ball.radius() - &r))?;
    let center = ball.center().offset(&dir, &s).ok()?;
    let out = Ball::new(center, r).ok()?;
    let legal = ball_contains_ball(ball, &out).ok()? && ball_avoids_slab(&out, slab).ok()?;
    legal.then_some(out)
}

/// A uniformly random point of the grid `center + reach·k/g`, `k ∈ ℤ^d`, `‖k‖ ≤ g`.
fn grid_point(rng: &mut ChaCha8Rng, center: &Point, reach: &Rational, g: i64) -> Point {
    loop {
        let k: Vec<i64> = (0..center.dim()).map(|_| rng.gen_range(-g..=g)).collect();
        if k.iter().map(|v| v * v).sum::<i64>() > g * g {
            continue;
        }
        let coords = center.coords().iter().zip(&k).map(|(c, k)| c + reach * rat(*k, g)).collect();
        return Point(coords);
    }
}

/// Radius Bob must (or, in the slab games, may at least) play, and the
/// centre and reach of the region his centre must lie in.
fn bob_region(ball: &Ball, alice: &AliceMove, params: &GameParams) -> (Rational, Point, Rational) {
    match alice {
        AliceMove::Schmidt { ball: a } => {
            let r = &params.beta * a.radius();
            let reach = (Rational::one() - &params.beta) * a.radius();
            (r, a.center().clone(), reach)
        }
        _ => {
            let r = &params.beta * ball.radius();
            let reach = ball.radius() - &r;
            (r, ball.center().clone(), reach)
        }
    }
}

/// Plays concentric balls of the smallest allowed radius.
#[derive(Debug, Clone)]
pub struct CenterBob {
    start: Ball,
}

impl CenterBob {
    pub fn new(start: Ball) -> Self {
        Self { start }
    }
}

impl Bob for CenterBob {
    fn open(&mut self, _: &GameParams) -> BobAction {
        BobAction::Move(self.start.clone())
    }

    fn respond(&mut self, _: usize, ball: &Ball, alice: &AliceMove, params: &GameParams) -> BobAction {
        let (r, c, _) = bob_region(ball, alice, params);
        match Ball::new(c, r) {
            Ok(b) => BobAction::Move(b),
            Err(_) => BobAction::Resign,
        }
    }
}

/// Uniform choice among legal grid-centred balls of radius `βρ`.
#[derive(Debug, Clone)]
pub struct RandomBob {
    start: Ball,
    rng: ChaCha8Rng,
    grid: i64,
    attempts: usize,
}

impl RandomBob {
    pub fn new(start: Ball, seed: u64) -> Self {
        Self { start, rng: ChaCha8Rng::seed_from_u64(seed), grid: 32, attempts: 256 }
    }

    /// Grid resolution: the centre region's radius is split into `grid` steps.
    pub fn with_grid(mut self, grid: i64) -> Self {
        self.grid = grid.max(1);
        self
    }
}

impl Bob for RandomBob {
    fn open(&mut self, _: &GameParams) -> BobAction {
        BobAction::Move(self.start.clone())
    }

    fn respond(&mut self, _: usize, ball: &Ball, alice: &AliceMove, params: &GameParams) -> BobAction {
        let (r, c, reach) = bob_region(ball, alice, params);
        for _ in 0..self.attempts {
            let x = grid_point(&mut self.rng, &c, &reach, self.grid);
            let Ok(candidate) = Ball::new(x, r.clone()) else {
                return BobAction::Resign;
            };
            let ok = match alice {
                AliceMove::Absolute { slab } => ball_avoids_slab(&candidate, slab).unwrap_or(false),
                _ => true,
            };
            if ok {
                return BobAction::Move(candidate);
            }
        }
        match alice {
            AliceMove::Absolute { slab } => match absolute_escape(ball, slab, params) {
                Some(b) => BobAction::Move(b),
                None => BobAction::Resign,
            },
            _ => Ball::new(c, r).map(BobAction::Move).unwrap_or(BobAction::Resign),
        }
    }
}

/// Steers towards the nearest rational point `(p/q, r/q, z)` with `q ≤ q_bound`,
/// the centre of a danger zone `Δ_ε(p, r, q)`. Ignores Alice's slabs.
#[derive(Debug, Clone)]
pub struct GreedyBob {
    start: Ball,
    q_bound: u64,
}

impl GreedyBob {
    pub fn new(start: Ball, q_bound: u64) -> Self {
        Self { start, q_bound: q_bound.max(1) }
    }

    /// Nearest `(p/q, r/q)` to `(x, y)` over `q ≤ q_bound`; ties keep the smaller `q`.
    pub fn nearest_rational(&self, x: &Rational, y: &Rational) -> (BigInt, BigInt, BigInt) {
        let half = rat(1, 2);
        let mut best: Option<(Rational, BigInt, BigInt, BigInt)> = None;
        for q in 1..=self.q_bound {
            let qr = int(q);
            let p = floor(&(&qr * x + &half));
            let r = floor(&(&qr * y + &half));
            let dx = x - Rational::new(p.clone(), BigInt::from(q));
            let dy = y - Rational::new(r.clone(), BigInt::from(q));
            let d2 = &dx * &dx + &dy * &dy;
            if best.as_ref().is_none_or(|b| d2 < b.0) {
                best = Some((d2, p, r, BigInt::from(q)));
            }
        }
        let (_, p, r, q) = best.expect("q_bound ≥ 1");
        (p, r, q)
    }
}

impl Bob for GreedyBob {
    fn open(&mut self, _: &GameParams) -> BobAction {
        BobAction::Move(self.start.clone())
    }

    fn respond(&mut self, _: usize, ball: &Ball, alice: &AliceMove, params: &GameParams) -> BobAction {
        let (r, c, reach) = bob_region(ball, alice, params);
        if c.dim() < 2 {
            return Ball::new(c, r).map(BobAction::Move).unwrap_or(BobAction::Resign);
        }
        let (p, rr, q) = self.nearest_rational(&c.coords()[0], &c.coords()[1]);
        let mut target = c.coords().to_vec();
        target[0] = Rational::new(p, q.clone());
        target[1] = Rational::new(rr, q);
        let target = Point(target);
        let diff = target.sub(&c).expect("same dimension");
        let d2 = norm_sq(&diff);
        let center = if d2 <= &reach * &reach {
            target
        } else {
            // Step of length at most `reach` along the segment.
            let (_, len_hi) = root_interval(&d2, 1, 2, 48);
            let t = &reach / len_hi;
            c.offset(&diff, &t).expect("same dimension")
        };
        Ball::new(center, r).map(BobAction::Move).unwrap_or(BobAction::Resign)
    }
}

/// Replays recorded balls, resigning when they run out.
#[derive(Debug, Clone)]
pub struct ReplayBob {
    balls: VecDeque<Ball>,
}

impl ReplayBob {
    pub fn new(balls: impl IntoIterator<Item = Ball>) -> Self {
        Self { balls: balls.into_iter().collect() }
    }

    pub fn from_transcript(t: &GameTranscript) -> Self {
        Self::new(t.bob_balls().cloned())
    }
}

impl Bob for ReplayBob {
    fn open(&mut self, _: &GameParams) -> BobAction {
        self.balls.pop_front().map(BobAction::Move).unwrap_or(BobAction::Resign)
    }

    fn respond(&mut self, _: usize, _: &Ball, _: &AliceMove, params: &GameParams) -> BobAction {
        self.open(params)
    }
}

/// Absolute game: moves `2βρ` along the slab normal with radius `βρ`.
#[derive(Debug, Clone)]
pub struct ShiftBob {
    start: Ball,
}

impl ShiftBob {
    pub fn new(start: Ball) -> Self {
        Self { start }
    }
}

impl Bob for ShiftBob {
    fn open(&mut self, _: &GameParams) -> BobAction {
        BobAction::Move(self.start.clone())
    }

    fn respond(&mut self, _: usize, ball: &Ball, alice: &AliceMove, params: &GameParams) -> BobAction {
        let AliceMove::Absolute { slab } = alice else {
            return CenterBob::new(self.start.clone()).respond(0, ball, alice, params);
        };
        let n = slab.plane().normal();
        let n2 = norm_sq(n);
        let shift = int(2) * &params.beta * ball.radius();
        let side = slab.plane().eval(ball.center()).unwrap_or_else(|_| Rational::zero());
        let sign = if side.is_negative() { int(-1) } else { int(1) };
        if let Some(len) = crate::numerics::exact_root(&n2, 2) {
            let t = sign * &shift / len;
            if let Ok(center) = ball.center().offset(n, &t) {
                if let Ok(b) = Ball::new(center, &params.beta * ball.radius()) {
                    return BobAction::Move(b);
                }
            }
        }
        absolute_escape(ball, slab, params).map(BobAction::Move).unwrap_or(BobAction::Resign)
    }
}

/// Schmidt game: concentric ball of radius `αρ`.
#[derive(Debug, Clone, Default)]
pub struct CenterAlice;

impl Alice for CenterAlice {
    fn respond(&mut self, _: usize, ball: &Ball, params: &GameParams) -> AliceMove {
        let a = Ball::new(ball.center().clone(), params.alpha_or_zero() * ball.radius())
            .unwrap_or_else(|_| ball.clone());
        AliceMove::Schmidt { ball: a }
    }
}

/// Schmidt game: random grid-centred ball of radius `αρ`.
#[derive(Debug, Clone)]
pub struct RandomSchmidtAlice {
    rng: ChaCha8Rng,
}

impl RandomSchmidtAlice {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Alice for RandomSchmidtAlice {
    fn respond(&mut self, _: usize, ball: &Ball, params: &GameParams) -> AliceMove {
        let alpha = params.alpha_or_zero();
        let reach = (Rational::one() - &alpha) * ball.radius();
        let c = grid_point(&mut self.rng, ball.center(), &reach, 32);
        let a = Ball::new(c, alpha * ball.radius()).unwrap_or_else(|_| ball.clone());
        AliceMove::Schmidt { ball: a }
    }
}

/// Absolute game: the coordinate slab through Bob's centre, width `βρ`,
/// cycling through the axes.
#[derive(Debug, Clone, Default)]
pub struct SlabThroughCenterAlice;

impl Alice for SlabThroughCenterAlice {
    fn respond(&mut self, round: usize, ball: &Ball, params: &GameParams) -> AliceMove {
        let axis = round % ball.dim();
        let mut normal = vec![Rational::zero(); ball.dim()];
        normal[axis] = Rational::one();
        let offset = -dot(&normal, ball.center().coords());
        let plane = Hyperplane::new(normal, offset).expect("unit normal");
        let slab = Slab::new(plane, &params.beta * ball.radius()).expect("nonnegative width");
        AliceMove::Absolute { slab }
    }
}

/// Potential game: declares nothing.
#[derive(Debug, Clone, Default)]
pub struct EmptyAlice;

impl Alice for EmptyAlice {
    fn respond(&mut self, _: usize, _: &Ball, _: &GameParams) -> AliceMove {
        AliceMove::Potential { slabs: Vec::new() }
    }
}
