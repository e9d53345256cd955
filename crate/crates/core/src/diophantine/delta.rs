//! The open sets `Δ_ε(v) = {|x − p/q − z(y − r/q)| < ε/q^{1+λ}, |y − r/q| < ε/q^{1+μ}}`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{DiophantineError, IntVec, Result};
use crate::geometry::{Ball, Point};
use crate::numerics::{ceil, cmp_pow, floor, int, root_interval, Rational, Weights};

/// `q^λ·|t| < ε`, exactly.
fn scaled_below(q: &Rational, exponent: &Rational, t: &Rational, epsilon: &Rational) -> bool {
    if t.is_zero() {
        return epsilon.is_positive();
    }
    cmp_pow(q, exponent, &(epsilon / t.abs())).expect("nonnegative operands") == Ordering::Less
}

fn xyz(x: &Point) -> Result<(&Rational, &Rational, &Rational)> {
    match x.coords() {
        [a, b, c] => Ok((a, b, c)),
        other => Err(DiophantineError::Dimension(other.len())),
    }
}

/// Membership of `x` in `Δ_ε(v)`, compared in the scaled form
/// `q^λ|qx − p − z(qy − r)| < ε`, `q^μ|qy − r| < ε`.
pub fn delta_contains(v: &IntVec, epsilon: &Rational, w: &Weights, x: &Point) -> Result<bool> {
    let (x, y, z) = xyz(x)?;
    let q = v.q_rational();
    let u = &q * y - Rational::from_integer(v.r.clone());
    if !scaled_below(&q, w.mu(), &u, epsilon) {
        return Ok(false);
    }
    let s = &q * x - Rational::from_integer(v.p.clone()) - z * &u;
    Ok(scaled_below(&q, w.lambda(), &s, epsilon))
}

/// Finite truncation of the target set: `x` avoids every `Δ_ε(v)` with `q ≤ q_bound`.
pub fn target_oracle(epsilon: Rational, w: Weights, q_bound: u64) -> impl Fn(&Point) -> bool + Send + Sync {
    move |x: &Point| {
        let Ok((px, py, pz)) = xyz(x) else { return false };
        for q in 1..=q_bound {
            let qr = int(q);
            // |qy − r| < ε q^{-μ} ≤ ε and |qx − p − z(qy − r)| < ε q^{-λ} ≤ ε.
            let qy = &qr * py;
            let mut r = ceil(&(&qy - &epsilon));
            let r_hi = floor(&(&qy + &epsilon));
            while r <= r_hi {
                let u = &qy - Rational::from_integer(r.clone());
                let big_x = &qr * px - pz * &u;
                let mut p = ceil(&(&big_x - &epsilon));
                let p_hi = floor(&(&big_x + &epsilon));
                while p <= p_hi {
                    let v = IntVec { p: p.clone(), r: r.clone(), q: BigInt::from(q) };
                    if delta_contains(&v, &epsilon, &w, x).unwrap_or(false) {
                        return false;
                    }
                    p += 1;
                }
                r += 1;
            }
        }
        true
    }
}

/// Integer ranges `(r_lo, r_hi, p_lo, p_hi)` outside of which `Δ_ε(p, r, q)` cannot meet `b`.
pub fn meeting_box(q: u64, epsilon: &Rational, b: &Ball) -> Result<(BigInt, BigInt, BigInt, BigInt)> {
    let (x, y, z) = xyz(b.center())?;
    let qr = int(q);
    let rho = b.radius();
    // |qy − r| < ε and |qx − p − z(qy − r)| < ε somewhere in the ball.
    let reach_z = z.abs() + rho;
    let r_lo = ceil(&(&qr * (y - rho) - epsilon));
    let r_hi = floor(&(&qr * (y + rho) + epsilon));
    let slack = epsilon + &reach_z * epsilon;
    let p_lo = ceil(&(&qr * (x - rho) - &slack));
    let p_hi = floor(&(&qr * (x + rho) + &slack));
    Ok((r_lo, r_hi, p_lo, p_hi))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeltaMeet {
    Empty,
    /// A point of `Δ_ε(v) ∩ B`, verified exactly.
    Meets(Point),
    /// Neither certified within the node budget.
    Undecided,
}

impl DeltaMeet {
    /// Undecided counts as meeting.
    pub fn may_meet(&self) -> bool {
        !matches!(self, DeltaMeet::Empty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeetConfig {
    pub max_nodes: usize,
    pub root_bits: u32,
}

impl Default for MeetConfig {
    fn default() -> Self {
        Self { max_nodes: 4000, root_bits: 64 }
    }
}

/// Rational enclosure of `ε / q^{1+e}`.
fn width_bounds(epsilon: &Rational, q: &Rational, e: &Rational, bits: u32) -> (Rational, Rational) {
    let l = e.numer().to_u32().expect("weight numerator");
    let m = e.denom().to_u32().expect("weight denominator");
    let (lo, hi) = root_interval(q, l, m, bits);
    let base = epsilon / q;
    (&base / hi, if lo.is_zero() { base.clone() } else { &base / lo })
}

type V2 = (Rational, Rational);

fn sub2(a: &V2, b: &V2) -> V2 {
    (&a.0 - &b.0, &a.1 - &b.1)
}

fn dot2(a: &V2, b: &V2) -> Rational {
    &a.0 * &b.0 + &a.1 * &b.1
}

/// Closest point of segment `[a, b]` to `p`.
fn closest_on_segment(p: &V2, a: &V2, b: &V2) -> V2 {
    let ab = sub2(b, a);
    let len2 = dot2(&ab, &ab);
    if len2.is_zero() {
        return a.clone();
    }
    let t = dot2(&sub2(p, a), &ab) / len2;
    let t = t.max(Rational::zero()).min(Rational::one());
    (&a.0 + &ab.0 * &t, &a.1 + &ab.1 * &t)
}

/// Closest point of the closed convex polygon `poly` (vertices in order) to `p`.
fn closest_in_polygon(p: &V2, poly: &[V2], inside: bool) -> V2 {
    if inside {
        return p.clone();
    }
    let mut best: Option<(Rational, V2)> = None;
    for i in 0..poly.len() {
        let c = closest_on_segment(p, &poly[i], &poly[(i + 1) % poly.len()]);
        let d = sub2(p, &c);
        let d2 = dot2(&d, &d);
        if best.as_ref().is_none_or(|b| d2 < b.0) {
            best = Some((d2, c));
        }
    }
    best.expect("nonempty polygon").1
}

struct Frame<'a> {
    /// Disc centre in `(u, x')` with `u = y − r/q`, `x' = x − p/q`.
    center: V2,
    zc: &'a Rational,
    rho2: Rational,
}

impl Frame<'_> {
    /// `ρ² − (distance from zc to [z1, z2])²`.
    fn max_radius2(&self, z1: &Rational, z2: &Rational) -> Rational {
        let gap = if self.zc < z1 {
            z1 - self.zc
        } else if self.zc > z2 {
            self.zc - z2
        } else {
            Rational::zero()
        };
        &self.rho2 - &gap * &gap
    }

    /// Whether the union over `z ∈ [z1, z2]` of the slices
    /// `{|u| ≤ d2, |x' − z u| ≤ d1}` comes within `√s2` of the disc centre.
    fn relaxed_hits(&self, z1: &Rational, z2: &Rational, d1: &Rational, d2: &Rational, s2: &Rational) -> bool {
        let (u0, x0) = &self.center;
        let zero = Rational::zero();
        let halves: [(Vec<V2>, bool); 2] = [
            (
                vec![
                    (zero.clone(), -d1),
                    (zero.clone(), d1.clone()),
                    (d2.clone(), z2 * d2 + d1),
                    (d2.clone(), z1 * d2 - d1),
                ],
                *u0 >= zero && u0 <= d2 && z1 * u0 - d1 <= *x0 && *x0 <= z2 * u0 + d1,
            ),
            (
                vec![
                    (zero.clone(), -d1),
                    (zero.clone(), d1.clone()),
                    (-d2, -(z1 * d2) + d1),
                    (-d2, -(z2 * d2) - d1),
                ],
                *u0 <= zero && -(u0.clone()) <= *d2 && z2 * u0 - d1 <= *x0 && *x0 <= z1 * u0 + d1,
            ),
        ];
        halves.iter().any(|(poly, inside)| {
            let c = closest_in_polygon(&self.center, poly, *inside);
            let d = sub2(&self.center, &c);
            dot2(&d, &d) <= *s2
        })
    }

    /// A point of the closed slice `{|u| ≤ d2, |x' − z u| ≤ d1}` in the disc of
    /// squared radius `s2` at height `z`, if any.
    fn slice_point(&self, z: &Rational, d1: &Rational, d2: &Rational, s2: &Rational) -> Option<V2> {
        if s2.is_negative() {
            return None;
        }
        let (u0, x0) = &self.center;
        let inside = u0.abs() <= *d2 && (x0 - z * u0).abs() <= *d1;
        let poly = vec![(-d2, -(z * d2) - d1), (-d2, -(z * d2) + d1), (d2.clone(), z * d2 + d1), (d2.clone(), z * d2 - d1)];
        let c = closest_in_polygon(&self.center, &poly, inside);
        let d = sub2(&self.center, &c);
        (dot2(&d, &d) <= *s2).then_some(c)
    }
}

/// Decides whether `Δ_ε(v)` meets the closed ball `b`.
///
/// Branch and bound over sub-intervals of the ball's z-range: each node is
/// discarded when the union of its slices (with widths rounded up) misses the
/// widest disc of the ball over that range, and otherwise probed at its
/// midpoint with widths rounded down, where a hit yields an exactly verified
/// point.
pub fn delta_meets_ball(v: &IntVec, epsilon: &Rational, w: &Weights, b: &Ball, cfg: &MeetConfig) -> Result<DeltaMeet> {
    let (xc, yc, zc) = xyz(b.center())?;
    let q = v.q_rational();
    let rho = b.radius();
    let (p_q, r_q) = v.point();
    let one = Rational::one();
    let (d1_lo, d1_hi) = width_bounds(epsilon, &q, w.lambda(), cfg.root_bits);
    let (d2_lo, d2_hi) = width_bounds(epsilon, &q, w.mu(), cfg.root_bits);
    // Strictly inside the open set once the lower bounds are shrunk a little.
    let shrink = one - Rational::new(BigInt::one(), BigInt::one() << 24);
    let d1_in = &d1_lo * &shrink;
    let d2_in = &d2_lo * &shrink;

    let u0 = yc - &r_q;
    let x0 = xc - &p_q;
    // Bounding box: |u| < d2 forces |u0| ≤ ρ + d2, and |x'| ≤ |z||u| + d1.
    if u0.abs() > rho + &d2_hi {
        return Ok(DeltaMeet::Empty);
    }
    let zmax = zc.abs() + rho;
    if x0.abs() > rho + &d1_hi + &zmax * &d2_hi {
        return Ok(DeltaMeet::Empty);
    }

    let frame = Frame { center: (u0, x0), zc, rho2: rho * rho };
    let mut stack = vec![(zc - rho, zc + rho)];
    let mut nodes = 0;
    let two = int(2);
    while let Some((z1, z2)) = stack.pop() {
        nodes += 1;
        if nodes > cfg.max_nodes {
            return Ok(DeltaMeet::Undecided);
        }
        let s2max = frame.max_radius2(&z1, &z2);
        if s2max.is_negative() || !frame.relaxed_hits(&z1, &z2, &d1_hi, &d2_hi, &s2max) {
            continue;
        }
        let zm = (&z1 + &z2) / &two;
        let dz = &zm - zc;
        let s2 = &frame.rho2 - &dz * &dz;
        if let Some((u, xp)) = frame.slice_point(&zm, &d1_in, &d2_in, &s2) {
            let point = Point(vec![xp + &p_q, u + &r_q, zm.clone()]);
            if delta_contains(v, epsilon, w, &point)? && b.contains_point(&point).unwrap_or(false) {
                return Ok(DeltaMeet::Meets(point));
            }
        }
        // Explore the half nearer the ball's equator first.
        let (near, far) = if &zm <= zc { ((zm.clone(), z2), (z1, zm)) } else { ((z1, zm.clone()), (zm, z2)) };
        stack.push(far);
        stack.push(near);
    }
    Ok(DeltaMeet::Empty)
}
