//! Stage families of balls and the vector families attached to them.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::witness::{select_witness, SelectedWitness};
use super::{IntVec, Result, StageParams};
use crate::geometry::Ball;
use crate::numerics::{
    cmp_pow, cmp_power_sums, floor, int, min_int_with_pow_at_least, pow_i, Decided, PowerProduct, Rational,
};

/// `(R^γ − 1)^{-1} ≤ (β²/2)^γ`, decided as `(β²R/2)^γ ≥ 1 + (β²/2)^γ`.
///
/// The returned ordering is left side against right side; the condition holds
/// unless it is `Less`.
pub fn r2_condition(r: &Rational, beta: &Rational, gamma: &Rational) -> Result<Decided> {
    let half_b2 = beta * beta / int(2);
    let lhs = PowerProduct::power(&half_b2 * r, gamma.clone())?;
    let rhs = [PowerProduct::one(), PowerProduct::power(half_b2, gamma.clone())?];
    Ok(cmp_power_sums(&[lhs], &rhs, 4096))
}

/// The stage `n` with `βR⁻ⁿρ₀ < ρ(B) ≤ R⁻ⁿρ₀` (`n ≥ 1`), `0` for `B₀` itself,
/// or `None` when the radius falls between stages.
pub fn stage_of_ball(b: &Ball, sp: &StageParams) -> Option<u32> {
    if b == &sp.b0 {
        return Some(0);
    }
    // R^n ≤ ρ₀/ρ < R^n/β
    let ratio = sp.rho0() / b.radius();
    let mut rn = sp.r.clone();
    let mut n = 1u32;
    while rn <= ratio {
        if ratio < &rn / &sp.beta {
            return Some(n);
        }
        rn *= &sp.r;
        n += 1;
    }
    None
}

/// `H_n`.
pub fn height_threshold(n: u32, sp: &StageParams) -> Rational {
    sp.h(n)
}

/// Integer range `lo..=hi` of denominators, possibly cut at `q_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QWindow {
    pub lo: u64,
    pub hi: u64,
    /// The untruncated upper end exceeded `q_max`.
    pub truncated: bool,
}

impl QWindow {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.lo..=self.hi
    }
}

/// Denominators allowed in `V_B` for `B` of stage `n`: `H_n ≤ q^{1+λ}` and `q ≤ 2H_{n+1}`.
pub fn q_window(n: u32, sp: &StageParams) -> Result<QWindow> {
    let e = sp.weights.lambda() + Rational::one();
    let lo = min_int_with_pow_at_least(&sp.h(n), &e)?.max(BigInt::one());
    let top = int(2) * sp.h(n + 1);
    let truncated = top > int(sp.q_max);
    let hi = floor(&top).min(BigInt::from(sp.q_max));
    let lo = lo.to_u64().unwrap_or(u64::MAX);
    let hi = hi.to_u64().unwrap_or(0);
    Ok(QWindow { lo, hi, truncated })
}

/// Whether `q` lies in the `k`-th class window of stage `n`:
/// `[h, hR⁸]` for `k = 1` and `[hR^{2k+4}, hR^{2k+6}]` for `k ≥ 2`, `h = H_n^{1/(1+λ)}`.
pub fn class_window_contains(q: u64, n: u32, k: u32, sp: &StageParams) -> Result<bool> {
    let e = sp.weights.lambda() + Rational::one();
    let hn = sp.h(n);
    let q = int(q);
    let (lo_pow, hi_pow) = if k == 1 { (0, 8) } else { (2 * k as i64 + 4, 2 * k as i64 + 6) };
    let lo = &q / pow_i(&sp.r, lo_pow);
    let hi = &q / pow_i(&sp.r, hi_pow);
    Ok(cmp_pow(&lo, &e, &hn)? != Ordering::Less && cmp_pow(&hi, &e, &hn)? != Ordering::Greater)
}

/// Least `k ≥ 1` whose class window contains `q`.
pub fn class_of(q: u64, n: u32, sp: &StageParams) -> Result<Option<u32>> {
    let e = sp.weights.lambda() + Rational::one();
    let hn = sp.h(n);
    let mut k = 1;
    loop {
        if class_window_contains(q, n, k, sp)? {
            return Ok(Some(k));
        }
        // Windows move up with k; stop once the lower end passes q.
        let next = k + 1;
        let lo = int(q) / pow_i(&sp.r, 2 * next as i64 + 4);
        if cmp_pow(&lo, &e, &hn)? == Ordering::Less {
            return Ok(None);
        }
        k = next;
    }
}

/// `H_n ≤ H_B(v) ≤ 2H_{n+1}`.
pub fn in_family(b: &Ball, n: u32, sp: &StageParams, v: &IntVec) -> Result<Option<SelectedWitness>> {
    let s = select_witness(b, v, &sp.weights)?;
    let keep = sp.h(n) <= s.height && s.height <= int(2) * sp.h(n + 1);
    Ok(keep.then_some(s))
}

/// Membership in `V_{B,k}`.
pub fn v_class(b: &Ball, n: u32, k: u32, sp: &StageParams, v: &IntVec) -> Result<bool> {
    let Some(q) = v.q_u64() else { return Ok(false) };
    Ok(class_window_contains(q, n, k, sp)? && in_family(b, n, sp, v)?.is_some())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyEntry {
    pub v: IntVec,
    pub selected: SelectedWitness,
    /// Least class containing `q`, if any.
    pub class: Option<u32>,
}

/// `V_B` restricted to the κ-box and to `q ≤ q_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Family {
    pub entries: Vec<FamilyEntry>,
    pub window: QWindow,
    pub truncated: bool,
}

/// Ranges `|r| ≤ q(κ−1+ε)` and `|p| ≤ q(κ−1+κε+ε)`: outside them `Δ_ε(v)` misses the κ-box.
pub fn kappa_box(q: u64, sp: &StageParams) -> (BigInt, BigInt) {
    let one = Rational::one();
    let qr = int(q);
    let r_max = floor(&(&qr * (&sp.kappa - &one + &sp.epsilon)));
    let p_max = floor(&(&qr * (&sp.kappa - &one + &sp.kappa * &sp.epsilon + &sp.epsilon)));
    (p_max, r_max)
}

/// All `v` in the κ-box with `q` in the stage window and `H_n ≤ H_B(v) ≤ 2H_{n+1}`.
pub fn v_family(b: &Ball, n: u32, sp: &StageParams) -> Result<Family> {
    let window = q_window(n, sp)?;
    let mut entries = Vec::new();
    for q in window.iter() {
        let (p_max, r_max) = kappa_box(q, sp);
        let class = class_of(q, n, sp)?;
        let mut r = -r_max.clone();
        while r <= r_max {
            let mut p = -p_max.clone();
            while p <= p_max {
                let v = IntVec { p: p.clone(), r: r.clone(), q: BigInt::from(q) };
                if let Some(selected) = in_family(b, n, sp, &v)? {
                    entries.push(FamilyEntry { v, selected, class });
                }
                p += 1;
            }
            r += 1;
        }
    }
    let truncated = window.truncated;
    Ok(Family { entries, window, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::Mode;
    use crate::geometry::Point;
    use crate::numerics::{rat, Weights};

    fn sp(rho0: Rational, r: i64, epsilon: Rational) -> StageParams {
        StageParams {
            b0: Ball::new(Point(vec![int(0), int(0), int(0)]), rho0).unwrap(),
            kappa: int(2),
            r: int(r),
            epsilon,
            beta: rat(1, 2),
            gamma: int(1),
            weights: Weights::from_lambda(rat(1, 2)).unwrap(),
            mode: Mode::Desk,
            q_max: 64,
            k_max: 3,
        }
    }

    fn at_origin(radius: Rational) -> Ball {
        Ball::new(Point(vec![int(0), int(0), int(0)]), radius).unwrap()
    }

    #[test]
    fn stage_examples() {
        let p = sp(int(1), 8, rat(1, 1024));
        assert_eq!(stage_of_ball(&at_origin(rat(1, 10)), &p), Some(1));
        assert_eq!(stage_of_ball(&at_origin(rat(1, 20)), &p), None);
        assert_eq!(stage_of_ball(&at_origin(rat(1, 64)), &p), Some(2));
        assert_eq!(stage_of_ball(&at_origin(rat(1, 128)), &p), None);
        assert_eq!(stage_of_ball(&at_origin(int(1)), &p), Some(0));
        let off = Ball::new(Point(vec![rat(1, 8), int(0), int(0)]), int(1)).unwrap();
        assert_eq!(stage_of_ball(&off, &p), None);
    }

    #[test]
    fn r2_examples() {
        // β = 1/2, γ = 1: need R/8 ≥ 9/8.
        assert_eq!(r2_condition(&int(9), &rat(1, 2), &int(1)).unwrap().ordering, Ordering::Equal);
        assert_eq!(r2_condition(&int(8), &rat(1, 2), &int(1)).unwrap().ordering, Ordering::Less);
        let d = r2_condition(&int(1000), &rat(1, 2), &rat(1, 2)).unwrap();
        assert!(d.exact && d.ordering == Ordering::Greater);
    }

    #[test]
    fn window_with_unit_threshold() {
        // H_n = 1 at n = 1 when 3εκ/ρ₀·R = 1.
        let p = sp(int(1), 8, rat(1, 48));
        assert_eq!(p.h(1), int(1));
        let w = q_window(1, &p).unwrap();
        assert_eq!((w.lo, w.hi, w.truncated), (1, 16, false));
        assert!(w.iter().all(|q| class_window_contains(q, 1, 1, &p).unwrap()));
    }

    #[test]
    fn empty_window_below_one() {
        let p = sp(int(1), 8, rat(1, 100_000));
        assert!(p.h(2) < rat(1, 2));
        assert!(q_window(1, &p).unwrap().is_empty());
        let f = v_family(&at_origin(rat(1, 10)), 1, &p).unwrap();
        assert!(f.entries.is_empty());
    }

    #[test]
    fn truncation_reported() {
        let mut p = sp(int(1), 8, rat(1, 48));
        p.q_max = 10;
        let w = q_window(1, &p).unwrap();
        assert!(w.truncated);
        assert_eq!(w.hi, 10);
    }

    #[test]
    fn class_windows_tile() {
        let p = sp(int(1), 2, rat(1, 48));
        for q in 1..2000u64 {
            if cmp_pow(&int(q), &rat(3, 2), &p.h(1)).unwrap() != Ordering::Less {
                assert!(class_of(q, 1, &p).unwrap().is_some(), "q = {q}");
            }
        }
    }
}
