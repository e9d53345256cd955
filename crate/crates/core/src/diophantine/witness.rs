//! Integer vectors `(a, b, c)` orthogonal to `v` with controlled `|a|` and `|b + z a|`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{DiophantineError, IntVec, Result, Witness};
use crate::geometry::{Ball, Hyperplane};
use crate::numerics::{ceil, cmp_mixed, cmp_pow, floor, root_interval, RadicalExpr, Rational, RefineConfig, Weights};

/// Largest integer `n ≥ 0` with `n ≤ q^e`.
fn floor_pow(q: &Rational, e: &Rational) -> BigInt {
    let (lo, _) = enclose_pow(q, e);
    let mut n = floor(&lo).max(BigInt::zero());
    let le = |n: &BigInt| cmp_pow(q, e, &Rational::from_integer(n.clone())).expect("q ≥ 1") != Ordering::Less;
    while le(&(&n + 1)) {
        n += 1;
    }
    while n.is_positive() && !le(&n) {
        n -= 1;
    }
    n
}

fn enclose_pow(q: &Rational, e: &Rational) -> (Rational, Rational) {
    let l = e.numer().to_u32().expect("weight numerator");
    let m = e.denom().to_u32().expect("weight denominator");
    root_interval(q, l, m, 32)
}

/// Solutions of `b·r ≡ −a·p (mod q)` as a class `b0 + m·ℤ`, `0 ≤ b0 < m`.
fn residue_class(a: &BigInt, v: &IntVec) -> Option<(BigInt, BigInt)> {
    let g = v.r.gcd(&v.q);
    let rhs = -(a * &v.p);
    if !rhs.is_multiple_of(&g) {
        return None;
    }
    let m = &v.q / &g;
    if m.is_one() {
        return Some((BigInt::zero(), m));
    }
    let r = (&v.r / &g).mod_floor(&m);
    let inv = r.extended_gcd(&m).x.mod_floor(&m);
    let b0 = ((&rhs / &g) * inv).mod_floor(&m);
    Some((b0, m))
}

/// The member of `b0 + mℤ` closest to `t`, the larger one on a tie.
fn closest_in_class(b0: &BigInt, m: &BigInt, t: &Rational) -> BigInt {
    let mr = Rational::from_integer(m.clone());
    let k = floor(&((t - Rational::from_integer(b0.clone())) / &mr));
    let below = b0 + &k * m;
    let above = &below + m;
    let db = t - Rational::from_integer(below.clone());
    let da = Rational::from_integer(above.clone()) - t;
    if da <= db {
        above
    } else {
        below
    }
}

fn complete(a: BigInt, b: BigInt, v: &IntVec) -> Witness {
    let s = &a * &v.p + &b * &v.r;
    debug_assert!(s.is_multiple_of(&v.q));
    let c = -(s / &v.q);
    Witness { a, b, c }
}

fn spread_term(a: &BigInt, b: &BigInt, z: &Rational) -> Rational {
    (Rational::from_integer(b.clone()) + z * Rational::from_integer(a.clone())).abs()
}

/// A witness of the Minkowski bound: `|a| ≤ q^λ`, `|b + z a| ≤ q^μ`, `(a, b, c)·v = 0`.
///
/// Scans `a` downward from `⌊q^λ⌋` and, for each `a`, the admissible `b`
/// closest to `−z a`.
pub fn minkowski_witness(z: &Rational, v: &IntVec, w: &Weights) -> Result<Witness> {
    let q = v.q_rational();
    let top = floor_pow(&q, w.lambda());
    let mut a = top;
    while !a.is_negative() {
        if a.is_zero() {
            let m = &v.q / v.r.gcd(&v.q);
            if cmp_pow(&q, w.mu(), &Rational::from_integer(m.clone()))? != Ordering::Less {
                return Ok(complete(a, m, v));
            }
        } else if let Some((b0, m)) = residue_class(&a, v) {
            let t = -(z * Rational::from_integer(a.clone()));
            let b = closest_in_class(&b0, &m, &t);
            if cmp_pow(&q, w.mu(), &spread_term(&a, &b, z))? != Ordering::Less {
                return Ok(complete(a, b, v));
            }
        }
        a -= 1;
    }
    Err(DiophantineError::WitnessSearchExhausted { v: v.to_string(), z: crate::numerics::format_rational(z) })
}

/// `t ≤ q^μ + √ρ`, with an undecided comparison counted as inside.
fn within_widened(q: &Rational, mu: &Rational, t: &Rational, rho: &Rational) -> Result<bool> {
    if cmp_pow(q, mu, t)? != Ordering::Less {
        return Ok(true);
    }
    let rhs = RadicalExpr::new(t.clone(), -Rational::one(), rho.clone())?;
    let d = cmp_mixed(q, mu, &rhs, &RefineConfig::default())?;
    Ok(d.ordering != Ordering::Less)
}

/// Every `(a, b, c)` with `(a, b) ≠ 0`, `(a, b, c)·v = 0`, `|a| ≤ q^λ` and
/// `|b + z_B a| ≤ q^μ + ρ(B)^{1/2}`, ordered by `(a, b)`.
pub fn witness_set(b: &Ball, v: &IntVec, w: &Weights) -> Result<Vec<Witness>> {
    let q = v.q_rational();
    let z = b.z();
    let rho = b.radius();
    let top = floor_pow(&q, w.lambda());
    let (_, qmu_hi) = enclose_pow(&q, w.mu());
    let (_, root_hi) = root_interval(rho, 1, 2, 32);
    let reach = qmu_hi + root_hi;
    let mut out = Vec::new();
    let mut a = -top.clone();
    while a <= top {
        let t = -(z * Rational::from_integer(a.clone()));
        let mut bb = ceil(&(&t - &reach));
        let hi = floor(&(&t + &reach));
        while bb <= hi {
            let ok = !(a.is_zero() && bb.is_zero())
                && (&a * &v.p + &bb * &v.r).is_multiple_of(&v.q)
                && within_widened(&q, w.mu(), &spread_term(&a, &bb, z), rho)?;
            if ok {
                out.push(complete(a.clone(), bb.clone(), v));
            }
            bb += 1;
        }
        a += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectedWitness {
    pub witness: Witness,
    /// `max{|a|, |b + z_B a|}`.
    #[serde(with = "crate::numerics::rational_serde")]
    pub spread: Rational,
    /// `H_B(v) = q · spread`.
    #[serde(with = "crate::numerics::rational_serde")]
    pub height: Rational,
}

/// The member of `witness_set(b, v, w)` of least spread.
///
/// Witnesses are taken up to sign with the first nonzero of `(a, b)`
/// positive; among equal spreads the least `(|a|, a, b, c)` wins.
pub fn select_witness(b: &Ball, v: &IntVec, w: &Weights) -> Result<SelectedWitness> {
    let q = v.q_rational();
    let z = b.z();
    let rho = b.radius();
    let top = floor_pow(&q, w.lambda());
    let member = |a: &BigInt, bb: &BigInt| -> Result<bool> { within_widened(&q, w.mu(), &spread_term(a, bb, z), rho) };

    // Least spread: for each a ≥ 0 only the closest admissible b matters.
    let mut best: Option<Rational> = None;
    let mut a = BigInt::zero();
    while a <= top {
        let ar = Rational::from_integer(a.clone());
        if best.as_ref().is_some_and(|s| &ar > s) {
            break;
        }
        let bb = if a.is_zero() {
            Some(&v.q / v.r.gcd(&v.q))
        } else {
            residue_class(&a, v).map(|(b0, m)| closest_in_class(&b0, &m, &-(z * &ar)))
        };
        if let Some(bb) = bb {
            if member(&a, &bb)? {
                let s = ar.clone().max(spread_term(&a, &bb, z));
                if best.as_ref().is_none_or(|cur| &s < cur) {
                    best = Some(s);
                }
            }
        }
        a += 1;
    }
    let spread = best.ok_or_else(|| DiophantineError::WitnessSearchExhausted {
        v: v.to_string(),
        z: crate::numerics::format_rational(z),
    })?;

    // Tie-break: least a, then least b, among members attaining the spread.
    let mut a = BigInt::zero();
    while Rational::from_integer(a.clone()) <= spread {
        let t = -(z * Rational::from_integer(a.clone()));
        let class = if a.is_zero() {
            Some((BigInt::zero(), &v.q / v.r.gcd(&v.q)))
        } else {
            residue_class(&a, v)
        };
        if let Some((b0, m)) = class {
            let mr = Rational::from_integer(m.clone());
            let k = ceil(&((&t - &spread - Rational::from_integer(b0.clone())) / &mr));
            let mut bb = &b0 + k * &m;
            while spread_term(&a, &bb, z) <= spread || Rational::from_integer(bb.clone()) <= t {
                let valid = spread_term(&a, &bb, z) <= spread && (!a.is_zero() || bb.is_positive()) && member(&a, &bb)?;
                if valid {
                    let witness = complete(a, bb, v);
                    let height = &q * &spread;
                    return Ok(SelectedWitness { witness, spread, height });
                }
                bb += &m;
            }
        }
        a += 1;
    }
    unreachable!("the least spread is attained by a member")
}

/// `H_B(v) = q · max{|a(B,v)|, |b(B,v) + z_B a(B,v)|}`.
pub fn height(b: &Ball, v: &IntVec, w: &Weights) -> Result<Rational> {
    select_witness(b, v, w).map(|s| s.height)
}

/// The vertical plane `a x + b y + c = 0` of the selected witness.
pub fn plane_of(b: &Ball, v: &IntVec, w: &Weights) -> Result<Hyperplane> {
    let s = select_witness(b, v, w)?;
    let r = |n: &BigInt| Rational::from_integer(n.clone());
    Ok(Hyperplane::vertical(r(&s.witness.a), r(&s.witness.b), r(&s.witness.c)).expect("(a, b) ≠ 0"))
}
