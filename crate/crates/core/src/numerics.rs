//! Exact scalar arithmetic.
//!
//! Every inequality the games and the Diophantine machinery need is of the
//! form "rational power versus rational", "rational versus `a + b·√ρ`" or a
//! comparison between finite sums of rational powers. All of them are decided
//! here without floating point: single comparisons by cross-powering,
//! sums by certified rational interval refinement.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exact fraction with arbitrary-precision numerator and denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("negative base {0} in rational power")]
    NegativeBase(String),
    #[error("negative exponent {0}")]
    NegativeExponent(String),
    #[error("exponent {0} has a numerator or denominator too large to expand")]
    ExponentTooLarge(String),
    #[error("negative radicand {0}")]
    NegativeRadicand(String),
    #[error("malformed rational {0:?}")]
    Parse(String),
    #[error("weights must satisfy lambda >= mu >= 0 and lambda + mu = 1, got lambda={lambda}, mu={mu}")]
    InvalidWeights { lambda: String, mu: String },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Formats as `num/den`, including `n/1` for integers.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den` or a bare integer `n`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || NumericsError::Parse(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn floor(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

pub fn ceil(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Integer power with a possibly negative exponent (`x` must be nonzero then).
pub fn pow_i(x: &Rational, e: i64) -> Rational {
    let p = num_traits::pow(x.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// Splits a rational exponent into `(l, m)` with `e = l/m`, `m ≥ 1`.
pub fn exponent_parts(e: &Rational) -> Result<(i64, u32)> {
    let too_large = || NumericsError::ExponentTooLarge(format_rational(e));
    let l = e.numer().to_i64().ok_or_else(too_large)?;
    let m = e.denom().to_u32().ok_or_else(too_large)?;
    if l.unsigned_abs() > 1 << 20 || m > 1 << 20 {
        return Err(too_large());
    }
    Ok((l, m))
}

/// `x^(1/m)` when it is rational.
pub fn exact_root(x: &Rational, m: u32) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    if m == 1 {
        return Some(x.clone());
    }
    let n = x.numer().nth_root(m);
    let d = x.denom().nth_root(m);
    if num_traits::pow(n.clone(), m as usize) == *x.numer()
        && num_traits::pow(d.clone(), m as usize) == *x.denom()
    {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// `x^e` when it is rational (`x ≥ 0`).
pub fn rational_power(x: &Rational, e: &Rational) -> Option<Rational> {
    let (l, m) = exponent_parts(e).ok()?;
    if x.is_zero() {
        return match l.cmp(&0) {
            Ordering::Greater => Some(Rational::zero()),
            Ordering::Equal => Some(Rational::one()),
            Ordering::Less => None,
        };
    }
    exact_root(&pow_i(x, l), m)
}

/// Rational enclosure `[lo, hi]` of `x^(l/m)` with `hi − lo ≤ 2^-bits` (for `x ≥ 0`, `l ≥ 0`).
pub fn root_interval(x: &Rational, l: u32, m: u32, bits: u32) -> (Rational, Rational) {
    let xl = num_traits::pow(x.clone(), l as usize);
    let scale = BigInt::one() << (bits as usize);
    let scaled = (xl.numer() << (m as usize * bits as usize)).div_floor(xl.denom());
    let f = scaled.nth_root(m);
    let exact = num_traits::pow(f.clone(), m as usize) == scaled
        && scaled.clone() * xl.denom() == (xl.numer() << (m as usize * bits as usize));
    let lo = Rational::new(f.clone(), scale.clone());
    let hi = if exact {
        lo.clone()
    } else {
        Rational::new(f + 1, scale)
    };
    (lo, hi)
}

/// Ordering of `x^exponent` versus `y`, decided by comparing `x^l` with `y^m`.
pub fn cmp_pow(x: &Rational, exponent: &Rational, y: &Rational) -> Result<Ordering> {
    if x.is_negative() {
        return Err(NumericsError::NegativeBase(format_rational(x)));
    }
    if exponent.is_negative() {
        return Err(NumericsError::NegativeExponent(format_rational(exponent)));
    }
    if y.is_negative() {
        return Ok(Ordering::Greater);
    }
    let (l, m) = exponent_parts(exponent)?;
    let lhs = pow_i(x, l);
    let rhs = pow_i(y, m as i64);
    Ok(lhs.cmp(&rhs))
}

/// `λ ≥ μ ≥ 0`, `λ + μ = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Weights {
    lambda: Rational,
    mu: Rational,
}

impl Weights {
    pub fn new(lambda: Rational, mu: Rational) -> Result<Self> {
        if lambda < mu || mu.is_negative() || &lambda + &mu != Rational::one() {
            return Err(NumericsError::InvalidWeights {
                lambda: format_rational(&lambda),
                mu: format_rational(&mu),
            });
        }
        Ok(Self { lambda, mu })
    }

    pub fn from_lambda(lambda: Rational) -> Result<Self> {
        let mu = Rational::one() - &lambda;
        Self::new(lambda, mu)
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    /// `λ = μ = 1/2`.
    pub fn is_degenerate(&self) -> bool {
        self.lambda == self.mu
    }

    /// Common denominator `m` of `λ = l/m` and `μ = (m−l)/m`.
    pub fn denominator(&self) -> u32 {
        self.lambda.denom().to_u32().unwrap_or(u32::MAX)
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_rational(&self.lambda), format_rational(&self.mu))
    }
}

/// `a + b·√rho` with `rho ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadicalExpr {
    pub a: Rational,
    pub b: Rational,
    rho: Rational,
}

impl RadicalExpr {
    pub fn new(a: Rational, b: Rational, rho: Rational) -> Result<Self> {
        if rho.is_negative() {
            return Err(NumericsError::NegativeRadicand(format_rational(&rho)));
        }
        Ok(Self { a, b, rho })
    }

    pub fn rational(a: Rational) -> Self {
        Self { a, b: Rational::zero(), rho: Rational::zero() }
    }

    pub fn rho(&self) -> &Rational {
        &self.rho
    }

    fn has_radical(&self) -> bool {
        !self.b.is_zero() && !self.rho.is_zero()
    }

    pub fn sign(&self) -> Ordering {
        cmp_radical(self, &Rational::zero())
    }

    fn mul(&self, other: &Self) -> Self {
        debug_assert!(self.rho == other.rho || !self.has_radical() || !other.has_radical());
        let rho = if self.has_radical() { self.rho.clone() } else { other.rho.clone() };
        Self {
            a: &self.a * &other.a + &self.b * &other.b * &rho,
            b: &self.a * &other.b + &other.a * &self.b,
            rho,
        }
    }

    /// Exact `(a + b√ρ)^n`, again of the form `A + B√ρ`.
    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self { a: Rational::one(), b: Rational::zero(), rho: self.rho.clone() };
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    pub fn interval(&self, bits: u32) -> (Rational, Rational) {
        if !self.has_radical() {
            return (self.a.clone(), self.a.clone());
        }
        let (lo, hi) = root_interval(&self.rho, 1, 2, bits);
        if self.b.is_positive() {
            (&self.a + &self.b * lo, &self.a + &self.b * hi)
        } else {
            (&self.a + &self.b * hi, &self.a + &self.b * lo)
        }
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.a) + to_f64(&self.b) * to_f64(&self.rho).sqrt()
    }
}

/// Ordering of `a + b√ρ` versus `y`: sign analysis, then one squaring step.
pub fn cmp_radical(e: &RadicalExpr, y: &Rational) -> Ordering {
    let d = y - &e.a;
    if !e.has_radical() {
        return Rational::zero().cmp(&d);
    }
    let t2 = &e.b * &e.b * &e.rho;
    let d2 = &d * &d;
    if e.b.is_positive() {
        if !d.is_positive() {
            Ordering::Greater
        } else {
            t2.cmp(&d2)
        }
    } else if !d.is_negative() {
        Ordering::Less
    } else {
        d2.cmp(&t2)
    }
}

/// Result of a comparison that may have needed interval refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decided {
    pub ordering: Ordering,
    /// False when refinement hit the precision cap; `ordering` is then
    /// `Equal`, to be read as the inclusive `≤`.
    pub exact: bool,
}

impl Decided {
    fn exact(ordering: Ordering) -> Self {
        Self { ordering, exact: true }
    }

    pub fn is_le(&self) -> bool {
        self.ordering != Ordering::Greater
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefineConfig {
    /// Largest root degree expanded symbolically in `cmp_mixed`.
    pub max_exact_degree: u32,
    pub precision_cap_bits: u32,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self { max_exact_degree: 64, precision_cap_bits: 4096 }
    }
}

/// Ordering of `x^exponent` versus `a + b√ρ`.
///
/// For positive right-hand sides the comparison is lifted to
/// `x^l` versus `(a + b√ρ)^m`, which is again a single-radical comparison.
/// Root degrees above `cfg.max_exact_degree` fall back to interval refinement.
pub fn cmp_mixed(
    x: &Rational,
    exponent: &Rational,
    e: &RadicalExpr,
    cfg: &RefineConfig,
) -> Result<Decided> {
    if x.is_negative() {
        return Err(NumericsError::NegativeBase(format_rational(x)));
    }
    if exponent.is_negative() {
        return Err(NumericsError::NegativeExponent(format_rational(exponent)));
    }
    let (l, m) = exponent_parts(exponent)?;
    match e.sign() {
        Ordering::Less => return Ok(Decided::exact(Ordering::Greater)),
        Ordering::Equal => {
            let lhs_zero = x.is_zero() && l > 0;
            return Ok(Decided::exact(if lhs_zero { Ordering::Equal } else { Ordering::Greater }));
        }
        Ordering::Greater => {}
    }
    if !e.has_radical() {
        return cmp_pow(x, exponent, &e.a).map(Decided::exact);
    }
    if m <= cfg.max_exact_degree {
        let lifted = e.pow(m);
        let xl = pow_i(x, l);
        return Ok(Decided::exact(cmp_radical(&lifted, &xl).reverse()));
    }
    let lhs = PowerProduct::power(x.clone(), exponent.clone())?;
    let mut bits = 64;
    loop {
        let (l_lo, l_hi) = lhs.interval(bits);
        let (r_lo, r_hi) = e.interval(bits);
        if l_hi < r_lo {
            return Ok(Decided::exact(Ordering::Less));
        }
        if l_lo > r_hi {
            return Ok(Decided::exact(Ordering::Greater));
        }
        if bits >= cfg.precision_cap_bits {
            return Ok(Decided { ordering: Ordering::Equal, exact: false });
        }
        bits = (bits * 2).min(cfg.precision_cap_bits);
    }
}

/// `coeff · Π baseᵢ^expᵢ` with `coeff ≥ 0` and every base `> 0`.
///
/// Closed under products and rational powers; two values are compared
/// exactly by raising both sides to the common denominator of all exponents.
#[derive(Debug, Clone)]
pub struct PowerProduct {
    coeff: Rational,
    factors: Vec<(Rational, Rational)>,
}

impl PowerProduct {
    pub fn zero() -> Self {
        Self { coeff: Rational::zero(), factors: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    /// Panics on a negative value.
    pub fn from_rational(r: Rational) -> Self {
        assert!(!r.is_negative(), "power products are nonnegative");
        Self { coeff: r, factors: Vec::new() }
    }

    /// `base^exp`; `0^exp` is only defined for `exp ≥ 0`.
    pub fn power(base: Rational, exp: Rational) -> Result<Self> {
        if base.is_negative() {
            return Err(NumericsError::NegativeBase(format_rational(&base)));
        }
        if base.is_zero() {
            return match exp.cmp(&Rational::zero()) {
                Ordering::Greater => Ok(Self::zero()),
                Ordering::Equal => Ok(Self::one()),
                Ordering::Less => Err(NumericsError::NegativeExponent(format_rational(&exp))),
            };
        }
        exponent_parts(&exp)?;
        Ok(Self { coeff: Rational::one(), factors: vec![(base, exp)] }.normalized())
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn factors(&self) -> &[(Rational, Rational)] {
        &self.factors
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self { coeff: &self.coeff * &other.coeff, factors }.normalized()
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        self.mul(&Self::from_rational(r.clone()))
    }

    /// `self^e`. A zero value raised to a non-positive power is rejected.
    pub fn powr(&self, e: &Rational) -> Result<Self> {
        exponent_parts(e)?;
        if self.is_zero() {
            return Self::power(Rational::zero(), e.clone());
        }
        let mut factors: Vec<_> = self.factors.iter().map(|(b, x)| (b.clone(), x * e)).collect();
        factors.push((self.coeff.clone(), e.clone()));
        let out = Self { coeff: Rational::one(), factors }.normalized();
        for (_, x) in &out.factors {
            exponent_parts(x)?;
        }
        Ok(out)
    }

    fn normalized(mut self) -> Self {
        if self.coeff.is_zero() {
            self.factors.clear();
            return self;
        }
        let mut merged: Vec<(Rational, Rational)> = Vec::new();
        for (b, e) in self.factors.drain(..) {
            if e.is_zero() || b.is_one() {
                continue;
            }
            match merged.iter_mut().find(|(mb, _)| *mb == b) {
                Some(slot) => slot.1 += e,
                None => merged.push((b, e)),
            }
        }
        let mut coeff = self.coeff;
        let mut factors = Vec::new();
        for (b, e) in merged {
            if e.is_zero() {
                continue;
            }
            if e.is_integer() {
                coeff *= pow_i(&b, e.to_integer().to_i64().unwrap_or(0));
                continue;
            }
            match rational_power(&b, &e) {
                Some(v) => coeff *= v,
                None => factors.push((b, e)),
            }
        }
        factors.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
        Self { coeff, factors }
    }

    /// The value, when it is rational.
    pub fn to_rational(&self) -> Option<Rational> {
        if self.factors.is_empty() {
            Some(self.coeff.clone())
        } else {
            None
        }
    }

    fn lifted(&self, m: u32) -> Rational {
        let mut acc = pow_i(&self.coeff, m as i64);
        for (b, e) in &self.factors {
            let k = (e * Rational::from_integer(BigInt::from(m))).to_integer();
            acc *= pow_i(b, k.to_i64().expect("exponent bounded by exponent_parts"));
        }
        acc
    }

    fn lcm_denominator(&self, acc: u32) -> u32 {
        self.factors.iter().fold(acc, |m, (_, e)| {
            m.lcm(&e.denom().to_u32().expect("exponent bounded by exponent_parts"))
        })
    }

    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let m = other.lcm_denominator(self.lcm_denominator(1));
        self.lifted(m).cmp(&other.lifted(m))
    }

    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        if r.is_negative() {
            return Ordering::Greater;
        }
        self.cmp_exact(&Self::from_rational(r.clone()))
    }

    /// Enclosure of the value by rationals, tightening as `bits` grows.
    pub fn interval(&self, bits: u32) -> (Rational, Rational) {
        let mut lo = self.coeff.clone();
        let mut hi = self.coeff.clone();
        for (b, e) in &self.factors {
            let (l, m) = exponent_parts(e).expect("exponent bounded by exponent_parts");
            let base = if l < 0 { b.recip() } else { b.clone() };
            // Scale the precision with the magnitude of the factor.
            let extra = base.numer().bits().saturating_sub(base.denom().bits()) as u32;
            let (flo, fhi) = root_interval(&base, l.unsigned_abs() as u32, m, bits + extra * l.unsigned_abs() as u32 / m.max(1));
            lo *= flo;
            hi *= fhi;
        }
        (lo, hi)
    }

    pub fn to_f64(&self) -> f64 {
        self.factors.iter().fold(to_f64(&self.coeff), |acc, (b, e)| acc * to_f64(b).powf(to_f64(e)))
    }
}

impl PartialEq for PowerProduct {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_exact(other) == Ordering::Equal
    }
}

impl Eq for PowerProduct {}

impl PartialOrd for PowerProduct {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PowerProduct {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_exact(other)
    }
}

impl fmt::Display for PowerProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.coeff))?;
        for (b, e) in &self.factors {
            write!(f, "*({})^({})", format_rational(b), format_rational(e))?;
        }
        Ok(())
    }
}

/// Compares `Σ lhs` with `Σ rhs`.
///
/// Exact when every term is rational or when both sides are single terms;
/// otherwise certified interval refinement up to `cap_bits`. An undecided
/// comparison at the cap comes back as inexact `Equal`.
pub fn cmp_power_sums(lhs: &[PowerProduct], rhs: &[PowerProduct], cap_bits: u32) -> Decided {
    let rational_sum = |terms: &[PowerProduct]| -> Option<Rational> {
        terms.iter().try_fold(Rational::zero(), |acc, t| t.to_rational().map(|v| acc + v))
    };
    if let (Some(l), Some(r)) = (rational_sum(lhs), rational_sum(rhs)) {
        return Decided::exact(l.cmp(&r));
    }
    let single = |terms: &[PowerProduct]| -> Option<PowerProduct> {
        let nonzero: Vec<_> = terms.iter().filter(|t| !t.is_zero()).collect();
        match nonzero.len() {
            0 => Some(PowerProduct::zero()),
            1 => Some(nonzero[0].clone()),
            _ => None,
        }
    };
    if let (Some(l), Some(r)) = (single(lhs), single(rhs)) {
        return Decided::exact(l.cmp_exact(&r));
    }
    let mut bits = 64;
    loop {
        let (mut llo, mut lhi) = (Rational::zero(), Rational::zero());
        for t in lhs {
            let (a, b) = t.interval(bits);
            llo += a;
            lhi += b;
        }
        let (mut rlo, mut rhi) = (Rational::zero(), Rational::zero());
        for t in rhs {
            let (a, b) = t.interval(bits);
            rlo += a;
            rhi += b;
        }
        if lhi < rlo {
            return Decided::exact(Ordering::Less);
        }
        if llo > rhi {
            return Decided::exact(Ordering::Greater);
        }
        if bits >= cap_bits {
            return Decided { ordering: Ordering::Equal, exact: false };
        }
        bits = (bits * 2).min(cap_bits);
    }
}

/// Smallest integer `n ≥ 0` with `n^exponent ≥ h`.
pub fn min_int_with_pow_at_least(h: &Rational, exponent: &Rational) -> Result<BigInt> {
    if !h.is_positive() {
        return Ok(BigInt::zero());
    }
    let (l, m) = exponent_parts(exponent)?;
    if l <= 0 {
        return Err(NumericsError::NegativeExponent(format_rational(exponent)));
    }
    // n ≈ h^(m/l): start from the floor of an enclosure and walk.
    let (lo, _) = root_interval(h, m, l as u32, 8);
    let mut n = floor(&lo).max(BigInt::zero());
    while n > BigInt::zero() && cmp_pow(&Rational::from_integer(n.clone() - 1), exponent, h)? != Ordering::Less {
        n -= 1;
    }
    while cmp_pow(&Rational::from_integer(n.clone()), exponent, h)? == Ordering::Less {
        n += 1;
    }
    Ok(n)
}

/// Largest integer `n ≥ 0` with `n^exponent ≤ h` (requires `h ≥ 0`).
pub fn max_int_with_pow_at_most(h: &Rational, exponent: &Rational) -> Result<BigInt> {
    if h.is_negative() {
        return Err(NumericsError::NegativeBase(format_rational(h)));
    }
    let (l, m) = exponent_parts(exponent)?;
    if l <= 0 {
        return Err(NumericsError::NegativeExponent(format_rational(exponent)));
    }
    let (lo, _) = root_interval(h, m, l as u32, 8);
    let mut n = floor(&lo).max(BigInt::zero());
    while cmp_pow(&Rational::from_integer(n.clone() + 1), exponent, h)? != Ordering::Greater {
        n += 1;
    }
    while n > BigInt::zero() && cmp_pow(&Rational::from_integer(n.clone()), exponent, h)? == Ordering::Greater {
        n -= 1;
    }
    Ok(n)
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod rational_vec_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(format_rational).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        strs.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect()
    }
}

/// Serde adapter for `Option<Rational>`; `None` is written as `null`.
pub mod opt_rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        r.as_ref().map(format_rational).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_rational(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

/// Serde adapter writing big integers as decimal strings.
pub mod bigint_serde {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.trim().parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for PowerProduct {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn cmp_pow_examples() {
        assert_eq!(cmp_pow(&int(4), &rat(1, 2), &int(2)).unwrap(), Ordering::Equal);
        assert_eq!(cmp_pow(&int(2), &rat(1, 2), &rat(3, 2)).unwrap(), Ordering::Less);
        assert_eq!(cmp_pow(&int(5), &rat(2, 3), &int(3)).unwrap(), Ordering::Less);
    }

    #[test]
    fn cmp_pow_rejects_negative_inputs() {
        assert!(matches!(cmp_pow(&int(-1), &rat(1, 2), &int(1)), Err(NumericsError::NegativeBase(_))));
        assert!(matches!(cmp_pow(&int(2), &rat(-1, 2), &int(1)), Err(NumericsError::NegativeExponent(_))));
    }

    #[test]
    fn cmp_radical_examples() {
        let e = RadicalExpr::new(int(1), int(1), int(4)).unwrap();
        assert_eq!(cmp_radical(&e, &int(3)), Ordering::Equal);
        let e = RadicalExpr::new(int(0), int(1), int(2)).unwrap();
        assert_eq!(cmp_radical(&e, &rat(3, 2)), Ordering::Less);
        let e = RadicalExpr::new(int(5), int(-1), int(2)).unwrap();
        assert_eq!(cmp_radical(&e, &int(3)), Ordering::Greater);
    }

    #[test]
    fn cmp_mixed_examples() {
        let cfg = RefineConfig::default();
        let two = RadicalExpr::new(int(2), int(0), int(7)).unwrap();
        for exp in [rat(0, 1), rat(1, 3), rat(5, 2)] {
            let d = cmp_mixed(&int(1), &exp, &two, &cfg).unwrap();
            assert_eq!(d, Decided { ordering: Ordering::Less, exact: true });
        }
        let e = RadicalExpr::new(int(1), int(1), int(1)).unwrap();
        assert_eq!(cmp_mixed(&int(4), &rat(1, 2), &e, &cfg).unwrap().ordering, Ordering::Equal);
        let e = RadicalExpr::new(int(1), int(1), rat(1, 2)).unwrap();
        let d = cmp_mixed(&int(3), &rat(1, 2), &e, &cfg).unwrap();
        assert_eq!(d, Decided { ordering: Ordering::Greater, exact: true });
    }

    #[test]
    fn cmp_mixed_interval_fallback_agrees() {
        // Force the refinement path with a zero symbolic degree budget.
        let cfg = RefineConfig { max_exact_degree: 0, precision_cap_bits: 1024 };
        let e = RadicalExpr::new(int(1), int(1), rat(1, 2)).unwrap();
        let d = cmp_mixed(&int(3), &rat(1, 2), &e, &cfg).unwrap();
        assert_eq!(d, Decided { ordering: Ordering::Greater, exact: true });
        // √3 − 1.707... ≈ 0.025, comfortably above 10⁻⁶.
        let gap = 3f64.sqrt() - (1.0 + 0.5f64.sqrt());
        assert!(gap > 1e-6);
        // An exact tie that intervals cannot separate is flagged.
        let e = RadicalExpr::new(int(0), int(1), int(2)).unwrap();
        let d = cmp_mixed(&int(2), &rat(1, 2), &e, &cfg).unwrap();
        assert_eq!(d, Decided { ordering: Ordering::Equal, exact: false });
        assert!(d.is_le());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(format_rational(&rat(-3, 7)), "-3/7");
        assert_eq!(format_rational(&int(4)), "4/1");
        assert_eq!(parse("4/1"), int(4));
        assert_eq!(parse("4"), int(4));
        assert_eq!(parse(" -6/14 "), rat(-3, 7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn weights_invariants() {
        assert!(Weights::from_lambda(rat(2, 3)).is_ok());
        assert!(Weights::from_lambda(rat(1, 2)).unwrap().is_degenerate());
        assert!(Weights::from_lambda(rat(1, 3)).is_err());
        assert!(Weights::new(rat(2, 3), rat(1, 2)).is_err());
        assert!(Weights::from_lambda(rat(3, 2)).is_err());
    }

    #[test]
    fn power_products() {
        // (1/32)^(3/4) = 2^(-15/4)
        let a = PowerProduct::power(rat(1, 32), rat(3, 4)).unwrap();
        let b = PowerProduct::power(int(2), rat(-15, 4)).unwrap();
        assert_eq!(a, b);
        let half = PowerProduct::power(int(4), rat(1, 2)).unwrap();
        assert_eq!(half.to_rational(), Some(int(2)));
        let r2 = PowerProduct::power(int(2), rat(1, 2)).unwrap();
        assert!(r2.cmp_rational(&rat(141, 100)) == Ordering::Greater);
        assert!(r2.cmp_rational(&rat(142, 100)) == Ordering::Less);
        assert_eq!(r2.mul(&r2).to_rational(), Some(int(2)));
    }

    #[test]
    fn power_sums() {
        let r2 = PowerProduct::power(int(2), rat(1, 2)).unwrap();
        let r3 = PowerProduct::power(int(3), rat(1, 2)).unwrap();
        // √2 + √3 ≈ 3.146 > π-ish 3.14
        let d = cmp_power_sums(&[r2.clone(), r3.clone()], &[PowerProduct::from_rational(rat(314, 100))], 512);
        assert_eq!(d, Decided { ordering: Ordering::Greater, exact: true });
        let d = cmp_power_sums(&[r2.clone(), r2.clone()], &[PowerProduct::power(int(8), rat(1, 2)).unwrap()], 256);
        assert_eq!(d, Decided { ordering: Ordering::Equal, exact: false });
    }

    #[test]
    fn integer_root_bounds() {
        assert_eq!(min_int_with_pow_at_least(&int(9), &rat(1, 1)).unwrap(), BigInt::from(9));
        assert_eq!(min_int_with_pow_at_least(&int(8), &rat(3, 2)).unwrap(), BigInt::from(4));
        assert_eq!(min_int_with_pow_at_least(&int(9), &rat(3, 2)).unwrap(), BigInt::from(5));
        assert_eq!(max_int_with_pow_at_most(&int(8), &rat(3, 2)).unwrap(), BigInt::from(4));
        assert_eq!(max_int_with_pow_at_most(&int(7), &rat(3, 2)).unwrap(), BigInt::from(3));
        assert_eq!(max_int_with_pow_at_most(&rat(1, 2), &rat(1, 2)).unwrap(), BigInt::from(0));
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (0i64..400, 1i64..60).prop_map(|(n, d)| rat(n, d))
    }

    fn exponent() -> impl Strategy<Value = Rational> {
        (0i64..12, 1i64..7).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn cmp_pow_matches_float(x in small_rational(), e in exponent(), y in small_rational()) {
            let fx = to_f64(&x).powf(to_f64(&e));
            let fy = to_f64(&y);
            let ord = cmp_pow(&x, &e, &y).unwrap();
            if (fx - fy).abs() > 1e-6 * (1.0 + fx.abs()) {
                prop_assert_eq!(ord, fx.partial_cmp(&fy).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn cmp_pow_antisymmetric(x in small_rational(), e in exponent(), y in small_rational()) {
            // x^e vs y and the same comparison as y^(1/e) vs x when e > 0
            prop_assume!(!e.is_zero());
            let forward = cmp_pow(&x, &e, &y).unwrap();
            let inv = e.recip();
            let back = cmp_pow(&y, &inv, &x).unwrap();
            prop_assert_eq!(forward, back.reverse());
        }

        #[test]
        fn cmp_radical_equality_characterisation(a in -20i64..20, b in -6i64..6, rho in 0i64..30, y in -40i64..40) {
            let e = RadicalExpr::new(int(a), int(b), int(rho)).unwrap();
            let y = int(y);
            let ord = cmp_radical(&e, &y);
            let d = &y - &e.a;
            let consistent_sign = !(d.is_positive() && b < 0) && !(d.is_negative() && b > 0);
            let eq = &d * &d == int(b * b * rho) && consistent_sign;
            prop_assert_eq!(ord == Ordering::Equal, eq);
            let f = e.to_f64() - to_f64(&y);
            if f.abs() > 1e-9 {
                prop_assert_eq!(ord, f.partial_cmp(&0.0).unwrap());
            }
        }

        #[test]
        fn comparisons_transitive(a in small_rational(), b in small_rational(), c in small_rational(), e in exponent()) {
            let pa = PowerProduct::power(a, e.clone()).unwrap();
            let pb = PowerProduct::power(b, e.clone()).unwrap();
            let pc = PowerProduct::power(c, e).unwrap();
            if pa <= pb && pb <= pc {
                prop_assert!(pa <= pc);
            }
            prop_assert_eq!(pa.cmp(&pb), pb.cmp(&pa).reverse());
        }

        #[test]
        fn cmp_mixed_matches_float(x in small_rational(), e in exponent(), a in -10i64..10, b in -5i64..5, rho in 0i64..20) {
            let r = RadicalExpr::new(int(a), int(b), int(rho)).unwrap();
            let d = cmp_mixed(&x, &e, &r, &RefineConfig::default()).unwrap();
            prop_assert!(d.exact);
            let fx = to_f64(&x).powf(to_f64(&e));
            let fr = r.to_f64();
            if (fx - fr).abs() > 1e-6 * (1.0 + fx.abs()) {
                prop_assert_eq!(d.ordering, fx.partial_cmp(&fr).unwrap());
            }
        }
    }
}
