//! Diagonal flows on unimodular 3-lattices, exact systoles along rational
//! time grids, and the finite-horizon correspondence between systoles and
//! weighted badness.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{
    ceil, floor, format_rational, int, pow_i, root_interval, to_f64, NumericsError, PowerProduct, Rational, Weights,
};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("λ = {lambda} is not an integer multiple of 1/{m}")]
    DenominatorMismatch { lambda: String, m: u32 },
    #[error("σ = {0} must lie in (0, 1]")]
    InvalidSigma(String),
    #[error("flow time needs m ≥ 1")]
    ZeroM,
    #[error("singular basis")]
    Singular,
    #[error("determinant {0} is not ±1")]
    NotUnimodular(String),
    #[error("Q must be at least 1")]
    EmptyRange,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

pub type Vec3 = [Rational; 3];
pub type IntVec3 = [BigInt; 3];

fn zero3() -> Vec3 {
    [Rational::zero(), Rational::zero(), Rational::zero()]
}

pub fn sup_norm(v: &Vec3) -> Rational {
    v.iter().map(|x| x.abs()).max().expect("three entries")
}

/// Row-major 3×3 rational matrix; the lattice is generated by its columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBasis {
    rows: [Vec3; 3],
}

impl LatticeBasis {
    pub fn new(rows: [Vec3; 3]) -> Self {
        Self { rows }
    }

    pub fn from_columns(cols: [Vec3; 3]) -> Self {
        let mut rows = [zero3(), zero3(), zero3()];
        for (j, c) in cols.iter().enumerate() {
            for i in 0..3 {
                rows[i][j] = c[i].clone();
            }
        }
        Self { rows }
    }

    pub fn identity() -> Self {
        Self::diagonal([Rational::one(), Rational::one(), Rational::one()])
    }

    pub fn diagonal(d: Vec3) -> Self {
        let mut rows = [zero3(), zero3(), zero3()];
        for (i, x) in d.into_iter().enumerate() {
            rows[i][i] = x;
        }
        Self { rows }
    }

    pub fn rows(&self) -> &[Vec3; 3] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    pub fn column(&self, j: usize) -> Vec3 {
        [self.rows[0][j].clone(), self.rows[1][j].clone(), self.rows[2][j].clone()]
    }

    pub fn columns(&self) -> [Vec3; 3] {
        [self.column(0), self.column(1), self.column(2)]
    }

    pub fn determinant(&self) -> Rational {
        let m = &self.rows;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs().is_one()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut rows = [zero3(), zero3(), zero3()];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).map(|k| &self.rows[i][k] * &other.rows[k][j]).sum();
            }
        }
        Self { rows }
    }

    pub fn apply(&self, n: &IntVec3) -> Vec3 {
        self.rows.clone().map(|row| (0..3).map(|k| &row[k] * Rational::from_integer(n[k].clone())).sum())
    }

    /// Adjugate over determinant.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.determinant();
        if det.is_zero() {
            return Err(DynamicsError::Singular);
        }
        let m = &self.rows;
        let c = |i: usize, j: usize| {
            let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
            let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
            &m[r0][c0] * &m[r1][c1] - &m[r0][c1] * &m[r1][c0]
        };
        let mut rows = [zero3(), zero3(), zero3()];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                // Cyclic cofactors already carry the sign.
                *x = c(j, i) / &det;
            }
        }
        Ok(Self { rows })
    }

    pub fn check_unimodular(&self) -> Result<()> {
        let d = self.determinant();
        if d.abs().is_one() {
            Ok(())
        } else {
            Err(DynamicsError::NotUnimodular(format_rational(&d)))
        }
    }
}

/// The time `t` with `e^{-t} = σ^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowTime {
    #[serde(with = "crate::numerics::rational_serde")]
    pub sigma: Rational,
    pub m: u32,
}

impl FlowTime {
    pub fn new(sigma: Rational, m: u32) -> Result<Self> {
        if !sigma.is_positive() || sigma > Rational::one() {
            return Err(DynamicsError::InvalidSigma(format_rational(&sigma)));
        }
        if m == 0 {
            return Err(DynamicsError::ZeroM);
        }
        Ok(Self { sigma, m })
    }

    /// `e^{-t}`.
    pub fn decay(&self) -> Rational {
        pow_i(&self.sigma, self.m as i64)
    }
}

/// `λ·m` as an integer.
fn lambda_numerator(w: &Weights, m: u32) -> Result<i64> {
    let l = w.lambda() * int(m);
    if !l.is_integer() {
        return Err(DynamicsError::DenominatorMismatch { lambda: format_rational(w.lambda()), m });
    }
    Ok(l.to_integer().to_i64().expect("λ ≤ 1"))
}

/// The diagonal entries `(σ^{-l}, σ^{-(m-l)}, σ^m)` of `g_t`.
pub fn flow_diagonal(w: &Weights, ft: &FlowTime) -> Result<Vec3> {
    let l = lambda_numerator(w, ft.m)?;
    let m = ft.m as i64;
    Ok([pow_i(&ft.sigma, -l), pow_i(&ft.sigma, -(m - l)), pow_i(&ft.sigma, m)])
}

/// `g_t · basis`.
pub fn flow_apply(w: &Weights, ft: &FlowTime, basis: &LatticeBasis) -> Result<LatticeBasis> {
    Ok(LatticeBasis::diagonal(flow_diagonal(w, ft)?).mul(basis))
}

/// `[[1, z, x], [0, 1, y], [0, 0, 1]]`.
pub fn unipotent(x: &Rational, y: &Rational, z: &Rational) -> LatticeBasis {
    let (o, l) = (Rational::zero(), Rational::one());
    LatticeBasis::new([[l.clone(), z.clone(), x.clone()], [o.clone(), l.clone(), y.clone()], [o.clone(), o, l]])
}

/// `[[1, -z, zy - x], [0, 1, -y], [0, 0, 1]]`.
pub fn unipotent_inverse(x: &Rational, y: &Rational, z: &Rational) -> LatticeBasis {
    let (o, l) = (Rational::zero(), Rational::one());
    LatticeBasis::new([[l.clone(), -z, z * y - x], [o.clone(), l.clone(), -y], [o.clone(), o, l]])
}

/// `g_t u_{x,y,z}^{-1}`.
pub fn orbit_basis(x: &Rational, y: &Rational, z: &Rational, w: &Weights, ft: &FlowTime) -> Result<LatticeBasis> {
    flow_apply(w, ft, &unipotent_inverse(x, y, z))
}

fn dot(a: &Vec3, b: &Vec3) -> Rational {
    (0..3).map(|i| &a[i] * &b[i]).sum()
}

fn round_half_up(r: &Rational) -> BigInt {
    floor(&(r + Rational::new(BigInt::one(), BigInt::from(2))))
}

/// Exact LLL (δ = 3/4) on the columns. Returns the reduced basis and the
/// integer matrix `T` with `reduced = basis · T`.
pub fn lll_reduce(basis: &LatticeBasis) -> (LatticeBasis, [IntVec3; 3]) {
    let mut b = basis.columns();
    let mut t: [IntVec3; 3] = std::array::from_fn(|j| std::array::from_fn(|i| BigInt::from((i == j) as i32)));
    let delta = Rational::new(BigInt::from(3), BigInt::from(4));
    let gram_schmidt = |b: &[Vec3; 3]| {
        let mut star: Vec<Vec3> = Vec::with_capacity(3);
        let mut mu = [[Rational::zero(), Rational::zero(), Rational::zero()], zero3(), zero3()];
        for i in 0..3 {
            let mut v = b[i].clone();
            for j in 0..i {
                let nj = dot(&star[j], &star[j]);
                mu[i][j] = if nj.is_zero() { Rational::zero() } else { dot(&b[i], &star[j]) / nj };
                for c in 0..3 {
                    v[c] -= &mu[i][j] * &star[j][c];
                }
            }
            star.push(v);
        }
        (star, mu)
    };
    let mut k = 1;
    while k < 3 {
        for j in (0..k).rev() {
            let (_, mu) = gram_schmidt(&b);
            let r = round_half_up(&mu[k][j]);
            if !r.is_zero() {
                let rr = Rational::from_integer(r.clone());
                let (bj, tj) = (b[j].clone(), t[j].clone());
                for c in 0..3 {
                    b[k][c] -= &rr * &bj[c];
                    t[k][c] -= &r * &tj[c];
                }
            }
        }
        let (star, mu) = gram_schmidt(&b);
        let lhs = dot(&star[k], &star[k]);
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * dot(&star[k - 1], &star[k - 1]);
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            t.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    // t holds columns of T; transpose into rows.
    let rows = std::array::from_fn(|i| std::array::from_fn(|j| t[j][i].clone()));
    (LatticeBasis::from_columns(b), rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Systole {
    #[serde(with = "crate::numerics::rational_serde")]
    pub value: Rational,
    /// Canonical minimizer in the coordinates of the input basis.
    #[serde(serialize_with = "ser_intvec")]
    pub argmin: IntVec3,
}

fn ser_intvec<S: serde::Serializer>(v: &IntVec3, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(3))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

/// Flips `n` so its last nonzero entry is positive.
pub fn sign_normalize(mut n: IntVec3) -> IntVec3 {
    if n.iter().rev().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in n.iter_mut() {
            *x = -&*x;
        }
    }
    n
}

/// Ordering key among sign-normalized minimizers.
pub fn canonical_key(n: &IntVec3) -> (BigInt, BigInt, BigInt, BigInt, BigInt) {
    (n[0].abs(), n[1].abs(), n[2].abs(), n[0].clone(), n[1].clone())
}

/// Integer box `|n_i| ≤ u · Σ_j |inv_ij|` containing every `n` with `‖basis·n‖ ≤ u`.
pub fn coordinate_bounds(inv: &LatticeBasis, u: &Rational) -> [BigInt; 3] {
    std::array::from_fn(|i| floor(&(u * inv.rows()[i].iter().map(|x| x.abs()).sum::<Rational>())))
}

/// Exhaustive search of the box derived from the best column image.
/// Returns every minimizer.
fn box_minimum(basis: &LatticeBasis) -> Result<(Rational, Vec<IntVec3>)> {
    let inv = basis.inverse()?;
    let u = basis.columns().iter().map(sup_norm).min().expect("three columns");
    let bounds = coordinate_bounds(&inv, &u);
    let mut best = u;
    let mut argmins = Vec::new();
    let range = |b: &BigInt| {
        let b = b.to_i64().expect("enumeration box fits i64");
        -b..=b
    };
    for a in range(&bounds[0]) {
        for b in range(&bounds[1]) {
            for c in range(&bounds[2]) {
                if a == 0 && b == 0 && c == 0 {
                    continue;
                }
                let n = [BigInt::from(a), BigInt::from(b), BigInt::from(c)];
                let v = sup_norm(&basis.apply(&n));
                match v.cmp(&best) {
                    Ordering::Less => {
                        best = v;
                        argmins = vec![n];
                    }
                    Ordering::Equal => argmins.push(n),
                    Ordering::Greater => {}
                }
            }
        }
    }
    Ok((best, argmins))
}

fn canonical(argmins: impl IntoIterator<Item = IntVec3>) -> IntVec3 {
    argmins
        .into_iter()
        .map(sign_normalize)
        .min_by_key(canonical_key)
        .expect("the best column is always a minimizer candidate")
}

/// Minimum of `‖basis·n‖_∞` over nonzero integer `n`, searching the box of the
/// unreduced basis directly.
pub fn systole_unreduced(basis: &LatticeBasis) -> Result<Systole> {
    let (value, argmins) = box_minimum(basis)?;
    Ok(Systole { value, argmin: canonical(argmins) })
}

/// Minimum of `‖basis·n‖_∞` over nonzero integer `n`. The basis is LLL-reduced
/// first so the search box stays small; minimizers are mapped back.
pub fn systole(basis: &LatticeBasis) -> Result<Systole> {
    let (reduced, t) = lll_reduce(basis);
    let (value, argmins) = box_minimum(&reduced)?;
    let back = |n: IntVec3| -> IntVec3 { std::array::from_fn(|i| (0..3).map(|k| &t[i][k] * &n[k]).sum()) };
    Ok(Systole { value, argmin: canonical(argmins.into_iter().map(back)) })
}

/// `ratio^j` for `j = 0, 1, …` until `ratio^{jm} ≤ floor`.
pub fn geometric_sigma_grid(ratio: &Rational, m: u32, floor_value: &Rational) -> Result<Vec<Rational>> {
    if !ratio.is_positive() || ratio >= &Rational::one() {
        return Err(DynamicsError::InvalidSigma(format_rational(ratio)));
    }
    let mut out = vec![Rational::one()];
    let mut s = Rational::one();
    while &pow_i(&s, m as i64) > floor_value {
        s *= ratio;
        out.push(s.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfileRow {
    pub t_index: usize,
    #[serde(with = "crate::numerics::rational_serde")]
    pub sigma: Rational,
    pub m: u32,
    pub systole: Systole,
}

/// Systole of `g_t u_{x,y,z}^{-1} ℤ³` at each `σ` in the grid, with `m` the
/// denominator of the weights.
pub fn trajectory_profile(
    x: &Rational,
    y: &Rational,
    z: &Rational,
    w: &Weights,
    sigma_grid: &[Rational],
) -> Result<Vec<ProfileRow>> {
    let m = w.denominator();
    sigma_grid
        .iter()
        .enumerate()
        .map(|(t_index, sigma)| {
            let ft = FlowTime::new(sigma.clone(), m)?;
            let basis = orbit_basis(x, y, z, w, &ft)?;
            Ok(ProfileRow { t_index, sigma: sigma.clone(), m, systole: systole(&basis)? })
        })
        .collect()
}

/// CSV with exact columns, plus `systole_approx` when `float` is set.
pub fn profile_csv(rows: &[ProfileRow], float: bool) -> String {
    let mut out = String::from("t_index,sigma,m,systole,argmin_p,argmin_r,argmin_q");
    if float {
        out.push_str(",systole_approx");
    }
    out.push('\n');
    for r in rows {
        let [p, q_r, q] = &r.systole.argmin;
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            r.t_index,
            format_rational(&r.sigma),
            r.m,
            format_rational(&r.systole.value),
            p,
            q_r,
            q
        );
        if float {
            let _ = write!(out, ",{:e}", to_f64(&r.systole.value));
        }
        out.push('\n');
    }
    out
}

/// `ε = 2^{-λ} δ^{1+λ}`.
pub fn dani_convert_delta_to_eps(delta: &Rational, w: &Weights) -> Result<PowerProduct> {
    let half = PowerProduct::power(Rational::new(BigInt::one(), BigInt::from(2)), w.lambda().clone())?;
    Ok(half.mul(&PowerProduct::power(delta.clone(), w.lambda() + Rational::one())?))
}

/// `δ = min{ε^{1/(1+λ)}, 1}`.
pub fn dani_convert_eps_to_delta(eps: &PowerProduct, w: &Weights) -> Result<PowerProduct> {
    eps_to_delta_with(eps, w.lambda())
}

/// `δ = min{ε^{1/(1+μ)}, 1}`, the conversion that also covers the second
/// coordinate when `λ > μ`.
pub fn dani_convert_eps_to_delta_mu(eps: &PowerProduct, w: &Weights) -> Result<PowerProduct> {
    eps_to_delta_with(eps, w.mu())
}

/// `min{ε^{1/(1+e)}, 1}`.
pub fn eps_to_delta_with(eps: &PowerProduct, e: &Rational) -> Result<PowerProduct> {
    if eps.cmp_rational(&Rational::one()) != Ordering::Less {
        return Ok(PowerProduct::one());
    }
    Ok(eps.powr(&(Rational::one() / (e + Rational::one())))?)
}

#[derive(Debug, Clone)]
pub struct Badness {
    pub value: PowerProduct,
    /// `(p, r, q)` attaining the value; least `q` first.
    pub argmin: IntVec3,
}

fn max_pp(a: PowerProduct, b: PowerProduct) -> PowerProduct {
    if a.cmp_exact(&b) == Ordering::Less {
        b
    } else {
        a
    }
}

/// `max{q^λ|qx − p − z(qy − r)|, q^μ|qy − r|}`.
pub fn badness_of(x: &Rational, y: &Rational, z: &Rational, w: &Weights, v: &IntVec3) -> Result<PowerProduct> {
    let [p, r, q] = v;
    let (p, r, qr) = (Rational::from_integer(p.clone()), Rational::from_integer(r.clone()), Rational::from_integer(q.clone()));
    let yy = &qr * y - r;
    let xx = &qr * x - p - z * &yy;
    let a = PowerProduct::power(qr.clone(), w.lambda().clone())?.mul_rational(&xx.abs());
    let b = PowerProduct::power(qr, w.mu().clone())?.mul_rational(&yy.abs());
    Ok(max_pp(a, b))
}

/// Minimum over `(p, r)` at a fixed `q ≥ 1`. Only `r` with
/// `|qy − r| ≤ q^{λ−μ}/2` can beat the nearest-integer pair, and for each `r`
/// the nearest `p` is optimal.
pub fn badness_at(x: &Rational, y: &Rational, z: &Rational, w: &Weights, q: u64) -> Result<Badness> {
    if q == 0 {
        return Err(DynamicsError::EmptyRange);
    }
    let qr = int(q);
    let (l, m) = crate::numerics::exponent_parts(&(w.lambda() - w.mu()))?;
    let (_, hi) = root_interval(&qr, l as u32, m, 8);
    let half = &hi / int(2);
    let qy = &qr * y;
    let mut best: Option<Badness> = None;
    let mut r = ceil(&(&qy - &half));
    let r_hi = floor(&(&qy + &half));
    while r <= r_hi {
        let yy = &qy - Rational::from_integer(r.clone());
        let c = &qr * x - z * &yy;
        let p = round_half_up(&c);
        let v = [p, r.clone(), BigInt::from(q)];
        let value = badness_of(x, y, z, w, &v)?;
        if best.as_ref().is_none_or(|b| value.cmp_exact(&b.value) == Ordering::Less) {
            best = Some(Badness { value, argmin: v });
        }
        r += 1;
    }
    Ok(best.expect("the nearest r lies in the window"))
}

/// Minimum of the weighted badness over `1 ≤ q ≤ q_max`.
pub fn badness_constant(x: &Rational, y: &Rational, z: &Rational, w: &Weights, q_max: u64) -> Result<Badness> {
    let mut best: Option<Badness> = None;
    for q in 1..=q_max {
        let b = badness_at(x, y, z, w, q)?;
        if best.as_ref().is_none_or(|x| b.value.cmp_exact(&x.value) == Ordering::Less) {
            best = Some(b);
        }
        if best.as_ref().is_some_and(|b| b.value.is_zero()) {
            break;
        }
    }
    best.ok_or(DynamicsError::EmptyRange)
}

/// Minimum of `‖g_t u^{-1} v‖_∞` over `v` with `1 ≤ q ≤ q_max`, capped at 1.
/// Vectors with `q = 0` have norm at least 1, so the cap makes this the
/// truncated systole whenever it is below 1.
pub fn truncated_orbit_minimum(
    x: &Rational,
    y: &Rational,
    z: &Rational,
    w: &Weights,
    ft: &FlowTime,
    q_max: u64,
) -> Result<(Rational, Option<IntVec3>)> {
    let [a, b, c] = flow_diagonal(w, ft)?;
    let mut best = Rational::one();
    let mut arg = None;
    for q in 1..=q_max {
        let qr = int(q);
        let last = &c * &qr;
        if last >= best {
            break;
        }
        let rad = &best / &b;
        let qy = &qr * y;
        let mut r = ceil(&(&qy - &rad));
        let r_hi = floor(&(&qy + &rad));
        while r <= r_hi {
            let yy = Rational::from_integer(r.clone()) - &qy;
            let center = &qr * x + z * &yy;
            let p = round_half_up(&center);
            let xx = Rational::from_integer(p.clone()) - &center;
            let v = (&a * xx.abs()).max(&b * yy.abs()).max(last.clone());
            if v < best {
                best = v;
                arg = Some([p, r.clone(), BigInt::from(q)]);
            }
            r += 1;
        }
    }
    Ok((best, arg))
}

/// Finite-horizon check of both implications between a lower bound on the
/// systole along the grid and a lower bound on the weighted badness.
///
/// Forward: with `δ̂` the least systole over the grid, every `q ≤ Q` for which
/// some grid time has `s = e^{-t}q < δ̂` must have badness at least `s^λ δ̂`;
/// when `s ≥ δ̂/2` for those `q` this gives `ε̂ ≥ 2^{-λ}δ̂^{1+λ}` over them.
///
/// Backward: with `ε̂` the least badness over `q ≤ Q`, every vector with
/// `q ≤ Q` must have norm at least `δ(ε̂)` at every grid time, for both
/// conversions `δ = min{ε̂^{1/(1+λ)}, 1}` and `δ = min{ε̂^{1/(1+μ)}, 1}`.
#[derive(Debug, Clone)]
pub struct DaniReport {
    pub grid_len: usize,
    pub q_max: u64,
    pub delta_hat: Rational,
    pub delta_hat_index: usize,
    pub eps_hat: Badness,
    /// `q` with a grid time below `δ̂`.
    pub forward_claims: usize,
    /// Those among them whose best grid time has `s ≥ δ̂/2`.
    pub forward_covered: usize,
    pub forward_violations: Vec<u64>,
    /// Least badness over covered `q` against `2^{-λ}δ̂^{1+λ}`; `None` without covered `q`.
    pub forward_constant_holds: Option<bool>,
    pub backward_min: Rational,
    pub backward_min_index: usize,
    pub backward_delta_lambda: PowerProduct,
    pub backward_delta_mu: PowerProduct,
    pub backward_lambda_holds: bool,
    pub backward_mu_holds: bool,
}

impl DaniReport {
    /// Forward implication together with the backward one using the `μ` exponent.
    pub fn corrected_holds(&self) -> bool {
        self.forward_violations.is_empty() && self.forward_constant_holds != Some(false) && self.backward_mu_holds
    }

    /// Forward implication together with the backward one using the `λ` exponent.
    pub fn stated_holds(&self) -> bool {
        self.forward_violations.is_empty() && self.forward_constant_holds != Some(false) && self.backward_lambda_holds
    }

    pub fn to_kv(&self) -> String {
        let [p, r, q] = &self.eps_hat.argmin;
        let opt = |b: Option<bool>| b.map_or("none".to_string(), |b| b.to_string());
        let mut out = String::new();
        let lines = [
            ("grid_len", self.grid_len.to_string()),
            ("q_max", self.q_max.to_string()),
            ("delta_hat", format_rational(&self.delta_hat)),
            ("delta_hat_index", self.delta_hat_index.to_string()),
            ("eps_hat", self.eps_hat.value.to_string()),
            ("eps_hat_approx", format!("{:e}", self.eps_hat.value.to_f64())),
            ("eps_argmin", format!("{p} {r} {q}")),
            ("forward_claims", self.forward_claims.to_string()),
            ("forward_covered", self.forward_covered.to_string()),
            ("forward_violations", self.forward_violations.len().to_string()),
            ("forward_constant_holds", opt(self.forward_constant_holds)),
            ("backward_min", format_rational(&self.backward_min)),
            ("backward_min_index", self.backward_min_index.to_string()),
            ("backward_delta_lambda", self.backward_delta_lambda.to_string()),
            ("backward_delta_mu", self.backward_delta_mu.to_string()),
            ("backward_lambda_holds", self.backward_lambda_holds.to_string()),
            ("backward_mu_holds", self.backward_mu_holds.to_string()),
            ("stated_holds", self.stated_holds().to_string()),
            ("corrected_holds", self.corrected_holds().to_string()),
        ];
        for (k, v) in lines {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

pub fn dani_check(
    x: &Rational,
    y: &Rational,
    z: &Rational,
    w: &Weights,
    q_max: u64,
    sigma_grid: &[Rational],
) -> Result<DaniReport> {
    if q_max == 0 || sigma_grid.is_empty() {
        return Err(DynamicsError::EmptyRange);
    }
    let m = w.denominator();
    let times: Vec<FlowTime> = sigma_grid.iter().map(|s| FlowTime::new(s.clone(), m)).collect::<Result<_>>()?;
    let profile = trajectory_profile(x, y, z, w, sigma_grid)?;
    let (delta_hat_index, delta_hat) = profile
        .iter()
        .map(|r| (r.t_index, r.systole.value.clone()))
        .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("nonempty grid");

    let mut decays: Vec<Rational> = times.iter().map(|t| t.decay()).collect();
    decays.sort_by(|a, b| b.cmp(a));
    let half_delta = &delta_hat / int(2);
    let mut per_q = Vec::with_capacity(q_max as usize);
    let mut forward_claims = 0;
    let mut forward_covered = 0;
    let mut forward_violations = Vec::new();
    let mut covered_min: Option<PowerProduct> = None;
    for q in 1..=q_max {
        let b = badness_at(x, y, z, w, q)?;
        let qr = int(q);
        // Largest grid value of e^{-t}q strictly below δ̂.
        if let Some(s) = decays.iter().map(|d| d * &qr).find(|s| s < &delta_hat) {
            forward_claims += 1;
            let bound = PowerProduct::power(s.clone(), w.lambda().clone())?.mul_rational(&delta_hat);
            if b.value.cmp_exact(&bound) == Ordering::Less {
                forward_violations.push(q);
            }
            if s >= half_delta {
                forward_covered += 1;
                if covered_min.as_ref().is_none_or(|c| b.value.cmp_exact(c) == Ordering::Less) {
                    covered_min = Some(b.value.clone());
                }
            }
        }
        per_q.push(b);
    }
    let forward_constant_holds = match &covered_min {
        Some(c) => Some(c.cmp_exact(&dani_convert_delta_to_eps(&delta_hat, w)?) != Ordering::Less),
        None => None,
    };
    let eps_hat = per_q
        .into_iter()
        .reduce(|a, b| if b.value.cmp_exact(&a.value) == Ordering::Less { b } else { a })
        .expect("q_max ≥ 1");

    let mut backward_min = Rational::one();
    let mut backward_min_index = 0;
    for (i, ft) in times.iter().enumerate() {
        let (v, _) = truncated_orbit_minimum(x, y, z, w, ft, q_max)?;
        if v < backward_min {
            backward_min = v;
            backward_min_index = i;
        }
    }
    let backward_delta_lambda = dani_convert_eps_to_delta(&eps_hat.value, w)?;
    let backward_delta_mu = dani_convert_eps_to_delta_mu(&eps_hat.value, w)?;
    let backward_lambda_holds = backward_delta_lambda.cmp_rational(&backward_min) != Ordering::Greater;
    let backward_mu_holds = backward_delta_mu.cmp_rational(&backward_min) != Ordering::Greater;

    Ok(DaniReport {
        grid_len: sigma_grid.len(),
        q_max,
        delta_hat,
        delta_hat_index,
        eps_hat,
        forward_claims,
        forward_covered,
        forward_violations,
        forward_constant_holds,
        backward_min,
        backward_min_index,
        backward_delta_lambda,
        backward_delta_mu,
        backward_lambda_holds,
        backward_mu_holds,
    })
}

/// `gcd` of the entries, for checking primitive minimizers.
pub fn content(n: &IntVec3) -> BigInt {
    n.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    fn w(l: i64, m: i64) -> Weights {
        Weights::from_lambda(rat(l, m)).unwrap()
    }

    #[test]
    fn flow_examples() {
        let ft = FlowTime::new(int(1), 2).unwrap();
        let b = unipotent(&rat(1, 3), &rat(2, 5), &rat(-1, 7));
        assert_eq!(flow_apply(&w(1, 2), &ft, &b).unwrap(), b);
        let ft = FlowTime::new(rat(1, 2), 2).unwrap();
        let g = flow_apply(&w(1, 2), &ft, &LatticeBasis::identity()).unwrap();
        assert_eq!(g, LatticeBasis::diagonal([int(2), int(2), rat(1, 4)]));
        assert!(matches!(flow_apply(&w(2, 3), &ft, &b), Err(DynamicsError::DenominatorMismatch { .. })));
        // A multiple of the denominator is accepted.
        assert!(flow_apply(&w(1, 2), &FlowTime::new(rat(1, 2), 4).unwrap(), &b).unwrap().is_unimodular());
    }

    #[test]
    fn unipotent_examples() {
        assert_eq!(unipotent(&int(0), &int(0), &int(0)), LatticeBasis::identity());
        let (x, y, z) = (rat(3, 7), rat(-2, 9), rat(5, 4));
        assert_eq!(unipotent(&x, &y, &z).mul(&unipotent_inverse(&x, &y, &z)), LatticeBasis::identity());
        assert_eq!(unipotent(&x, &y, &z).inverse().unwrap(), unipotent_inverse(&x, &y, &z));
        // (p − qx − z(r − qy), r − qy, q)
        let n = [BigInt::from(2), BigInt::from(-1), BigInt::from(5)];
        let got = unipotent_inverse(&x, &y, &z).apply(&n);
        let (p, r, q) = (int(2), int(-1), int(5));
        assert_eq!(got, [&p - &q * &x - &z * (&r - &q * &y), &r - &q * &y, q]);
    }

    #[test]
    fn systole_examples() {
        let s = systole(&LatticeBasis::identity()).unwrap();
        assert_eq!(s.value, int(1));
        assert_eq!(s.argmin, [BigInt::zero(), BigInt::zero(), BigInt::one()]);
        let s = systole(&LatticeBasis::diagonal([int(2), int(2), rat(1, 4)])).unwrap();
        assert_eq!(s.value, rat(1, 4));
        assert_eq!(s.argmin, [BigInt::zero(), BigInt::zero(), BigInt::one()]);
    }

    #[test]
    fn lll_transform_is_consistent() {
        let ft = FlowTime::new(rat(2, 3), 3).unwrap();
        let b = orbit_basis(&rat(1, 3), &rat(2, 7), &rat(-3, 2), &w(2, 3), &ft).unwrap();
        let (reduced, t) = lll_reduce(&b);
        let t = LatticeBasis::new(t.map(|row| row.map(Rational::from_integer)));
        assert_eq!(b.mul(&t), reduced);
        assert!(t.is_unimodular());
        assert_eq!(systole(&b).unwrap(), systole_unreduced(&b).unwrap());
    }

    #[test]
    fn conversion_examples() {
        let e = dani_convert_delta_to_eps(&int(1), &w(1, 2)).unwrap();
        assert_eq!(e, PowerProduct::power(int(2), rat(-1, 2)).unwrap());
        assert_eq!(dani_convert_eps_to_delta(&PowerProduct::one(), &w(2, 3)).unwrap(), PowerProduct::one());
        // λ = 1/3 is below μ, so go through the exponent form.
        let d = eps_to_delta_with(&PowerProduct::from_rational(rat(1, 32)), &rat(1, 3)).unwrap();
        assert_eq!(d, PowerProduct::power(int(2), rat(-15, 4)).unwrap());
        assert_eq!(d, PowerProduct::power(rat(1, 32), rat(3, 4)).unwrap());
    }

    #[test]
    fn badness_examples() {
        let b = badness_constant(&rat(1, 3), &rat(1, 2), &int(0), &w(2, 3), 6).unwrap();
        assert!(b.value.is_zero());
        assert_eq!(b.argmin[2], BigInt::from(6));
        let (x, y, z) = (rat(2, 7), rat(5, 11), rat(3, 5));
        let b = badness_constant(&x, &y, &z, &w(2, 3), 1).unwrap();
        // Nearest pair r = 0 (|y| < 1/2), p = 0 (|x − zy| < 1/2).
        let direct = (&x - &z * &y).abs().max(y.clone());
        assert_eq!(b.value.to_rational(), Some(direct));
    }
}
