//! Balls, affine hyperplanes and slab neighbourhoods with exact predicates.
//!
//! Distances are never formed; every predicate squares both sides of a
//! nonnegative inequality and compares rationals.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{format_rational, rational_serde, rational_vec_serde, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("ball radius must be positive, got {0}")]
    NonPositiveRadius(String),
    #[error("hyperplane normal is zero")]
    ZeroNormal,
    #[error("slab width must be nonnegative, got {0}")]
    NegativeWidth(String),
    #[error("points need at least one coordinate")]
    EmptyPoint,
}

pub type Result<T> = std::result::Result<T, GeometryError>;

fn same_dim(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { left, right })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(#[serde(with = "rational_vec_serde")] pub Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        if coords.is_empty() {
            return Err(GeometryError::EmptyPoint);
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![Rational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn sub(&self, other: &Point) -> Result<Vec<Rational>> {
        same_dim(self.dim(), other.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self + t·dir`.
    pub fn offset(&self, dir: &[Rational], t: &Rational) -> Result<Point> {
        same_dim(self.dim(), dir.len())?;
        Ok(Point(self.0.iter().zip(dir).map(|(a, d)| a + d * t).collect()))
    }

    pub fn dist_sq(&self, other: &Point) -> Result<Rational> {
        Ok(norm_sq(&self.sub(other)?))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn norm_sq(v: &[Rational]) -> Rational {
    dot(v, v)
}

/// Closed ball with positive radius.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BallRepr", into = "BallRepr")]
pub struct Ball {
    center: Point,
    radius: Rational,
}

#[derive(Serialize, Deserialize)]
struct BallRepr {
    center: Point,
    #[serde(with = "rational_serde")]
    radius: Rational,
}

impl TryFrom<BallRepr> for Ball {
    type Error = GeometryError;
    fn try_from(r: BallRepr) -> Result<Self> {
        Ball::new(r.center, r.radius)
    }
}

impl From<Ball> for BallRepr {
    fn from(b: Ball) -> Self {
        BallRepr { center: b.center, radius: b.radius }
    }
}

impl Ball {
    pub fn new(center: Point, radius: Rational) -> Result<Self> {
        if !radius.is_positive() {
            return Err(GeometryError::NonPositiveRadius(format_rational(&radius)));
        }
        if center.dim() == 0 {
            return Err(GeometryError::EmptyPoint);
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> &Rational {
        &self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Third coordinate of the center. Panics for balls of dimension < 3.
    pub fn z(&self) -> &Rational {
        &self.center.0[2]
    }

    pub fn contains_point(&self, x: &Point) -> Result<bool> {
        Ok(x.dist_sq(&self.center)? <= &self.radius * &self.radius)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B({}, {})", self.center, format_rational(&self.radius))
    }
}

/// `{x : normal·x + offset = 0}`, scaled so the first nonzero normal entry is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "HyperplaneRepr", into = "HyperplaneRepr")]
pub struct Hyperplane {
    normal: Vec<Rational>,
    offset: Rational,
}

#[derive(Serialize, Deserialize)]
struct HyperplaneRepr {
    #[serde(with = "rational_vec_serde")]
    normal: Vec<Rational>,
    #[serde(with = "rational_serde")]
    offset: Rational,
}

impl TryFrom<HyperplaneRepr> for Hyperplane {
    type Error = GeometryError;
    fn try_from(r: HyperplaneRepr) -> Result<Self> {
        Hyperplane::new(r.normal, r.offset)
    }
}

impl From<Hyperplane> for HyperplaneRepr {
    fn from(h: Hyperplane) -> Self {
        HyperplaneRepr { normal: h.normal, offset: h.offset }
    }
}

impl Hyperplane {
    pub fn new(normal: Vec<Rational>, offset: Rational) -> Result<Self> {
        let lead = normal.iter().find(|c| !c.is_zero()).cloned().ok_or(GeometryError::ZeroNormal)?;
        let normal = normal.iter().map(|c| c / &lead).collect();
        Ok(Self { normal, offset: offset / lead })
    }

    /// The plane `a·x + b·y + c = 0` in `(x, y, z)`-space.
    pub fn vertical(a: Rational, b: Rational, c: Rational) -> Result<Self> {
        Self::new(vec![a, b, Rational::zero()], c)
    }

    /// `x_axis = 0` in dimension `dim`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        let mut normal = vec![Rational::zero(); dim];
        normal[axis] = Rational::one();
        Self { normal, offset: Rational::zero() }
    }

    pub fn normal(&self) -> &[Rational] {
        &self.normal
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn eval(&self, x: &Point) -> Result<Rational> {
        same_dim(self.dim(), x.dim())?;
        Ok(dot(&self.normal, x.coords()) + &self.offset)
    }

    /// True when the last coordinate does not enter the equation.
    pub fn is_vertical(&self) -> bool {
        self.normal.last().is_some_and(|c| c.is_zero())
    }
}

impl fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.normal.iter().map(format_rational).collect();
        write!(f, "[{}]·x + {} = 0", parts.join(", "), format_rational(&self.offset))
    }
}

/// Open neighbourhood `{x : dist(x, plane) < width}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SlabRepr", into = "SlabRepr")]
pub struct Slab {
    plane: Hyperplane,
    width: Rational,
}

#[derive(Serialize, Deserialize)]
struct SlabRepr {
    plane: Hyperplane,
    #[serde(with = "rational_serde")]
    width: Rational,
}

impl TryFrom<SlabRepr> for Slab {
    type Error = GeometryError;
    fn try_from(r: SlabRepr) -> Result<Self> {
        Slab::new(r.plane, r.width)
    }
}

impl From<Slab> for SlabRepr {
    fn from(s: Slab) -> Self {
        SlabRepr { plane: s.plane, width: s.width }
    }
}

impl Slab {
    pub fn new(plane: Hyperplane, width: Rational) -> Result<Self> {
        if width.is_negative() {
            return Err(GeometryError::NegativeWidth(format_rational(&width)));
        }
        Ok(Self { plane, width })
    }

    pub fn plane(&self) -> &Hyperplane {
        &self.plane
    }

    pub fn width(&self) -> &Rational {
        &self.width
    }
}

/// `dist(centers) + inner.radius ≤ outer.radius`.
pub fn ball_contains_ball(outer: &Ball, inner: &Ball) -> Result<bool> {
    same_dim(outer.dim(), inner.dim())?;
    let slack = outer.radius() - inner.radius();
    if slack.is_negative() {
        return Ok(false);
    }
    Ok(outer.center.dist_sq(&inner.center)? <= &slack * &slack)
}

/// Every point of `b` is at distance `≥ s.width` from the plane.
pub fn ball_avoids_slab(b: &Ball, s: &Slab) -> Result<bool> {
    let v = s.plane.eval(b.center())?;
    let reach = b.radius() + s.width();
    Ok(&v * &v >= &reach * &reach * norm_sq(s.plane.normal()))
}

/// `dist(x, plane) < width` (strict).
pub fn point_in_slab(x: &Point, s: &Slab) -> Result<bool> {
    let v = s.plane.eval(x)?;
    Ok(&v * &v < s.width() * s.width() * norm_sq(s.plane.normal()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};
    use proptest::prelude::*;

    fn pt(c: &[Rational]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn ball(c: &[Rational], r: Rational) -> Ball {
        Ball::new(pt(c), r).unwrap()
    }

    fn x1_slab(width: Rational) -> Slab {
        Slab::new(Hyperplane::coordinate(3, 0), width).unwrap()
    }

    #[test]
    fn containment_examples() {
        let z = int(0);
        let unit = ball(&[z.clone(), z.clone(), z.clone()], int(1));
        assert!(ball_contains_ball(&unit, &unit).unwrap());
        let tangent = ball(&[rat(1, 2), z.clone(), z.clone()], rat(1, 2));
        assert!(ball_contains_ball(&unit, &tangent).unwrap());
        // √2/2 + 1/4 < 1 < √2/2 + 1/3
        let inside = ball(&[rat(1, 2), rat(1, 2), z.clone()], rat(1, 4));
        assert!(ball_contains_ball(&unit, &inside).unwrap());
        let out = ball(&[rat(1, 2), rat(1, 2), z.clone()], rat(1, 3));
        assert!(!ball_contains_ball(&unit, &out).unwrap());
        let flat = Ball::new(pt(&[z.clone(), z.clone()]), int(1)).unwrap();
        assert!(matches!(ball_contains_ball(&unit, &flat), Err(GeometryError::DimensionMismatch { .. })));
    }

    #[test]
    fn avoidance_examples() {
        let z = int(0);
        assert!(!ball_avoids_slab(&ball(&[z.clone(), z.clone(), z.clone()], int(1)), &x1_slab(int(2))).unwrap());
        assert!(ball_avoids_slab(&ball(&[int(3), z.clone(), z.clone()], int(1)), &x1_slab(int(1))).unwrap());
        assert!(ball_avoids_slab(&ball(&[int(2), z.clone(), z.clone()], int(1)), &x1_slab(int(1))).unwrap());
    }

    #[test]
    fn slab_membership_examples() {
        let z = int(0);
        assert!(point_in_slab(&pt(&[z.clone(), z.clone(), z.clone()]), &x1_slab(rat(1, 10))).unwrap());
        assert!(!point_in_slab(&pt(&[int(1), z.clone(), z.clone()]), &x1_slab(int(1))).unwrap());
        let plane = Hyperplane::new(vec![int(1), int(1), int(0)], int(-3)).unwrap();
        let s = Slab::new(plane, rat(1, 2)).unwrap();
        assert!(point_in_slab(&pt(&[int(1), int(2), int(3)]), &s).unwrap());
    }

    #[test]
    fn canonical_planes_compare_structurally() {
        let a = Hyperplane::new(vec![int(2), int(2), int(0)], int(-2)).unwrap();
        let b = Hyperplane::vertical(int(-1), int(-1), int(1)).unwrap();
        assert_eq!(a, b);
        assert!(a.is_vertical());
        assert_eq!(a.normal()[0], int(1));
        assert!(Hyperplane::new(vec![int(0); 3], int(1)).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = Slab::new(Hyperplane::vertical(int(3), int(1), rat(-1, 2)).unwrap(), rat(1, 64)).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"plane":{"normal":["1/1","1/3","0/1"],"offset":"-1/6"},"width":"1/64"}"#);
        let back: Slab = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        let b = ball(&[rat(-3, 7), int(0), int(4)], rat(1, 2));
        let back: Ball = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        assert_eq!(back, b);
    }

    fn coord() -> impl Strategy<Value = Rational> {
        (-40i64..40, 1i64..9).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_ball() -> impl Strategy<Value = Ball> {
        (coord(), coord(), coord(), 1i64..40, 1i64..9)
            .prop_map(|(x, y, z, n, d)| ball(&[x, y, z], rat(n, d)))
    }

    fn arb_slab() -> impl Strategy<Value = Slab> {
        (-3i64..4, -3i64..4, -3i64..4, coord(), 0i64..20, 1i64..9).prop_filter_map("zero normal", |(a, b, c, off, w, d)| {
            let plane = Hyperplane::new(vec![int(a), int(b), int(c)], off).ok()?;
            Slab::new(plane, rat(w, d)).ok()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn avoidance_excludes_sampled_points(b in arb_ball(), s in arb_slab(), dir in prop::collection::vec(-8i64..9, 3), t in 0i64..=16) {
            prop_assume!(dir.iter().any(|&d| d != 0));
            // A point of the ball: center + (t/16)·r·dir/‖dir‖∞-scaled so it stays inside.
            let dir: Vec<Rational> = dir.into_iter().map(int).collect();
            let scale = dir.iter().map(|d| d.abs()).max().unwrap() * int(2);
            let step = rat(t, 16) * b.radius() / scale;
            let x = b.center().offset(&dir, &step).unwrap();
            prop_assert!(b.contains_point(&x).unwrap());
            if ball_avoids_slab(&b, &s).unwrap() {
                prop_assert!(!point_in_slab(&x, &s).unwrap());
                prop_assert!(!point_in_slab(b.center(), &s).unwrap());
            }
        }

        #[test]
        fn containment_is_a_partial_order(a in arb_ball(), b in arb_ball(), c in arb_ball()) {
            prop_assert!(ball_contains_ball(&a, &a).unwrap());
            if ball_contains_ball(&a, &b).unwrap() && ball_contains_ball(&b, &a).unwrap() {
                prop_assert_eq!(&a, &b);
            }
            if ball_contains_ball(&a, &b).unwrap() && ball_contains_ball(&b, &c).unwrap() {
                prop_assert!(ball_contains_ball(&a, &c).unwrap());
            }
        }

        #[test]
        fn shrunk_concentric_ball_is_contained(b in arb_ball(), n in 1i64..16) {
            let inner = Ball::new(b.center().clone(), b.radius() * rat(n, 16)).unwrap();
            prop_assert!(ball_contains_ball(&b, &inner).unwrap());
        }
    }
}
