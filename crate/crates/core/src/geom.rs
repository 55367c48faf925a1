//! Primitive geometry: points, segments, balls, axis boxes and the incidence
//! predicates the rest of the crate is built on.
//!
//! Everything is plain `f64` with an absolute tolerance (see [`Tolerance`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Builds a point, rejecting empty or non-finite coordinate lists.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("point must have at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinate in {coords:?}")));
        }
        Ok(Self { coords })
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self { coords: vec![x, y] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn origin(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    /// Euclidean distance. Callers guarantee matching dimensions.
    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        dist_sq(&self.coords, &other.coords).sqrt()
    }

    #[inline]
    pub fn dist_sq(&self, other: &Point) -> f64 {
        dist_sq(&self.coords, &other.coords)
    }

    #[inline]
    pub fn dist_l1(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Point {
        Point {
            coords: self.coords.iter().map(|x| x * c).collect(),
        }
    }

    /// Lexicographic comparison with `total_cmp` on each coordinate.
    pub fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }
}

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Which norm [`distance`] should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L2,
    L1,
}

/// Distance between two points under the chosen norm.
pub fn distance(p: &Point, q: &Point, norm: Norm) -> Result<f64> {
    check_dim(p, q.dim())?;
    Ok(match norm {
        Norm::L2 => p.dist(q),
        Norm::L1 => p.dist_l1(q),
    })
}

pub(crate) fn check_dim(p: &Point, dim: usize) -> Result<()> {
    if p.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    Ok(())
}

/// Absolute tolerance for incidence tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps_geom: f64,
}

impl Tolerance {
    pub fn new(eps_geom: f64) -> Result<Self> {
        if !(eps_geom > 0.0 && eps_geom.is_finite()) {
            return Err(Error::OutOfRange(format!("tolerance must be positive, got {eps_geom}")));
        }
        Ok(Self { eps_geom })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { eps_geom: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        check_dim(&b, a.dim())?;
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }

    pub fn midpoint(&self) -> Point {
        self.a.midpoint(&self.b)
    }

    /// Closest and farthest distance from `c` to any point of the segment.
    pub fn distance_range(&self, c: &Point) -> (f64, f64) {
        let a = self.a.coords();
        let b = self.b.coords();
        let c = c.coords();
        let da = dist_sq(a, c);
        let db = dist_sq(b, c);
        let len_sq = dist_sq(a, b);
        let min_sq = if len_sq == 0.0 {
            da
        } else {
            // closest-point parameter of c on a + t (b - a), clamped to [0, 1]
            let t: f64 = a
                .iter()
                .zip(b)
                .zip(c)
                .map(|((ai, bi), ci)| (ci - ai) * (bi - ai))
                .sum::<f64>()
                / len_sq;
            let t = t.clamp(0.0, 1.0);
            a.iter()
                .zip(b)
                .zip(c)
                .map(|((ai, bi), ci)| {
                    let p = ai + t * (bi - ai);
                    (p - ci) * (p - ci)
                })
                .sum()
        };
        (min_sq.sqrt(), da.max(db).sqrt())
    }
}

/// Closed ball; also used for the sphere that bounds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

/// A `(d-1)`-sphere shares the representation of its ball.
pub type Sphere = Ball;

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::OutOfRange(format!("radius must be non-negative, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn contains(&self, p: &Point, tol: Tolerance) -> bool {
        self.center.dist(p) <= self.radius + tol.eps_geom
    }
}

/// Smallest ball containing the segment.
pub fn circumball(s: &Segment) -> Ball {
    Ball {
        center: s.midpoint(),
        radius: 0.5 * s.length(),
    }
}

/// Does the closed segment touch the sphere surface?
pub fn sphere_segment_intersects(c: &Sphere, s: &Segment, tol: Tolerance) -> bool {
    let (near, far) = s.distance_range(&c.center);
    near <= c.radius + tol.eps_geom && far >= c.radius - tol.eps_geom
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Inside,
    Outside,
    Crossing,
}

/// Position of ball `b` relative to sphere `c`.
pub fn ball_side(c: &Sphere, b: &Ball, tol: Tolerance) -> Side {
    let d = c.center.dist(&b.center);
    if d + b.radius < c.radius - tol.eps_geom {
        Side::Inside
    } else if d - b.radius > c.radius + tol.eps_geom {
        Side::Outside
    } else {
        Side::Crossing
    }
}

/// L1 ball around the midpoint of `s` whose radius is half the midpoint's
/// L1 distance to an endpoint.
pub fn l1_diamond(s: &Segment) -> (Point, f64) {
    let m = s.midpoint();
    let r = 0.5 * m.dist_l1(&s.a);
    (m, r)
}

pub fn l1_diamond_contains(s: &Segment, p: &Point) -> bool {
    let (m, r) = l1_diamond(s);
    m.dist_l1(p) <= r + Tolerance::default().eps_geom
}

/// One axis of an [`AxisBox`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Product of intervals. Tree boxes keep every side the same length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub axes: Vec<Interval>,
}

impl AxisBox {
    pub fn new(axes: Vec<Interval>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidInput("box needs at least one axis".into()));
        }
        if let Some(iv) = axes.iter().find(|iv| iv.lo.is_nan() || iv.hi.is_nan() || iv.lo > iv.hi) {
            return Err(Error::InvalidInput(format!("interval with lo > hi: {iv:?}")));
        }
        Ok(Self { axes })
    }

    /// Closed cube `[corner, corner + side]^d`.
    pub fn cube(corner: &[f64], side: f64) -> Self {
        Self {
            axes: corner.iter().map(|&c| Interval::closed(c, c + side)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Side length of the first axis.
    pub fn size(&self) -> f64 {
        self.axes[0].len()
    }

    /// The center `psi(b)`.
    pub fn center(&self) -> Vec<f64> {
        self.axes.iter().map(Interval::center).collect()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.axes.iter().zip(p.coords()).all(|(iv, &x)| iv.contains(x))
    }

    /// Euclidean distance between the closures of two boxes.
    pub fn dist(&self, other: &AxisBox) -> f64 {
        self.axes
            .iter()
            .zip(&other.axes)
            .map(|(a, b)| {
                let gap = (b.lo - a.hi).max(a.lo - b.hi).max(0.0);
                gap * gap
            })
            .sum::<f64>()
            .sqrt()
    }
}
