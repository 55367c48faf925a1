//! Sphere separators for families of balls and segments, candidate sphere
//! enumeration, event-radius sweeps and empirical thickness.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ball_side, sphere_segment_intersects, Ball, Point, Segment, Side, Sphere, Tolerance};
use crate::par;
use crate::pointgen::PointSet;

/// Covering constant `k(d)` and the derived balance fraction `1/(k+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub cover_constant: usize,
}

impl Constants {
    /// `k(2) = 7`, `k(d) = 5^d` otherwise.
    pub fn for_dim(d: usize) -> Self {
        let k = if d == 2 { 7 } else { 5usize.saturating_pow(d as u32) };
        Self { cover_constant: k.max(3) }
    }

    pub fn with_cover_constant(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::OutOfRange(format!("cover constant must be >= 3, got {k}")));
        }
        Ok(Self { cover_constant: k })
    }

    pub fn balance_fraction(&self) -> f64 {
        1.0 / (self.cover_constant as f64 + 1.0)
    }
}

/// Objects to separate. Segment families are balanced on their reference
/// points (the points of P), balls on their centers.
#[derive(Debug, Clone, Copy)]
pub enum Family<'a> {
    Balls(&'a [Ball]),
    Segments { segments: &'a [Segment], points: &'a [Point] },
}

impl Family<'_> {
    pub fn len(&self) -> usize {
        match self {
            Family::Balls(b) => b.len(),
            Family::Segments { segments, .. } => segments.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn balance_total(&self) -> usize {
        match self {
            Family::Balls(b) => b.len(),
            Family::Segments { points, .. } => points.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSeparator {
    pub sphere: Sphere,
    /// Balls strictly inside, or reference points in the closed ball.
    pub inside_count: usize,
    /// Balls strictly outside, or reference points outside the closed ball.
    pub outside_count: usize,
    /// Ids of crossed objects, ascending.
    pub crossing: Vec<usize>,
    /// `max(inside, outside) / total`.
    pub balance: f64,
    /// Reference points lying on the sphere within tolerance (counted inside).
    pub on_sphere: usize,
}

/// Largest side allowed by `balance_fraction` for `total` items.
pub fn side_limit(total: usize, balance_fraction: f64) -> usize {
    (((1.0 - balance_fraction) * total as f64) + 1e-9).floor().max(1.0) as usize
}

pub fn crossing_set(family: Family<'_>, sphere: &Sphere, tol: Tolerance) -> Vec<usize> {
    match family {
        Family::Balls(balls) => (0..balls.len())
            .filter(|&i| ball_side(sphere, &balls[i], tol) == Side::Crossing)
            .collect(),
        Family::Segments { segments, .. } => (0..segments.len())
            .filter(|&i| sphere_segment_intersects(sphere, &segments[i], tol))
            .collect(),
    }
}

/// Classifies every object against `sphere`.
pub fn evaluate(family: Family<'_>, sphere: &Sphere, tol: Tolerance) -> SphereSeparator {
    let crossing = crossing_set(family, sphere, tol);
    let (inside_count, outside_count, on_sphere) = match family {
        Family::Balls(balls) => {
            let inside = balls.iter().filter(|b| ball_side(sphere, b, tol) == Side::Inside).count();
            (inside, balls.len() - inside - crossing.len(), 0)
        }
        Family::Segments { points, .. } => {
            let mut inside = 0;
            let mut on = 0;
            for p in points {
                let d = sphere.center.dist(p);
                if d <= sphere.radius + tol.eps_geom {
                    inside += 1;
                    if d >= sphere.radius - tol.eps_geom {
                        on += 1;
                    }
                }
            }
            (inside, points.len() - inside, on)
        }
    };
    let total = family.balance_total().max(1);
    SphereSeparator {
        sphere: sphere.clone(),
        inside_count,
        outside_count,
        balance: inside_count.max(outside_count) as f64 / total as f64,
        crossing,
        on_sphere,
    }
}

fn is_balanced(s: &SphereSeparator, total: usize, balance_fraction: f64) -> bool {
    s.inside_count.max(s.outside_count) <= side_limit(total, balance_fraction)
}

/// Fewer crossings, then smaller radius, then lexicographic center.
fn better(a: &SphereSeparator, b: &SphereSeparator) -> Ordering {
    a.crossing
        .len()
        .cmp(&b.crossing.len())
        .then(a.sphere.radius.total_cmp(&b.sphere.radius))
        .then_with(|| a.sphere.center.lex_cmp(&b.sphere.center))
}

/// One row of a separator search trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub sphere: Sphere,
    pub inside: usize,
    pub outside: usize,
    pub crossings: usize,
    pub balanced: bool,
}

pub fn find_separator(
    family: Family<'_>,
    balance_fraction: f64,
    candidates: &[Sphere],
    tol: Tolerance,
) -> Result<SphereSeparator> {
    find_separator_traced(family, balance_fraction, candidates, tol).0
}

/// Like [`find_separator`], also returning one trace row per candidate.
pub fn find_separator_traced(
    family: Family<'_>,
    balance_fraction: f64,
    candidates: &[Sphere],
    tol: Tolerance,
) -> (Result<SphereSeparator>, Vec<TraceEntry>) {
    if family.is_empty() {
        return (Err(Error::InvalidInput("separator needs at least one object".into())), vec![]);
    }
    let total = family.balance_total();
    let evaluated = par::map(candidates, |c| {
        let s = evaluate(family, c, tol);
        let ok = is_balanced(&s, total, balance_fraction);
        (s, ok)
    });
    let trace = evaluated
        .iter()
        .map(|(s, ok)| TraceEntry {
            sphere: s.sphere.clone(),
            inside: s.inside_count,
            outside: s.outside_count,
            crossings: s.crossing.len(),
            balanced: *ok,
        })
        .collect();
    let best = evaluated
        .into_iter()
        .filter(|(_, ok)| *ok)
        .map(|(s, _)| s)
        .min_by(better)
        .ok_or(Error::NoBalancedCandidate);
    (best, trace)
}

pub fn trace_to_json(trace: &[TraceEntry]) -> String {
    serde_json::to_string(trace).expect("trace serializes")
}

/// A sweep center, optionally restricted to a radius interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCenter {
    pub center: Point,
    pub range: Option<(f64, f64)>,
}

/// For each center, tries every event radius (where some object becomes
/// tangent or some reference point lies on the sphere) and the midpoints
/// between consecutive events. Between events the classification is
/// constant, so this is exhaustive over radii for the given centers.
pub fn search_separator(
    family: Family<'_>,
    balance_fraction: f64,
    centers: &[SweepCenter],
    tol: Tolerance,
) -> Result<SphereSeparator> {
    search_separator_with(family, balance_fraction, centers, tol, Preference::FewestCrossings)
}

/// How [`search_separator_with`] ranks balanced spheres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preference {
    /// Fewest crossings, then smallest radius.
    FewestCrossings,
    /// Fewest crossings, then smallest larger side, then smallest radius.
    /// Keeps recursion shallow when many radii tie on crossings.
    Balanced,
}

pub fn search_separator_with(
    family: Family<'_>,
    balance_fraction: f64,
    centers: &[SweepCenter],
    tol: Tolerance,
    pref: Preference,
) -> Result<SphereSeparator> {
    if family.is_empty() {
        return Err(Error::InvalidInput("separator needs at least one object".into()));
    }
    let total = family.balance_total();
    let limit = side_limit(total, balance_fraction);
    let per_center = par::map(centers, |sc| sweep_one(family, limit, sc, tol, pref));
    per_center
        .into_iter()
        .flatten()
        .min_by(|a, b| match pref {
            Preference::FewestCrossings => better(a, b),
            Preference::Balanced => a
                .crossing
                .len()
                .cmp(&b.crossing.len())
                .then(a.inside_count.max(a.outside_count).cmp(&b.inside_count.max(b.outside_count)))
                .then_with(|| better(a, b)),
        })
        .ok_or(Error::NoBalancedCandidate)
}

fn sweep_one(family: Family<'_>, limit: usize, sc: &SweepCenter, tol: Tolerance, pref: Preference) -> Option<SphereSeparator> {
    let t = tol.eps_geom;
    let c = &sc.center;
    // crossing iff lo <= r <= hi
    let (mut lo, mut hi): (Vec<f64>, Vec<f64>) = match family {
        Family::Balls(balls) => balls
            .iter()
            .map(|b| {
                let d = c.dist(&b.center);
                (d - b.radius - t, d + b.radius + t)
            })
            .unzip(),
        Family::Segments { segments, .. } => segments
            .iter()
            .map(|s| {
                let (near, far) = s.distance_range(c);
                (near - t, far + t)
            })
            .unzip(),
    };
    let mut refs: Vec<f64> = match family {
        Family::Balls(_) => vec![],
        Family::Segments { points, .. } => points.iter().map(|p| c.dist(p)).collect(),
    };
    lo.sort_by(f64::total_cmp);
    hi.sort_by(f64::total_cmp);
    refs.sort_by(f64::total_cmp);

    let mut events: Vec<f64> = lo.iter().chain(&hi).chain(&refs).copied().filter(|r| *r >= 0.0).collect();
    events.push(0.0);
    events.sort_by(f64::total_cmp);
    events.dedup();
    let mut radii = Vec::with_capacity(2 * events.len() + 1);
    for w in events.windows(2) {
        radii.push(w[0]);
        radii.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = events.last() {
        radii.push(last);
        radii.push(last + 1.0 + last.abs());
    }
    if let Some((a, b)) = sc.range {
        radii.retain(|&r| r >= a && r <= b);
        radii.push(a);
        radii.push(b);
    }

    let count_le = |v: &[f64], x: f64| v.partition_point(|&y| y <= x);
    let count_lt = |v: &[f64], x: f64| v.partition_point(|&y| y < x);
    let mut best: Option<(usize, usize, f64)> = None;
    for &r in &radii {
        let crossing = count_le(&lo, r) - count_lt(&hi, r);
        let (inside, outside) = match family {
            Family::Balls(_) => {
                let inside = count_lt(&hi, r);
                (inside, lo.len() - count_le(&lo, r))
            }
            Family::Segments { .. } => {
                let inside = count_le(&refs, r + t);
                (inside, refs.len() - inside)
            }
        };
        if inside.max(outside) > limit {
            continue;
        }
        let side = match pref {
            Preference::FewestCrossings => 0,
            Preference::Balanced => inside.max(outside),
        };
        let key = (crossing, side, r);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    let (_, _, r) = best?;
    Some(evaluate(family, &Sphere { center: c.clone(), radius: r }, tol))
}

/// Diametral spheres of all pairs plus circumspheres of `j`-subsets for
/// `3 <= j <= max_defining` in general position, deduplicated within `tol`.
pub fn candidate_spheres(p: &PointSet, max_defining: usize, tol: Tolerance) -> Result<Vec<Sphere>> {
    if max_defining < 2 || max_defining > p.dim + 1 {
        return Err(Error::OutOfRange(format!(
            "max_defining must lie in 2..={}, got {max_defining}",
            p.dim + 1
        )));
    }
    let n = p.len();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for j in 2..=max_defining.min(n) {
        let mut idx: Vec<usize> = (0..j).collect();
        loop {
            subsets.push(idx.clone());
            let mut i = j;
            while i > 0 && idx[i - 1] == n - j + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for k in i..j {
                idx[k] = idx[k - 1] + 1;
            }
        }
    }
    let spheres: Vec<Sphere> = par::map(&subsets, |s| {
        let pts: Vec<&Point> = s.iter().map(|&i| &p.points[i]).collect();
        circumsphere(&pts)
    })
    .into_iter()
    .flatten()
    .collect();
    Ok(dedup_spheres(spheres, tol))
}

/// Sphere through all `pts` with center in their affine hull. `None` when
/// the points are affinely dependent.
pub fn circumsphere(pts: &[&Point]) -> Option<Sphere> {
    let p0 = pts[0].coords();
    let m = pts.len() - 1;
    if m == 0 {
        return Some(Sphere { center: pts[0].clone(), radius: 0.0 });
    }
    let v: Vec<Vec<f64>> = pts[1..]
        .iter()
        .map(|q| q.coords().iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram = DMatrix::from_fn(m, m, |i, j| 2.0 * dot(&v[i], &v[j]));
    let rhs = DVector::from_fn(m, |i, _| dot(&v[i], &v[i]));
    let scale: f64 = (0..m).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    // reject near-singular systems relative to the subset's own size
    let det = gram.determinant();
    if det.abs() <= 1e-10 * scale.powi(m as i32) {
        return None;
    }
    let lambda = gram.lu().solve(&rhs)?;
    let mut c: Vec<f64> = p0.to_vec();
    for (i, vi) in v.iter().enumerate() {
        for (ck, vk) in c.iter_mut().zip(vi) {
            *ck += lambda[i] * vk;
        }
    }
    let center = Point::new(c).ok()?;
    let radius = center.dist(pts[0]);
    Some(Sphere { center, radius })
}

fn dedup_spheres(mut spheres: Vec<Sphere>, tol: Tolerance) -> Vec<Sphere> {
    spheres.sort_by(|a, b| a.center.lex_cmp(&b.center).then(a.radius.total_cmp(&b.radius)));
    let t = tol.eps_geom;
    let mut out: Vec<Sphere> = Vec::with_capacity(spheres.len());
    for s in spheres {
        // sorted by first coordinate, so only a short tail can be within tol
        let dup = out
            .iter()
            .rev()
            .take_while(|o| s.center.coords()[0] - o.center.coords()[0] <= t)
            .any(|o| o.center.dist(&s.center) <= t && (o.radius - s.radius).abs() <= t);
        if !dup {
            out.push(s);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessReport {
    pub lambda: f64,
    pub kappa_hat: usize,
    pub witness_point: Option<Point>,
}

/// Ball centers plus, for each overlapping pair, the midpoint of the lens
/// along the center line. At most `budget` pair points are added.
pub fn thickness_samples(balls: &[Ball], budget: usize) -> Vec<Point> {
    let mut out: Vec<Point> = balls.iter().map(|b| b.center.clone()).collect();
    let mut added = 0;
    'outer: for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            if added >= budget {
                break 'outer;
            }
            let (a, b) = (&balls[i], &balls[j]);
            let d = a.center.dist(&b.center);
            if d == 0.0 || d > a.radius + b.radius {
                continue;
            }
            // the lens spans [d - rb, ra] along the ray from a to b
            let t = 0.5 * ((d - b.radius).max(-a.radius) + a.radius.min(d + b.radius)) / d;
            let c: Vec<f64> = a
                .center
                .coords()
                .iter()
                .zip(b.center.coords())
                .map(|(x, y)| x + t * (y - x))
                .collect();
            out.push(Point::new(c).expect("finite"));
            added += 1;
        }
    }
    out
}

pub fn measure_thickness(balls: &[Ball], lambda: f64, samples: &[Point], tol: Tolerance) -> Result<ThicknessReport> {
    if lambda.is_nan() || lambda < 1.0 {
        return Err(Error::OutOfRange(format!("lambda must be >= 1, got {lambda}")));
    }
    let per_sample = par::map(samples, |p| {
        let mut diams: Vec<f64> = balls
            .iter()
            .filter(|b| b.contains(p, tol))
            .map(Ball::diameter)
            .collect();
        diams.sort_by(f64::total_cmp);
        let mut best = 0;
        let mut lo = 0;
        for hi in 0..diams.len() {
            while diams[hi] > lambda * diams[lo] + tol.eps_geom {
                lo += 1;
            }
            best = best.max(hi - lo + 1);
        }
        best
    });
    let (kappa_hat, witness_point) = per_sample
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map_or((0, None), |(i, &k)| (k, (k > 0).then(|| samples[i].clone())));
    Ok(ThicknessReport {
        lambda,
        kappa_hat,
        witness_point,
    })
}
