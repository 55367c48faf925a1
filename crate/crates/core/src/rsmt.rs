//! Exact rectilinear Steiner minimal trees on the Hanan grid, the diamond
//! disjointness check, and separator statistics on RSMT edge sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{l1_diamond, Point, Segment, Tolerance};
use crate::par;
use crate::pointgen::PointSet;
use crate::separator::{candidate_spheres, search_separator, Family, SphereSeparator, SweepCenter};

pub const RSMT_MAX: usize = 8;

/// Rectilinear Steiner tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rst {
    /// Points of P followed by the Steiner points.
    pub vertices: Vec<Point>,
    pub steiner: Vec<Point>,
    /// Axis-parallel pieces, split at every terminal, corner and junction.
    pub edges: Vec<Segment>,
    pub length: f64,
}

impl Rst {
    /// Builds a tree from axis-parallel segments, merging overlaps and
    /// splitting at junctions. Used for hand-built trees as well.
    pub fn from_segments(vertices: Vec<Point>, steiner: Vec<Point>, segments: &[Segment]) -> Result<Rst> {
        let edges = normalize(segments, &vertices)?;
        let length = edges.iter().map(Segment::length).sum();
        Ok(Rst {
            vertices,
            steiner,
            edges,
            length,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("rst serializes")
    }
}

fn require_plane(p: &PointSet) -> Result<()> {
    if p.dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: p.dim });
    }
    Ok(())
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// All `(x_i, y_j)` over input coordinates, sorted by x then y.
pub fn hanan_grid(p: &PointSet) -> Result<PointSet> {
    require_plane(p)?;
    let xs = sorted_unique(p.points.iter().map(|q| q.coords()[0]).collect());
    let ys = sorted_unique(p.points.iter().map(|q| q.coords()[1]).collect());
    let pts = xs.iter().flat_map(|&x| ys.iter().map(move |&y| Point::xy(x, y))).collect();
    Ok(PointSet {
        dim: 2,
        points: pts,
        label: format!("hanan({})", p.label),
    })
}

/// Prim's algorithm under L1. Returns the length and the tree edges.
fn mst_l1(pts: &[&Point]) -> (f64, Vec<(usize, usize)>) {
    let k = pts.len();
    if k < 2 {
        return (0.0, vec![]);
    }
    let mut in_tree = vec![false; k];
    let mut best = vec![f64::INFINITY; k];
    let mut from = vec![0usize; k];
    best[0] = 0.0;
    let mut total = 0.0;
    let mut edges = Vec::with_capacity(k - 1);
    for step in 0..k {
        let mut v = usize::MAX;
        for u in 0..k {
            if !in_tree[u] && (v == usize::MAX || best[u] < best[v]) {
                v = u;
            }
        }
        in_tree[v] = true;
        if step > 0 {
            total += best[v];
            edges.push((from[v], v));
        }
        for u in 0..k {
            if !in_tree[u] {
                let d = pts[v].dist_l1(pts[u]);
                if d < best[u] {
                    best[u] = d;
                    from[u] = v;
                }
            }
        }
    }
    (total, edges)
}

pub fn mst_l1_length(p: &PointSet) -> f64 {
    mst_l1(&p.points.iter().collect::<Vec<_>>()).0
}

/// Enumerates Hanan Steiner-point subsets of size at most `steiner_budget`
/// and keeps the one whose L1 MST is shortest (fewer Steiner points, then
/// lexicographic subset on ties).
pub fn exact_rsmt(p: &PointSet, steiner_budget: usize) -> Result<Rst> {
    require_plane(p)?;
    let n = p.len();
    if !(1..=RSMT_MAX).contains(&n) {
        return Err(Error::OutOfRange(format!("exact_rsmt needs 1..={RSMT_MAX} points, got {n}")));
    }
    if steiner_budget > n.saturating_sub(2) {
        return Err(Error::OutOfRange(format!(
            "steiner budget {steiner_budget} exceeds n - 2 = {}",
            n.saturating_sub(2)
        )));
    }
    let grid = hanan_grid(p)?;
    let cands: Vec<Point> = grid.points.into_iter().filter(|h| !p.points.contains(h)).collect();
    let c = cands.len();
    let base: Vec<&Point> = p.points.iter().collect();

    let mut best: (f64, Vec<usize>) = (mst_l1(&base).0, vec![]);
    for size in 1..=steiner_budget.min(c) {
        // split the enumeration on the first chosen index
        let per_first = par::map_range(c, |first| {
            let mut combo: Vec<usize> = (first..first + size).collect();
            if combo[size - 1] >= c {
                return None;
            }
            let mut local: Option<(f64, Vec<usize>)> = None;
            let mut pts = base.clone();
            loop {
                pts.truncate(n);
                pts.extend(combo.iter().map(|&i| &cands[i]));
                let len = mst_l1(&pts).0;
                if local.as_ref().is_none_or(|(l, _)| len < *l) {
                    local = Some((len, combo.clone()));
                }
                // next combination with the same first element
                let mut i = size;
                while i > 1 && combo[i - 1] == c - size + i - 1 {
                    i -= 1;
                }
                if i <= 1 {
                    break;
                }
                combo[i - 1] += 1;
                for j in i..size {
                    combo[j] = combo[j - 1] + 1;
                }
            }
            local
        });
        for (len, combo) in per_first.into_iter().flatten() {
            // strict improvement keeps the earlier (smaller or lexicographically first) subset
            if len < best.0 - 1e-12 * (1.0 + best.0) {
                best = (len, combo);
            }
        }
    }

    let steiner: Vec<Point> = best.1.iter().map(|&i| cands[i].clone()).collect();
    let mut vertices = p.points.clone();
    vertices.extend(steiner.iter().cloned());
    let refs: Vec<&Point> = vertices.iter().collect();
    let (_, tree) = mst_l1(&refs);
    let mut segs = Vec::new();
    for (a, b) in tree {
        segs.extend(l_shape(&vertices[a], &vertices[b]));
    }
    Rst::from_segments(vertices, steiner, &segs)
}

/// Axis-parallel path through the lower of the two possible corners.
fn l_shape(a: &Point, b: &Point) -> Vec<Segment> {
    let (ax, ay) = (a.coords()[0], a.coords()[1]);
    let (bx, by) = (b.coords()[0], b.coords()[1]);
    let c1 = Point::xy(ax, by);
    let c2 = Point::xy(bx, ay);
    let corner = if (by, ax) <= (ay, bx) { c1 } else { c2 };
    [Segment { a: a.clone(), b: corner.clone() }, Segment { a: corner, b: b.clone() }]
        .into_iter()
        .filter(|s| s.length() > 0.0)
        .collect()
}

/// Merges collinear overlaps and splits pieces at every vertex, segment end
/// and horizontal/vertical crossing.
fn normalize(segments: &[Segment], vertices: &[Point]) -> Result<Vec<Segment>> {
    // line key -> intervals
    let mut horiz: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    let mut vert: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for s in segments {
        let (ax, ay) = (s.a.coords()[0], s.a.coords()[1]);
        let (bx, by) = (s.b.coords()[0], s.b.coords()[1]);
        if ay == by && ax != bx {
            horiz.entry((ay + 0.0).to_bits()).or_default().push((ax.min(bx), ax.max(bx)));
        } else if ax == bx && ay != by {
            vert.entry((ax + 0.0).to_bits()).or_default().push((ay.min(by), ay.max(by)));
        } else if ax != bx || ay != by {
            return Err(Error::InvalidInput(format!("segment {s:?} is not axis-parallel")));
        }
    }
    let merge = |v: &mut Vec<(f64, f64)>| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &(lo, hi) in v.iter() {
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        *v = out;
    };
    horiz.values_mut().for_each(merge);
    vert.values_mut().for_each(merge);

    let h: Vec<(f64, f64, f64)> = horiz
        .iter()
        .flat_map(|(&y, iv)| iv.iter().map(move |&(a, b)| (f64::from_bits(y), a, b)))
        .collect();
    let v: Vec<(f64, f64, f64)> = vert
        .iter()
        .flat_map(|(&x, iv)| iv.iter().map(move |&(a, b)| (f64::from_bits(x), a, b)))
        .collect();

    let mut out = Vec::new();
    for &(y, x0, x1) in &h {
        let mut cuts = vec![x0, x1];
        cuts.extend(vertices.iter().filter(|q| q.coords()[1] == y).map(|q| q.coords()[0]));
        cuts.extend(v.iter().filter(|&&(_, y0, y1)| y0 <= y && y <= y1).map(|&(x, _, _)| x));
        let cuts = sorted_unique(cuts.into_iter().filter(|&x| x0 <= x && x <= x1).collect());
        for w in cuts.windows(2) {
            out.push(Segment { a: Point::xy(w[0], y), b: Point::xy(w[1], y) });
        }
    }
    for &(x, y0, y1) in &v {
        let mut cuts = vec![y0, y1];
        cuts.extend(vertices.iter().filter(|q| q.coords()[0] == x).map(|q| q.coords()[1]));
        cuts.extend(h.iter().filter(|&&(_, x0, x1)| x0 <= x && x <= x1).map(|&(y, _, _)| y));
        let cuts = sorted_unique(cuts.into_iter().filter(|&y| y0 <= y && y <= y1).collect());
        for w in cuts.windows(2) {
            out.push(Segment { a: Point::xy(x, w[0]), b: Point::xy(x, w[1]) });
        }
    }
    Ok(out)
}

/// Diamonds of distinct edges are interior-disjoint. Two L1 balls have
/// disjoint interiors exactly when their centers are at least the sum of
/// the radii apart in L1.
pub fn rsmt_diamond_check(t: &Rst) -> bool {
    let tol = Tolerance::default().eps_geom;
    let diamonds: Vec<(Point, f64)> = t.edges.iter().map(l1_diamond).collect();
    diamonds.iter().enumerate().all(|(i, (ci, ri))| {
        diamonds[i + 1..]
            .iter()
            .all(|(cj, rj)| ci.dist_l1(cj) >= ri + rj - tol)
    })
}

/// Separator search over the RSMT edges, balanced on P with fraction 1/8.
/// Sweep centers are the points of P and the centers of all candidate
/// spheres on up to three points.
pub fn rsmt_separator_stats(p: &PointSet, tol: Tolerance) -> Result<SphereSeparator> {
    let t = exact_rsmt(p, p.len().saturating_sub(2))?;
    let mut centers: Vec<SweepCenter> = p
        .points
        .iter()
        .map(|q| SweepCenter { center: q.clone(), range: None })
        .collect();
    if p.len() >= 2 {
        centers.extend(
            candidate_spheres(p, 3, tol)?
                .into_iter()
                .map(|s| SweepCenter { center: s.center, range: None }),
        );
    }
    if t.edges.is_empty() {
        // a single point: any sphere through it
        return Ok(SphereSeparator {
            sphere: crate::geom::Ball { center: p.points[0].clone(), radius: 0.0 },
            inside_count: 1,
            outside_count: 0,
            crossing: vec![],
            balance: 1.0,
            on_sphere: 1,
        });
    }
    search_separator(
        Family::Segments { segments: &t.edges, points: &p.points },
        0.125,
        &centers,
        tol,
    )
}
