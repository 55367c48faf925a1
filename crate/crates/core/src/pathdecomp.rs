//! Recursive sphere-separator path decomposition of a spanner, and a
//! validity checker.
//!
//! Each step sweeps spheres around sampled centers. Balanced radii are
//! ranked by cut edges per vertex on the smaller side, and the best few get
//! an exact separator: a minimum vertex cover of the edges joining the
//! closed ball to its outside, which is a subset of the crossed edges'
//! endpoints. The inside and outside vertex sets minus `S` recurse, and `S`
//! joins every bag of both child decompositions (inside first). When no
//! balanced sphere exists the split falls back to a median coordinate cut.
//! A final pass trims every vertex to the bags its edges need.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Segment, Sphere, Tolerance};
use crate::pointgen::PointSet;
use crate::geom::sphere_segment_intersects;
use crate::par;
use crate::separator::{crossing_set, side_limit, Constants, Family};
use crate::spanner::SpannerGraph;

pub const BASE_CASE: usize = 4;
pub const SAMPLED_CENTERS: usize = 32;
const EXACT_COVERS_PER_CENTER: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDecomposition {
    pub bags: Vec<Vec<usize>>,
    pub width: usize,
}

impl PathDecomposition {
    pub fn new(bags: Vec<Vec<usize>>) -> Self {
        let width = bags.iter().map(Vec::len).max().unwrap_or(1).saturating_sub(1);
        Self { bags, width }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serializes")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PdStats {
    pub sphere_splits: usize,
    pub median_splits: usize,
    pub max_separator: usize,
    /// Most crossed edges longer than the sphere's diameter at any split.
    pub max_long_crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdReport {
    pub decomposition: PathDecomposition,
    pub stats: PdStats,
}

pub fn build_path_decomposition(g: &SpannerGraph, p: &PointSet) -> Result<PathDecomposition> {
    build_path_decomposition_detailed(g, p, Tolerance::default()).map(|r| r.decomposition)
}

pub fn build_path_decomposition_detailed(g: &SpannerGraph, p: &PointSet, tol: Tolerance) -> Result<PdReport> {
    if g.n != p.len() {
        return Err(Error::InvalidInput(format!("graph has {} vertices, pointset {}", g.n, p.len())));
    }
    let mut b = Builder {
        g,
        p,
        tol,
        adj: adjacency(g),
        bf: Constants::for_dim(p.dim).balance_fraction(),
        stats: PdStats::default(),
    };
    let all: Vec<usize> = (0..p.len()).collect();
    let bags = trim(b.decompose(&all), g);
    Ok(PdReport {
        decomposition: PathDecomposition::new(bags),
        stats: b.stats,
    })
}

fn adjacency(g: &SpannerGraph) -> Vec<Vec<usize>> {
    let mut adj = vec![vec![]; g.n];
    for e in &g.edges {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    adj
}

/// Crossed edges of `g` longer than the sphere's diameter.
pub fn long_crossings(g: &SpannerGraph, p: &PointSet, sphere: &Sphere, tol: Tolerance) -> usize {
    let segs: Vec<Segment> = g
        .edges
        .iter()
        .filter(|e| e.length > 2.0 * sphere.radius)
        .map(|e| Segment {
            a: p.points[e.u].clone(),
            b: p.points[e.v].clone(),
        })
        .collect();
    crossing_set(Family::Segments { segments: &segs, points: &[] }, sphere, tol).len()
}

struct Builder<'a> {
    g: &'a SpannerGraph,
    p: &'a PointSet,
    tol: Tolerance,
    adj: Vec<Vec<usize>>,
    bf: f64,
    stats: PdStats,
}

impl Builder<'_> {
    fn decompose(&mut self, verts: &[usize]) -> Vec<Vec<usize>> {
        if verts.is_empty() {
            return vec![];
        }
        if verts.len() <= BASE_CASE {
            return vec![verts.to_vec()];
        }
        let (inside, outside, sep) = self.split(verts);
        let mut bags = self.decompose(&inside);
        bags.extend(self.decompose(&outside));
        if bags.is_empty() {
            return vec![sep];
        }
        for bag in &mut bags {
            bag.extend(&sep);
            bag.sort_unstable();
        }
        bags
    }

    /// Returns (inside \ S, outside \ S, S), each ascending.
    fn split(&mut self, verts: &[usize]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut in_set = vec![false; self.g.n];
        for &v in verts {
            in_set[v] = true;
        }
        let edges: Vec<(usize, usize)> = verts
            .iter()
            .flat_map(|&u| self.adj[u].iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .filter(|&(_, v)| in_set[v])
            .collect();
        if let Some(r) = self.sphere_split(verts, &edges) {
            return r;
        }
        self.stats.median_splits += 1;
        self.median_split(verts, &edges)
    }

    fn sphere_split(&mut self, verts: &[usize], edges: &[(usize, usize)]) -> Option<(Vec<usize>, Vec<usize>, Vec<usize>)> {
        if edges.is_empty() {
            return None;
        }
        let pts: Vec<Point> = verts.iter().map(|&v| self.p.points[v].clone()).collect();
        let mut local = vec![usize::MAX; self.g.n];
        for (k, &v) in verts.iter().enumerate() {
            local[v] = k;
        }
        let ledges: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (local[u], local[v])).collect();
        let limit = side_limit(verts.len(), self.bf);
        let t = self.tol.eps_geom;

        // Per center: balanced radii ranked by cut size, the best few of
        // which get an exact vertex cover.
        let per_center = par::map(&self.centers(&pts), |c| {
            let dist: Vec<f64> = pts.iter().map(|q| c.dist(q)).collect();
            let mut sorted = dist.clone();
            sorted.sort_by(f64::total_cmp);
            let (mut lo, mut hi): (Vec<f64>, Vec<f64>) = ledges
                .iter()
                .map(|&(a, b)| (dist[a].min(dist[b]), dist[a].max(dist[b])))
                .unzip();
            lo.sort_by(f64::total_cmp);
            hi.sort_by(f64::total_cmp);
            let le = |v: &[f64], x: f64| v.partition_point(|&y| y <= x);
            let mut radii: Vec<(f64, f64)> = sorted
                .iter()
                .map(|&r| r + t)
                .filter_map(|r| {
                    let inside = le(&sorted, r);
                    let small = inside.min(pts.len() - inside);
                    (pts.len() - small <= limit).then(|| (ratio(le(&lo, r) - le(&hi, r), small), r))
                })
                .collect();
            radii.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            radii.dedup_by(|a, b| a.1 == b.1);
            radii
                .into_iter()
                .take(EXACT_COVERS_PER_CENTER)
                .map(|(_, r)| {
                    let inside: Vec<bool> = dist.iter().map(|&d| d <= r).collect();
                    let cover = cut_cover(&ledges, &inside);
                    let small = inside.iter().filter(|&&b| b).count().min(pts.len() - inside.iter().filter(|&&b| b).count());
                    (ratio(cover.len(), small), cover, r, c.clone())
                })
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.2.total_cmp(&b.2)))
        });
        let (_, cover, r, center) = per_center
            .into_iter()
            .flatten()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.2.total_cmp(&b.2)))?;

        let sphere = Sphere { center, radius: r };
        let long = edges
            .iter()
            .filter(|&&(u, v)| {
                let s = Segment {
                    a: self.p.points[u].clone(),
                    b: self.p.points[v].clone(),
                };
                s.length() > 2.0 * r && sphere_segment_intersects(&sphere, &s, self.tol)
            })
            .count();
        let mut in_s = vec![false; verts.len()];
        for k in cover {
            in_s[k] = true;
        }
        let (mut inside, mut outside, mut s) = (vec![], vec![], vec![]);
        for (k, &v) in verts.iter().enumerate() {
            if in_s[k] {
                s.push(v);
            } else if sphere.center.dist(&pts[k]) <= r {
                inside.push(v);
            } else {
                outside.push(v);
            }
        }
        self.stats.sphere_splits += 1;
        self.stats.max_separator = self.stats.max_separator.max(s.len());
        self.stats.max_long_crossings = self.stats.max_long_crossings.max(long);
        Some((inside, outside, s))
    }

    /// Evenly spaced points in lexicographic order plus the bounding-box
    /// center.
    fn centers(&self, pts: &[Point]) -> Vec<Point> {
        let mut order: Vec<&Point> = pts.iter().collect();
        order.sort_by(|a, b| a.lex_cmp(b));
        let m = SAMPLED_CENTERS.min(order.len());
        let mut out: Vec<Point> = (0..m).map(|j| order[j * order.len() / m].clone()).collect();
        let d = pts[0].dim();
        let mid: Vec<f64> = (0..d)
            .map(|k| {
                let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p.coords()[k]), hi.max(p.coords()[k]))
                });
                0.5 * (lo + hi)
            })
            .collect();
        out.push(Point::new(mid).expect("finite center"));
        out
    }

    /// Cut at the median of the widest axis; `S` is the endpoints of edges
    /// between the halves.
    fn median_split(&mut self, verts: &[usize], edges: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let d = self.p.dim;
        let extent = |k: usize| {
            let (lo, hi) = verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                let x = self.p.points[v].coords()[k];
                (lo.min(x), hi.max(x))
            });
            hi - lo
        };
        let axis = (0..d).max_by(|&a, &b| extent(a).total_cmp(&extent(b)).then(b.cmp(&a))).unwrap_or(0);
        let mut order = verts.to_vec();
        order.sort_by(|&a, &b| {
            self.p.points[a].coords()[axis]
                .total_cmp(&self.p.points[b].coords()[axis])
                .then(a.cmp(&b))
        });
        let mut left = vec![false; self.g.n];
        for &v in &order[..order.len() / 2] {
            left[v] = true;
        }
        let mut local = vec![usize::MAX; self.g.n];
        for (k, &v) in verts.iter().enumerate() {
            local[v] = k;
        }
        let ledges: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (local[u], local[v])).collect();
        let side: Vec<bool> = verts.iter().map(|&v| left[v]).collect();
        let mut in_s = vec![false; self.g.n];
        for k in cut_cover(&ledges, &side) {
            in_s[verts[k]] = true;
        }
        let (mut a, mut b, mut s) = (vec![], vec![], vec![]);
        for &v in verts {
            if in_s[v] {
                s.push(v);
            } else if left[v] {
                a.push(v);
            } else {
                b.push(v);
            }
        }
        (a, b, s)
    }
}

/// Shrinks each vertex to the bags between its first and last edge, each
/// edge placed in the earliest bag holding both ends. Intervals only shrink
/// and every edge keeps a bag, so validity is preserved.
fn trim(bags: Vec<Vec<usize>>, g: &SpannerGraph) -> Vec<Vec<usize>> {
    let mut first = vec![usize::MAX; g.n];
    for (i, bag) in bags.iter().enumerate() {
        for &v in bag {
            first[v] = first[v].min(i);
        }
    }
    let mut span: Vec<Option<(usize, usize)>> = vec![None; g.n];
    let mut widen = |v: usize, i: usize| {
        span[v] = Some(span[v].map_or((i, i), |(a, b)| (a.min(i), b.max(i))));
    };
    for e in &g.edges {
        let i = first[e.u].max(first[e.v]);
        widen(e.u, i);
        widen(e.v, i);
    }
    for v in 0..g.n {
        if span[v].is_none() && first[v] != usize::MAX {
            span[v] = Some((first[v], first[v]));
        }
    }
    let mut out: Vec<Vec<usize>> = bags
        .iter()
        .enumerate()
        .map(|(i, bag)| {
            bag.iter()
                .copied()
                .filter(|&v| span[v].is_some_and(|(a, b)| a <= i && i <= b))
                .collect()
        })
        .collect();
    out.retain(|b: &Vec<usize>| !b.is_empty());
    out
}

/// Separator cost per vertex split off: small separators that cut off
/// large sides keep every root-to-leaf sum of separators small.
fn ratio(cut: usize, smaller_side: usize) -> f64 {
    cut as f64 / smaller_side.max(1) as f64
}

/// Minimum vertex cover of the edges joining `side[a] = true` to
/// `side[b] = false`, via maximum matching and König's theorem. Removing it
/// disconnects the two sides.
pub fn cut_cover(edges: &[(usize, usize)], side: &[bool]) -> Vec<usize> {
    let n = side.len();
    let mut adj: Vec<Vec<usize>> = vec![vec![]; n];
    for &(a, b) in edges {
        match (side[a], side[b]) {
            (true, false) => adj[a].push(b),
            (false, true) => adj[b].push(a),
            _ => {}
        }
    }
    let left: Vec<usize> = (0..n).filter(|&v| side[v] && !adj[v].is_empty()).collect();
    let mut mate_l = vec![usize::MAX; n];
    let mut mate_r = vec![usize::MAX; n];

    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], mate_l: &mut [usize], mate_r: &mut [usize]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if mate_r[v] == usize::MAX || augment(mate_r[v], adj, seen, mate_l, mate_r) {
                mate_l[u] = v;
                mate_r[v] = u;
                return true;
            }
        }
        false
    }

    for &u in &left {
        if let Some(&v) = adj[u].iter().find(|&&v| mate_r[v] == usize::MAX) {
            mate_l[u] = v;
            mate_r[v] = u;
        }
    }
    let mut seen = vec![false; n];
    for &u in &left {
        if mate_l[u] == usize::MAX {
            seen.iter_mut().for_each(|s| *s = false);
            augment(u, &adj, &mut seen, &mut mate_l, &mut mate_r);
        }
    }
    // Alternating reachability from unmatched left vertices.
    let mut zl = vec![false; n];
    let mut zr = vec![false; n];
    let mut stack: Vec<usize> = left.iter().copied().filter(|&u| mate_l[u] == usize::MAX).collect();
    for &u in &stack {
        zl[u] = true;
    }
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !zr[v] {
                zr[v] = true;
                let w = mate_r[v];
                if w != usize::MAX && !zl[w] {
                    zl[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    let mut cover: Vec<usize> = left.iter().copied().filter(|&u| !zl[u]).collect();
    cover.extend((0..n).filter(|&v| zr[v]));
    cover.sort_unstable();
    cover
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PdViolation {
    EdgeNotCovered(usize, usize),
    NotContiguous(usize),
    VertexOutOfRange(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdCheck {
    pub valid: bool,
    pub width: usize,
    pub violation: Option<PdViolation>,
    /// Vertices in no bag. Allowed by the definition, reported for
    /// completeness.
    pub uncovered_vertices: Vec<usize>,
}

pub fn verify_path_decomposition(g: &SpannerGraph, pd: &PathDecomposition) -> PdCheck {
    let width = pd.bags.iter().map(Vec::len).max().unwrap_or(1).saturating_sub(1);
    let fail = |v| PdCheck {
        valid: false,
        width,
        violation: Some(v),
        uncovered_vertices: vec![],
    };
    let mut first = vec![usize::MAX; g.n];
    let mut last = vec![0; g.n];
    let mut count = vec![0usize; g.n];
    for (i, bag) in pd.bags.iter().enumerate() {
        let mut seen = bag.clone();
        seen.sort_unstable();
        seen.dedup();
        for &v in &seen {
            if v >= g.n {
                return fail(PdViolation::VertexOutOfRange(v));
            }
            first[v] = first[v].min(i);
            last[v] = i;
            count[v] += 1;
        }
    }
    if let Some(v) = (0..g.n).find(|&v| count[v] > 0 && last[v] - first[v] + 1 != count[v]) {
        return fail(PdViolation::NotContiguous(v));
    }
    // With contiguous intervals an edge is covered iff the intervals meet,
    // and then the later start is a common bag.
    for e in &g.edges {
        let ok = count[e.u] > 0 && count[e.v] > 0 && first[e.u].max(first[e.v]) <= last[e.u].min(last[e.v]);
        if !ok {
            return fail(PdViolation::EdgeNotCovered(e.u, e.v));
        }
        let i = first[e.u].max(first[e.v]);
        if !(pd.bags[i].contains(&e.u) && pd.bags[i].contains(&e.v)) {
            return fail(PdViolation::EdgeNotCovered(e.u, e.v));
        }
    }
    PdCheck {
        valid: true,
        width,
        violation: None,
        uncovered_vertices: (0..g.n).filter(|&v| count[v] == 0).collect(),
    }
}
