//! Box-tree spanner and its shortcut-pruned subgraph.
//!
//! The box tree splits a cube at its center into the `2^d` orthants (lower
//! halves open at the center) and replaces every nonempty orthant by its
//! shrunk cube. Shrunk cubes have side equal to the largest extent of their
//! points, so on that axis no face can move inward. Every internal node has
//! at least two children, which bounds the tree at `2n - 1` nodes.
//!
//! `G = E1 ∪ E2` links each box's representative to those of its children
//! (`E1`) and to the boxes near its father (`E2`). `G'` drops every edge for
//! which a shorter kept edge is a shortcut.

use std::collections::{BTreeMap, BinaryHeap};
use std::cmp::{Ordering, Reverse};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{AxisBox, Interval, Point};
use crate::par;
use crate::pointgen::PointSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxNode {
    pub cube: AxisBox,
    pub father: Option<usize>,
    pub children: Vec<usize>,
    pub rep: usize,
    /// Point indices in the box, ascending.
    pub members: Vec<usize>,
}

impl BoxNode {
    pub fn size(&self) -> f64 {
        self.cube.size()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxTree {
    /// Node 0 is the root. Children always have larger ids than their father.
    pub nodes: Vec<BoxNode>,
}

impl BoxTree {
    pub fn root(&self) -> &BoxNode {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn bbox(p: &PointSet, members: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let mut lo = p.points[members[0]].coords().to_vec();
    let mut hi = lo.clone();
    for &i in &members[1..] {
        for (k, &c) in p.points[i].coords().iter().enumerate() {
            lo[k] = lo[k].min(c);
            hi[k] = hi[k].max(c);
        }
    }
    (lo, hi)
}

/// Smallest cube holding `members` inside the region `[rlo, rhi]`.
fn shrunk(p: &PointSet, members: &[usize], rlo: &[f64], rhi: &[f64]) -> AxisBox {
    let (lo, hi) = bbox(p, members);
    let side = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let corner: Vec<f64> = (0..lo.len()).map(|k| lo[k].min(rhi[k] - side).max(rlo[k])).collect();
    AxisBox {
        axes: corner
            .iter()
            .zip(&hi)
            .map(|(&c, &h)| Interval::closed(c, (c + side).max(h)))
            .collect(),
    }
}

pub fn build_box_tree(p: &PointSet) -> Result<BoxTree> {
    if p.is_empty() {
        return Err(Error::InvalidInput("box tree needs at least one point".into()));
    }
    let all: Vec<usize> = (0..p.len()).collect();
    let (lo, hi) = bbox(p, &all);
    let root_cube = shrunk(p, &all, &lo, &hi);
    let mut nodes = vec![BoxNode {
        cube: root_cube,
        father: None,
        children: vec![],
        rep: 0,
        members: all,
    }];
    let mut next = 0;
    while next < nodes.len() {
        let id = next;
        next += 1;
        if nodes[id].members.len() < 2 {
            continue;
        }
        let psi = nodes[id].cube.center();
        let mut orthants: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for &i in &nodes[id].members {
            let key = p.points[i]
                .coords()
                .iter()
                .zip(&psi)
                .enumerate()
                .fold(0u64, |k, (ax, (&x, &c))| if x >= c { k | (1 << ax) } else { k });
            orthants.entry(key).or_default().push(i);
        }
        for (key, members) in orthants {
            let (rlo, rhi): (Vec<f64>, Vec<f64>) = nodes[id]
                .cube
                .axes
                .iter()
                .zip(&psi)
                .enumerate()
                .map(|(ax, (iv, &c))| if key & (1 << ax) != 0 { (c, iv.hi) } else { (iv.lo, c) })
                .unzip();
            let cube = shrunk(p, &members, &rlo, &rhi);
            let child = nodes.len();
            nodes[id].children.push(child);
            nodes.push(BoxNode {
                cube,
                father: Some(id),
                children: vec![],
                rep: 0,
                members,
            });
        }
    }
    // Reps top-down: the child holding the father's rep inherits it, the
    // others take their smallest point.
    nodes[0].rep = nodes[0].members[0];
    for id in 0..nodes.len() {
        let rep = nodes[id].rep;
        for c in nodes[id].children.clone() {
            nodes[c].rep = if nodes[c].members.binary_search(&rep).is_ok() {
                rep
            } else {
                nodes[c].members[0]
            };
        }
    }
    Ok(BoxTree { nodes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeTag {
    E1,
    E2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpannerEdge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
    pub tag: EdgeTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpannerGraph {
    pub n: usize,
    pub eps: f64,
    /// `u < v`, sorted by `(u, v)`.
    pub edges: Vec<SpannerEdge>,
}

impl SpannerGraph {
    pub fn from_pairs(p: &PointSet, eps: f64, pairs: impl IntoIterator<Item = (usize, usize, EdgeTag)>) -> Self {
        let mut map: BTreeMap<(usize, usize), EdgeTag> = BTreeMap::new();
        for (a, b, tag) in pairs {
            if a != b {
                let key = (a.min(b), a.max(b));
                let e = map.entry(key).or_insert(tag);
                *e = (*e).min(tag);
            }
        }
        Self {
            n: p.len(),
            eps,
            edges: map
                .into_iter()
                .map(|((u, v), tag)| SpannerEdge {
                    u,
                    v,
                    length: p.points[u].dist(&p.points[v]),
                    tag,
                })
                .collect(),
        }
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![vec![]; self.n];
        for e in &self.edges {
            adj[e.u].push((e.v, e.length));
            adj[e.v].push((e.u, e.length));
        }
        adj
    }

    pub fn count(&self, tag: EdgeTag) -> usize {
        self.edges.iter().filter(|e| e.tag == tag).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }
}

/// `Near(b)`: non-root boxes smaller than `b` whose father is at least as
/// large as `b`, within `6 sqrt(d) / eps * size(b)` of `b`.
pub fn near(tree: &BoxTree, b: usize, eps: f64) -> Vec<usize> {
    let nb = &tree.nodes[b];
    let d = nb.cube.dim() as f64;
    let reach = 6.0 * d.sqrt() / eps * nb.size();
    (1..tree.len())
        .filter(|&c| {
            let nc = &tree.nodes[c];
            let father = &tree.nodes[nc.father.expect("non-root has a father")];
            nc.size() < nb.size() && nb.size() <= father.size() && nb.cube.dist(&nc.cube) <= reach
        })
        .collect()
}

pub fn build_spanner(p: &PointSet, eps: f64) -> Result<SpannerGraph> {
    Ok(build_spanner_with_tree(p, eps)?.0)
}

pub fn build_spanner_with_tree(p: &PointSet, eps: f64) -> Result<(SpannerGraph, BoxTree)> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let tree = build_box_tree(p)?;
    let internal: Vec<usize> = (0..tree.len()).filter(|&b| !tree.nodes[b].is_leaf()).collect();
    let near_lists = par::map(&internal, |&f| near(&tree, f, eps));
    let mut pairs = Vec::new();
    for (&f, nl) in internal.iter().zip(&near_lists) {
        let rep_f = tree.nodes[f].rep;
        for &c in &tree.nodes[f].children {
            pairs.push((rep_f, tree.nodes[c].rep, EdgeTag::E1));
            for &b2 in nl {
                pairs.push((tree.nodes[c].rep, tree.nodes[b2].rep, EdgeTag::E2));
            }
        }
    }
    Ok((SpannerGraph::from_pairs(p, eps, pairs), tree))
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

fn diff(a: &Point, b: &Point) -> Vec<f64> {
    a.coords().iter().zip(b.coords()).map(|(x, y)| x - y).collect()
}

/// Whether `zw` is a shortcut for `xy`: `z` within `eps |zw| / 20` of `x`
/// and the directions `x -> y`, `z -> w` within angle `eps / 20`.
pub fn is_shortcut(x: &Point, y: &Point, z: &Point, w: &Point, eps: f64) -> bool {
    const SLACK: f64 = 1e-12;
    x.dist(z) <= eps * z.dist(w) / 20.0 * (1.0 + SLACK) && angle(&diff(y, x), &diff(w, z)) <= eps / 20.0 + SLACK
}

/// Keeps edges in increasing length (ties by endpoint indices) unless an
/// already-kept edge is a shortcut for them in either orientation.
pub fn prune_shortcuts(g: &SpannerGraph, p: &PointSet) -> SpannerGraph {
    let eps = g.eps;
    let mut order: Vec<&SpannerEdge> = g.edges.iter().collect();
    order.sort_by(|a, b| a.length.total_cmp(&b.length).then((a.u, a.v).cmp(&(b.u, b.v))));

    // Points sorted by first coordinate for radius queries.
    let mut by_x: Vec<usize> = (0..p.len()).collect();
    by_x.sort_by(|&a, &b| p.points[a].coords()[0].total_cmp(&p.points[b].coords()[0]));
    let xs: Vec<f64> = by_x.iter().map(|&i| p.points[i].coords()[0]).collect();

    let mut kept_adj: Vec<Vec<usize>> = vec![vec![]; p.len()];
    let mut kept = Vec::new();
    for e in order {
        // Kept edges are no longer than e, so a shortcut's start lies within
        // eps * |e| / 20 of the edge's start.
        let r = eps * e.length / 20.0 * (1.0 + 1e-9);
        let has = |x: usize, y: usize| {
            let (px, py) = (&p.points[x], &p.points[y]);
            let c = px.coords()[0];
            let lo = xs.partition_point(|&v| v < c - r);
            let hi = xs.partition_point(|&v| v <= c + r);
            by_x[lo..hi].iter().any(|&z| {
                px.dist(&p.points[z]) <= r && kept_adj[z].iter().any(|&w| is_shortcut(px, py, &p.points[z], &p.points[w], eps))
            })
        };
        if has(e.u, e.v) || has(e.v, e.u) {
            continue;
        }
        kept_adj[e.u].push(e.v);
        kept_adj[e.v].push(e.u);
        kept.push(e.clone());
    }
    kept.sort_by_key(|e| (e.u, e.v));
    SpannerGraph {
        n: g.n,
        eps,
        edges: kept,
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub fn shortest_paths(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((Dist(0.0), src)));
    while let Some(Reverse((Dist(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((Dist(nd), v)));
            }
        }
    }
    dist
}

/// Largest ratio of graph distance to Euclidean distance over all pairs.
pub fn verify_dilation(g: &SpannerGraph, p: &PointSet) -> Result<f64> {
    if g.n != p.len() {
        return Err(Error::InvalidInput(format!("graph has {} vertices, pointset {}", g.n, p.len())));
    }
    let adj = g.adjacency();
    let per_source = par::map_range(p.len(), |s| -> Result<f64> {
        let dist = shortest_paths(&adj, s);
        let mut worst: f64 = 1.0;
        for (t, &d) in dist.iter().enumerate().skip(s + 1) {
            if !d.is_finite() {
                return Err(Error::DisconnectedGraph(s, t));
            }
            worst = worst.max(d / p.points[s].dist(&p.points[t]));
        }
        Ok(worst)
    });
    per_source.into_iter().try_fold(1.0, |acc: f64, r| r.map(|w| acc.max(w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointgen::{generate, GeneratorSpec};

    #[test]
    fn tree_examples() {
        let one = PointSet::from_xy(&[(1.0, 2.0)]);
        let t = build_box_tree(&one).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.root().rep, 0);

        let two = PointSet::from_xy(&[(0.0, 0.0), (1.0, 3.0)]);
        let t = build_box_tree(&two).unwrap();
        assert_eq!(t.root().children.len(), 2);
        let child_reps: Vec<usize> = t.root().children.iter().map(|&c| t.nodes[c].rep).collect();
        assert!(child_reps.contains(&t.root().rep));

        let c1 = generate(&GeneratorSpec::carpet(1)).unwrap();
        let t = build_box_tree(&c1).unwrap();
        let leaves = t.nodes.iter().filter(|b| b.is_leaf()).count();
        assert_eq!(leaves, 8);
        assert!(t.nodes.iter().all(|b| b.is_leaf() == (b.members.len() == 1)));
        assert!(t.len() - leaves <= 7);
    }

    #[test]
    fn spanner_examples() {
        let two = PointSet::from_xy(&[(0.0, 0.0), (1.0, 3.0)]);
        let g = build_spanner(&two, 0.5).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!(verify_dilation(&g, &two).unwrap(), 1.0);

        let p = generate(&GeneratorSpec::random(50, 2, 3)).unwrap();
        let g = build_spanner(&p, 0.5).unwrap();
        assert!(verify_dilation(&g, &p).unwrap() <= 1.5);
        let gp = prune_shortcuts(&g, &p);
        assert!(gp.edges.len() <= g.edges.len());
        assert!(verify_dilation(&gp, &p).unwrap() <= 2.0);
    }

    #[test]
    fn dilation_examples() {
        let sq = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let cycle = SpannerGraph::from_pairs(&sq, 1.0, [(0, 1, EdgeTag::E1), (1, 2, EdgeTag::E1), (2, 3, EdgeTag::E1), (3, 0, EdgeTag::E1)]);
        assert!((verify_dilation(&cycle, &sq).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let complete = SpannerGraph::from_pairs(&sq, 1.0, (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j, EdgeTag::E1))));
        assert_eq!(verify_dilation(&complete, &sq).unwrap(), 1.0);
        let line = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let path = SpannerGraph::from_pairs(&line, 1.0, [(0, 1, EdgeTag::E1), (1, 2, EdgeTag::E1)]);
        assert_eq!(verify_dilation(&path, &line).unwrap(), 1.0);
        let broken = SpannerGraph::from_pairs(&line, 1.0, [(0, 1, EdgeTag::E1)]);
        assert!(matches!(verify_dilation(&broken, &line), Err(Error::DisconnectedGraph(0, 2))));
    }

    #[test]
    fn shortcut_examples() {
        let eps = 0.5;
        let p = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.0, eps / 40.0), (1.0, eps / 40.0)]);
        let g = SpannerGraph::from_pairs(&p, eps, [(0, 1, EdgeTag::E1), (2, 3, EdgeTag::E1)]);
        let gp = prune_shortcuts(&g, &p);
        assert_eq!(gp.edges.len(), 1);
        assert_eq!((gp.edges[0].u, gp.edges[0].v), (0, 1));

        let single = SpannerGraph::from_pairs(&p, eps, [(0, 3, EdgeTag::E1)]);
        assert_eq!(prune_shortcuts(&single, &p), single);
    }
}
