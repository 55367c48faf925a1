//! Exact Euclidean TSP: a Held-Karp oracle and a sphere-separator divide and
//! conquer solver.
//!
//! The separator solver fixes a balanced partition (In = closed candidate
//! ball, Out = the rest). A tour crossing it `2m` times splits into `m` paths
//! inside and `m` paths outside joined by `2m` crossing edges. The boundary
//! condition is the cyclic sequence of those paths' endpoints; each side is
//! then an independent path-system subproblem solved by subset DP.
//! The crossing budget deepens 2, 4, ... until some partition has been
//! searched exhaustively or every unexplored level is bounded away.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Segment, Tolerance};
use crate::par;
use crate::pointgen::PointSet;
use crate::separator::{candidate_spheres, evaluate, Family, SphereSeparator};

pub const HELD_KARP_MAX: usize = 20;
pub const SEPARATOR_TSP_MAX: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length: f64,
}

impl Tour {
    /// Rotates to start at 0 with `order[1] < order[n-1]` and recomputes the
    /// length in that order, so equal tours get bit-identical lengths.
    pub fn canonical(p: &PointSet, order: Vec<usize>) -> Tour {
        let n = order.len();
        let pos = order.iter().position(|&v| v == 0).unwrap_or(0);
        let mut o: Vec<usize> = order[pos..].iter().chain(&order[..pos]).copied().collect();
        if n > 2 && o[1] > o[n - 1] {
            o[1..].reverse();
        }
        let length = tour_length(p, &o);
        Tour { order: o, length }
    }

    pub fn is_permutation(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        self.order.len() == n
            && self.order.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
    }

    pub fn edges(&self, p: &PointSet) -> Vec<Segment> {
        let n = self.order.len();
        (0..n)
            .map(|i| Segment {
                a: p.points[self.order[i]].clone(),
                b: p.points[self.order[(i + 1) % n]].clone(),
            })
            .collect()
    }

    pub fn to_json(&self, p: &PointSet) -> String {
        let coords: Vec<&[f64]> = self.order.iter().map(|&i| p.points[i].coords()).collect();
        serde_json::json!({ "order": self.order, "coordinates": coords, "length": self.length }).to_string()
    }
}

pub fn tour_length(p: &PointSet, order: &[usize]) -> f64 {
    let n = order.len();
    (0..n).map(|i| p.points[order[i]].dist(&p.points[order[(i + 1) % n]])).sum()
}

fn distance_matrix(p: &PointSet) -> Vec<Vec<f64>> {
    p.points.iter().map(|a| p.points.iter().map(|b| a.dist(b)).collect()).collect()
}

/// Subset DP. Among optimal tours returns the lexicographically smallest
/// order starting at 0 (ties within 1e-12 relative).
pub fn held_karp_tsp(p: &PointSet) -> Result<Tour> {
    let n = p.len();
    if !(2..=HELD_KARP_MAX).contains(&n) {
        return Err(Error::OutOfRange(format!("held_karp_tsp needs 2..={HELD_KARP_MAX} points, got {n}")));
    }
    let d = distance_matrix(p);
    let m = n - 1;
    let full = (1usize << m) - 1;
    // g[S][j]: shortest path from vertex j+1 through every vertex of S back to 0
    let mut g = vec![f64::INFINITY; (full + 1) * m];
    for j in 0..m {
        g[j] = d[j + 1][0];
    }
    for s in 1..=full {
        for j in 0..m {
            if s & (1 << j) != 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut rest = s;
            while rest != 0 {
                let k = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let c = d[j + 1][k + 1] + g[(s & !(1 << k)) * m + k];
                if c < best {
                    best = c;
                }
            }
            g[s * m + j] = best;
        }
    }
    let opt = (0..m)
        .map(|j| d[0][j + 1] + g[(full & !(1 << j)) * m + j])
        .fold(f64::INFINITY, f64::min);
    let slack = 1e-12 * (1.0 + opt);
    let mut order = vec![0];
    let mut remaining = full;
    let mut cur = 0;
    let mut spent = 0.0;
    while remaining != 0 {
        let next = (0..m)
            .filter(|&j| remaining & (1 << j) != 0)
            .find(|&j| spent + d[cur][j + 1] + g[(remaining & !(1 << j)) * m + j] <= opt + slack)
            .expect("an optimal continuation exists");
        spent += d[cur][next + 1];
        remaining &= !(1 << next);
        cur = next + 1;
        order.push(cur);
    }
    Ok(Tour::canonical(p, order))
}

/// Hamiltonian-path table over the subsets of one side.
struct PathTable {
    k: usize,
    d: Vec<Vec<f64>>,
    hp: Vec<f64>,
}

impl PathTable {
    fn new(verts: &[usize], dist: &[Vec<f64>]) -> Self {
        let k = verts.len();
        let d: Vec<Vec<f64>> = verts.iter().map(|&a| verts.iter().map(|&b| dist[a][b]).collect()).collect();
        let mut hp = vec![f64::INFINITY; (1 << k) * k * k];
        for s in 0..k {
            hp[(1 << s) * k * k + s * k + s] = 0.0;
        }
        for mask in 1usize..(1 << k) {
            if mask.count_ones() < 2 {
                continue;
            }
            for s in (0..k).filter(|&s| mask & (1 << s) != 0) {
                for t in (0..k).filter(|&t| t != s && mask & (1 << t) != 0) {
                    let prev = mask & !(1 << t);
                    let mut best = f64::INFINITY;
                    for u in (0..k).filter(|&u| prev & (1 << u) != 0) {
                        let c = hp[prev * k * k + s * k + u] + d[u][t];
                        if c < best {
                            best = c;
                        }
                    }
                    hp[mask * k * k + s * k + t] = best;
                }
            }
        }
        Self { k, d, hp }
    }

    fn get(&self, mask: usize, s: usize, t: usize) -> f64 {
        self.hp[mask * self.k * self.k + s * self.k + t]
    }

    fn path(&self, mut mask: usize, s: usize, mut t: usize) -> Vec<usize> {
        let mut rev = vec![t];
        while mask != 1 << s {
            let cur = self.get(mask, s, t);
            let prev = mask & !(1 << t);
            let u = (0..self.k)
                .filter(|&u| prev & (1 << u) != 0)
                .find(|&u| self.get(prev, s, u) + self.d[u][t] == cur)
                .expect("table entry has a witness");
            rev.push(u);
            mask = prev;
            t = u;
        }
        rev.reverse();
        rev
    }

    /// Minimum cost of vertex-disjoint paths with the given endpoints that
    /// together cover the whole side, plus the chosen vertex set per path.
    fn path_system(&self, pairs: &[(usize, usize)], want_sets: bool) -> (f64, Vec<usize>) {
        let k = self.k;
        let full = (1usize << k) - 1;
        let endpoints = pairs.iter().fold(0usize, |m, &(s, t)| m | (1 << s) | (1 << t));
        let free = full & !endpoints;
        let mut layer = vec![f64::INFINITY; 1 << k];
        layer[0] = 0.0;
        let mut parents: Vec<Vec<usize>> = Vec::new();
        for (j, &(s, t)) in pairs.iter().enumerate() {
            let last = j + 1 == pairs.len();
            let base = (1 << s) | (1 << t);
            let mut next = vec![f64::INFINITY; 1 << k];
            let mut parent = if want_sets { vec![0usize; 1 << k] } else { vec![] };
            for (w, &gw) in layer.iter().enumerate() {
                if gw == f64::INFINITY {
                    continue;
                }
                let avail = free & !w;
                if last {
                    // the last path takes everything left
                    let x = avail;
                    if w | x | endpoints != full || (w & endpoints) != (endpoints & !base) {
                        continue;
                    }
                    let c = gw + self.get(base | x, s, t);
                    let u = w | base | x;
                    if c < next[u] {
                        next[u] = c;
                        if want_sets {
                            parent[u] = base | x;
                        }
                    }
                    continue;
                }
                let mut x = avail;
                loop {
                    let u = w | base | x;
                    let c = gw + self.get(base | x, s, t);
                    if c < next[u] {
                        next[u] = c;
                        if want_sets {
                            parent[u] = base | x;
                        }
                    }
                    if x == 0 {
                        break;
                    }
                    x = (x - 1) & avail;
                }
            }
            layer = next;
            if want_sets {
                parents.push(parent);
            }
        }
        let cost = layer[full];
        if !want_sets || cost == f64::INFINITY {
            return (cost, vec![]);
        }
        let mut sets = vec![0; pairs.len()];
        let mut u = full;
        for j in (0..pairs.len()).rev() {
            sets[j] = parents[j][u];
            u &= !sets[j];
        }
        (cost, sets)
    }

    /// Minimum spanning forest with `m` components: MST minus its m-1 heaviest edges.
    fn forest_bound(&self, m: usize) -> f64 {
        let k = self.k;
        let mut in_tree = vec![false; k];
        let mut best = vec![f64::INFINITY; k];
        best[0] = 0.0;
        let mut edges = Vec::with_capacity(k);
        for _ in 0..k {
            let v = (0..k)
                .filter(|&v| !in_tree[v])
                .min_by(|&a, &b| best[a].total_cmp(&best[b]))
                .expect("vertex left");
            in_tree[v] = true;
            edges.push(best[v]);
            for u in 0..k {
                if !in_tree[u] && self.d[v][u] < best[u] {
                    best[u] = self.d[v][u];
                }
            }
        }
        edges.sort_by(|a, b| b.total_cmp(a));
        edges.iter().skip(m.saturating_sub(1)).sum()
    }
}

struct Partition {
    inside: Vec<usize>,
    outside: Vec<usize>,
    sphere_index: usize,
}

impl Partition {
    fn max_m(&self) -> usize {
        self.inside.len().min(self.outside.len())
    }
}

/// One fully specified boundary condition: paths in tour order.
#[derive(Debug, Clone)]
struct Boundary {
    a_pairs: Vec<(usize, usize)>,
    b_pairs: Vec<(usize, usize)>,
}

struct PartitionSearch<'a> {
    part: &'a Partition,
    a: &'a PathTable,
    b: &'a PathTable,
    dist: &'a [Vec<f64>],
    memo_a: HashMap<Vec<(usize, usize)>, f64>,
    memo_b: HashMap<Vec<(usize, usize)>, f64>,
    min_cross: f64,
    bound: f64,
    best: Option<Boundary>,
    nodes: u64,
}

fn memo_key(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut k: Vec<(usize, usize)> = pairs.iter().map(|&(s, t)| (s.min(t), s.max(t))).collect();
    k.sort_unstable();
    k
}

impl PartitionSearch<'_> {
    fn cross(&self, a_local: usize, b_local: usize) -> f64 {
        self.dist[self.part.inside[a_local]][self.part.outside[b_local]]
    }

    fn ps_a(&mut self, pairs: &[(usize, usize)]) -> f64 {
        let key = memo_key(pairs);
        if let Some(&v) = self.memo_a.get(&key) {
            return v;
        }
        let v = self.a.path_system(&key, false).0;
        self.memo_a.insert(key, v);
        v
    }

    fn ps_b(&mut self, pairs: &[(usize, usize)]) -> f64 {
        let key = memo_key(pairs);
        if let Some(&v) = self.memo_b.get(&key) {
            return v;
        }
        let v = self.b.path_system(&key, false).0;
        self.memo_b.insert(key, v);
        v
    }

    fn run(&mut self, m: usize) {
        let lb_b = self.b.forest_bound(m);
        let mut a_pairs = Vec::with_capacity(m);
        self.dfs_a(m, &mut a_pairs, 0, lb_b);
    }

    /// Inside paths: the first path starts at the smallest endpoint overall,
    /// which fixes rotation and reflection of the cyclic sequence.
    fn dfs_a(&mut self, m: usize, pairs: &mut Vec<(usize, usize)>, used: usize, lb_b: f64) {
        let k = self.a.k;
        if pairs.len() == m {
            let psa = self.ps_a(pairs);
            if psa + lb_b + 2.0 * m as f64 * self.min_cross >= self.bound {
                return;
            }
            let mut b_pairs = Vec::with_capacity(m);
            let pairs = pairs.clone();
            self.dfs_b(&pairs, &mut b_pairs, 0, psa, lb_b, 0.0);
            return;
        }
        let first = pairs.first().map(|p| p.0);
        for s in 0..k {
            if used & (1 << s) != 0 || first.is_some_and(|f| s < f) {
                continue;
            }
            for t in 0..k {
                if (t != s && used & (1 << t) != 0) || first.is_some_and(|f| t < f) {
                    continue;
                }
                if pairs.is_empty() && t < s {
                    continue;
                }
                // remaining paths need at least one vertex each
                let used2 = used | (1 << s) | (1 << t);
                if k - (used2.count_ones() as usize) < m - pairs.len() - 1 {
                    continue;
                }
                pairs.push((s, t));
                self.dfs_a(m, pairs, used2, lb_b);
                pairs.pop();
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs_b(
        &mut self,
        a_pairs: &[(usize, usize)],
        pairs: &mut Vec<(usize, usize)>,
        used: usize,
        psa: f64,
        lb_b: f64,
        cross: f64,
    ) {
        let m = a_pairs.len();
        let i = pairs.len();
        let remaining = 2.0 * (m - i) as f64 * self.min_cross;
        if psa + lb_b + cross + remaining >= self.bound {
            return;
        }
        self.nodes += 1;
        if i == m {
            let total = psa + self.ps_b(pairs) + cross;
            if total < self.bound {
                self.bound = total;
                self.best = Some(Boundary {
                    a_pairs: a_pairs.to_vec(),
                    b_pairs: pairs.clone(),
                });
            }
            return;
        }
        let k = self.b.k;
        let t_i = a_pairs[i].1;
        let s_next = a_pairs[(i + 1) % m].0;
        for u in 0..k {
            if used & (1 << u) != 0 {
                continue;
            }
            let cu = self.cross(t_i, u);
            for v in 0..k {
                if v != u && used & (1 << v) != 0 {
                    continue;
                }
                let used2 = used | (1 << u) | (1 << v);
                if k - (used2.count_ones() as usize) < m - i - 1 {
                    continue;
                }
                let c = cross + cu + self.cross(s_next, v);
                pairs.push((u, v));
                self.dfs_b(a_pairs, pairs, used2, psa, lb_b, c);
                pairs.pop();
            }
        }
    }
}

/// Per-level bookkeeping of the separator solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub budget: usize,
    pub searched: usize,
    pub pruned: usize,
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatorTspReport {
    pub tour: Tour,
    /// Partition that produced the returned tour, evaluated on its edges.
    pub separator: SphereSeparator,
    pub inside: Vec<usize>,
    pub outside: Vec<usize>,
    /// Crossing budget at which optimality was certified.
    pub budget: usize,
    pub partitions: usize,
    pub levels: Vec<LevelStats>,
}

pub fn separator_tsp(p: &PointSet) -> Result<Tour> {
    separator_tsp_detailed(p, Tolerance::default()).map(|r| r.tour)
}

pub fn separator_tsp_detailed(p: &PointSet, tol: Tolerance) -> Result<SeparatorTspReport> {
    let n = p.len();
    if !(3..=SEPARATOR_TSP_MAX).contains(&n) {
        return Err(Error::OutOfRange(format!("separator_tsp needs 3..={SEPARATOR_TSP_MAX} points, got {n}")));
    }
    let dist = distance_matrix(p);
    let spheres = candidate_spheres(p, (p.dim + 1).clamp(2, 3), tol)?;
    let limit = (7 * n) / 8;
    let mut seen = BTreeSet::new();
    let mut parts = Vec::new();
    for (si, s) in spheres.iter().enumerate() {
        let mask: u32 = (0..n)
            .filter(|&i| s.center.dist(&p.points[i]) <= s.radius + tol.eps_geom)
            .fold(0, |m, i| m | (1 << i));
        let k = mask.count_ones() as usize;
        if k == 0 || k == n || k > limit || n - k > limit || !seen.insert(mask) {
            continue;
        }
        parts.push(Partition {
            inside: (0..n).filter(|&i| mask & (1 << i) != 0).collect(),
            outside: (0..n).filter(|&i| mask & (1 << i) == 0).collect(),
            sphere_index: si,
        });
    }
    if parts.is_empty() {
        return Err(Error::NoBalancedCandidate);
    }

    // one path table per distinct side
    let mut side_keys: Vec<Vec<usize>> = parts.iter().flat_map(|q| [q.inside.clone(), q.outside.clone()]).collect();
    side_keys.sort();
    side_keys.dedup();
    let tables: HashMap<Vec<usize>, Arc<PathTable>> = side_keys
        .iter()
        .cloned()
        .zip(par::map(&side_keys, |v| Arc::new(PathTable::new(v, &dist))))
        .collect();

    let bounds: Vec<(Arc<PathTable>, Arc<PathTable>, f64)> = parts
        .iter()
        .map(|q| {
            let min_cross = q
                .inside
                .iter()
                .flat_map(|&a| q.outside.iter().map(move |&b| (a, b)))
                .map(|(a, b)| dist[a][b])
                .fold(f64::INFINITY, f64::min);
            (tables[&q.inside].clone(), tables[&q.outside].clone(), min_cross)
        })
        .collect();
    let level_bound = |pi: usize, m: usize| {
        let (a, b, mc) = &bounds[pi];
        a.forest_bound(m) + b.forest_bound(m) + 2.0 * m as f64 * mc
    };

    let mut incumbent: Option<(f64, usize, Tour)> = None;
    let mut levels = Vec::new();
    let max_budget = 2 * (n / 2);
    let mut budget = 2;
    let idx: Vec<usize> = (0..parts.len()).collect();
    while budget <= max_budget {
        let m = budget / 2;
        let bound = incumbent.as_ref().map_or(f64::INFINITY, |x| x.0);
        let results = par::map(&idx, |&pi| {
            let part = &parts[pi];
            if m > part.max_m() || level_bound(pi, m) >= bound {
                return (false, None);
            }
            let (a, b, mc) = &bounds[pi];
            let mut search = PartitionSearch {
                part,
                a,
                b,
                dist: &dist,
                memo_a: HashMap::new(),
                memo_b: HashMap::new(),
                min_cross: *mc,
                bound,
                best: None,
                nodes: 0,
            };
            search.run(m);
            let tour = search.best.map(|bc| assemble(p, part, a, b, &bc));
            (true, tour)
        });
        let searched = results.iter().filter(|r| r.0).count();
        for (pi, (_, tour)) in results.into_iter().enumerate() {
            if let Some(t) = tour {
                let better = incumbent.as_ref().is_none_or(|(len, _, _)| t.length < *len);
                if better {
                    incumbent = Some((t.length, pi, t));
                }
            }
        }
        let best = incumbent.as_ref().map_or(f64::INFINITY, |x| x.0);
        levels.push(LevelStats {
            budget,
            searched,
            pruned: parts.iter().filter(|q| m <= q.max_m()).count() - searched,
            best,
        });
        // certified once some partition has every crossing count accounted for
        let certified = (0..parts.len()).any(|pi| {
            (m + 1..=parts[pi].max_m()).all(|mm| level_bound(pi, mm) >= best)
        });
        if let Some((_, pi, tour)) = incumbent.take_if(|_| certified) {
            let part = &parts[pi];
            let segs = tour.edges(p);
            let separator = evaluate(
                Family::Segments { segments: &segs, points: &p.points },
                &spheres[part.sphere_index],
                tol,
            );
            return Ok(SeparatorTspReport {
                tour,
                separator,
                inside: part.inside.clone(),
                outside: part.outside.clone(),
                budget,
                partitions: parts.len(),
                levels,
            });
        }
        budget += 2;
    }
    Err(Error::BudgetExhausted { budget: max_budget })
}

fn assemble(p: &PointSet, part: &Partition, a: &PathTable, b: &PathTable, bc: &Boundary) -> Tour {
    let (_, sets_a) = a.path_system(&bc.a_pairs, true);
    let (_, sets_b) = b.path_system(&bc.b_pairs, true);
    let mut order = Vec::with_capacity(p.len());
    for i in 0..bc.a_pairs.len() {
        let (s, t) = bc.a_pairs[i];
        order.extend(a.path(sets_a[i], s, t).into_iter().map(|v| part.inside[v]));
        let (u, v) = bc.b_pairs[i];
        order.extend(b.path(sets_b[i], u, v).into_iter().map(|w| part.outside[w]));
    }
    Tour::canonical(p, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointgen::{generate, GeneratorSpec};

    fn brute_force(p: &PointSet) -> f64 {
        let n = p.len();
        let mut rest: Vec<usize> = (1..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut rest, 0, &mut |perm| {
            let mut o = vec![0];
            o.extend_from_slice(perm);
            best = best.min(tour_length(p, &o));
        });
        best
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    fn square() -> PointSet {
        PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    }

    #[test]
    fn held_karp_examples() {
        assert!((held_karp_tsp(&square()).unwrap().length - 4.0).abs() < 1e-12);
        let tri = PointSet::from_xy(&[(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)]);
        assert!((held_karp_tsp(&tri).unwrap().length - 12.0).abs() < 1e-12);
        let two = PointSet::from_xy(&[(0.0, 0.0), (3.0, 4.0)]);
        assert!((held_karp_tsp(&two).unwrap().length - 10.0).abs() < 1e-12);
        assert!(held_karp_tsp(&PointSet::from_xy(&[(0.0, 0.0)])).is_err());
    }

    #[test]
    fn held_karp_matches_permutations() {
        let p = generate(&GeneratorSpec::random(10, 2, 1)).unwrap();
        let t = held_karp_tsp(&p).unwrap();
        assert!((t.length - brute_force(&p)).abs() < 1e-9);
        assert!(t.is_permutation(10));
        assert_eq!(t.order[0], 0);
        assert!(t.order[1] < t.order[9]);
    }

    #[test]
    fn held_karp_is_deterministic_on_ties() {
        // the square has two optimal orientations; canonical form picks one
        assert_eq!(held_karp_tsp(&square()).unwrap().order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn separator_square_and_line() {
        let t = separator_tsp(&square()).unwrap();
        assert!((t.length - 4.0).abs() < 1e-9);
        let line = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (3.0, 0.0), (7.0, 0.0), (8.0, 0.0)]);
        assert!((separator_tsp(&line).unwrap().length - 16.0).abs() < 1e-9);
    }

    #[test]
    fn separator_matches_held_karp_small() {
        for seed in 0..12 {
            let n = 3 + (seed as usize % 8);
            let p = generate(&GeneratorSpec::random(n, 2, seed)).unwrap();
            let hk = held_karp_tsp(&p).unwrap();
            let rep = separator_tsp_detailed(&p, Tolerance::default()).unwrap();
            assert!((rep.tour.length - hk.length).abs() < 1e-9, "seed {seed}: {} vs {}", rep.tour.length, hk.length);
            assert!(rep.tour.is_permutation(n));
            assert!((tour_length(&p, &rep.tour.order) - rep.tour.length).abs() < 1e-12);
            assert!(rep.inside.len().max(rep.outside.len()) <= (7 * n).div_ceil(8));
        }
    }

    #[test]
    fn separator_rejects_sizes() {
        assert!(separator_tsp(&PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0)])).is_err());
        let big = generate(&GeneratorSpec::random(13, 2, 0)).unwrap();
        assert!(separator_tsp(&big).is_err());
    }

    #[test]
    fn path_system_covers_side() {
        let p = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        let d = distance_matrix(&p);
        let t = PathTable::new(&[0, 1, 2, 3], &d);
        assert_eq!(t.get(0b1111, 0, 3), 3.0);
        assert_eq!(t.path(0b1111, 0, 3), vec![0, 1, 2, 3]);
        // two paths 0..1 and 2..3
        let (c, sets) = t.path_system(&[(0, 1), (2, 3)], true);
        assert_eq!(c, 2.0);
        assert_eq!(sets, vec![0b0011, 0b1100]);
        // singleton path plus the rest
        let (c, _) = t.path_system(&[(0, 0), (1, 3)], false);
        assert_eq!(c, 2.0);
        assert_eq!(t.forest_bound(1), 3.0);
        assert_eq!(t.forest_bound(2), 2.0);
    }
}
