//! k-independent set of unit balls: brute force and separator-guided divide
//! and conquer.
//!
//! The recursive solver branches over spheres whose centers come from the
//! candidate spheres on the current points (including single points) and
//! whose radii sit between consecutive tangency radii `|c - x| ± 1`. Each
//! branch guesses the solution balls `X` that cross the sphere, then splits
//! the remaining budget between the strictly-inside and strictly-outside
//! sub-instances, neither of which may receive more than
//! `min(k - 1, floor(7k/8))` balls. The number of guessed crossing balls
//! deepens 2, 4, ... up to `k`, at which point the search is exhaustive.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Tolerance};
use crate::par;
use crate::pointgen::PointSet;
use crate::separator::candidate_spheres;

pub const BRUTE_FORCE_MAX: usize = 25;
pub const SEPARATOR_IS_MAX: usize = 20;

const DISJOINT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitBallInstance {
    pub centers: PointSet,
    /// Whether balls at center distance exactly 2 count as disjoint.
    pub allow_tangent: bool,
}

impl UnitBallInstance {
    pub fn new(centers: PointSet) -> Result<Self> {
        if centers.dim < 2 {
            return Err(Error::OutOfRange(format!("unit ball instances need d >= 2, got {}", centers.dim)));
        }
        Ok(Self {
            centers,
            allow_tangent: true,
        })
    }

    pub fn with_tangency(mut self, allow: bool) -> Self {
        self.allow_tangent = allow;
        self
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn disjoint(&self, i: usize, j: usize) -> bool {
        let d = self.centers.points[i].dist(&self.centers.points[j]);
        if self.allow_tangent {
            d >= 2.0 - DISJOINT_SLACK
        } else {
            d > 2.0 + DISJOINT_SLACK
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ISolution {
    /// Center indices, ascending.
    pub chosen: Vec<usize>,
}

pub fn is_independent(inst: &UnitBallInstance, chosen: &[usize]) -> bool {
    chosen
        .iter()
        .enumerate()
        .all(|(a, &i)| chosen[a + 1..].iter().all(|&j| i != j && inst.disjoint(i, j)))
}

/// First disjoint k-subset in lexicographic order.
pub fn brute_force_independent_set(inst: &UnitBallInstance, k: usize) -> Result<Option<ISolution>> {
    let n = inst.len();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::OutOfRange(format!("brute force supports n <= {BRUTE_FORCE_MAX}, got {n}")));
    }
    if k > n {
        return Ok(None);
    }
    if k == 0 {
        return Ok(Some(ISolution { chosen: vec![] }));
    }
    let mut stack = Vec::with_capacity(k);
    let found = extend(inst, k, 0, &mut stack);
    Ok(found.then_some(ISolution { chosen: stack }))
}

fn extend(inst: &UnitBallInstance, k: usize, from: usize, stack: &mut Vec<usize>) -> bool {
    if stack.len() == k {
        return true;
    }
    for i in from..inst.len() {
        if inst.len() - i < k - stack.len() {
            return false;
        }
        if stack.iter().all(|&j| inst.disjoint(i, j)) {
            stack.push(i);
            if extend(inst, k, i + 1, stack) {
                return true;
            }
            stack.pop();
        }
    }
    false
}

/// Counters gathered during a separator search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsStats {
    pub nodes: u64,
    /// Largest crossing-guess budget any node needed.
    pub max_h: usize,
    /// Largest `k_child / k` handed to a recursive call.
    pub max_child_ratio: f64,
    /// Largest budget a child may receive, as a fraction of `k`, under the
    /// 1/8 balance fraction. `max_child_ratio` never exceeds it.
    pub ratio_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsReport {
    pub solution: Option<ISolution>,
    pub stats: IsStats,
}

pub fn separator_independent_set(inst: &UnitBallInstance, k: usize) -> Result<Option<ISolution>> {
    separator_independent_set_detailed(inst, k, Tolerance::default()).map(|r| r.solution)
}

pub fn separator_independent_set_detailed(inst: &UnitBallInstance, k: usize, tol: Tolerance) -> Result<IsReport> {
    let n = inst.len();
    if n > SEPARATOR_IS_MAX {
        return Err(Error::OutOfRange(format!("separator_independent_set supports n <= {SEPARATOR_IS_MAX}, got {n}")));
    }
    let conf: Vec<u32> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && !inst.disjoint(i, j)).fold(0, |m, j| m | (1 << j)))
        .collect();
    let solver = Solver {
        inst,
        conf,
        tol,
        memo: Mutex::new(HashMap::new()),
        nodes: AtomicU64::new(0),
        max_h: AtomicUsize::new(0),
        max_ratio: Mutex::new(0.0),
    };
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let found = solver.solve(full, k);
    let solution = found.map(|m| ISolution {
        chosen: (0..n).filter(|&i| m & (1 << i) != 0).collect(),
    });
    let max_child_ratio = *solver.max_ratio.lock().expect("poisoned");
    Ok(IsReport {
        solution,
        stats: IsStats {
            nodes: solver.nodes.load(Ordering::Relaxed),
            max_h: solver.max_h.load(Ordering::Relaxed),
            max_child_ratio,
            ratio_limit: 7.0 / 8.0,
        },
    })
}

struct Branch {
    inside: u32,
    outside: u32,
    cross: u32,
}

struct Solver<'a> {
    inst: &'a UnitBallInstance,
    conf: Vec<u32>,
    tol: Tolerance,
    memo: Mutex<HashMap<(u32, usize), Option<u32>>>,
    nodes: AtomicU64,
    max_h: AtomicUsize,
    max_ratio: Mutex<f64>,
}

fn bits(m: u32) -> impl Iterator<Item = usize> {
    let mut m = m;
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(i)
    })
}

fn cap(k: usize) -> usize {
    (k - 1).min(7 * k / 8)
}

impl Solver<'_> {
    fn pts(&self) -> &[Point] {
        &self.inst.centers.points
    }

    fn solve(&self, q: u32, k: usize) -> Option<u32> {
        if k == 0 {
            return Some(0);
        }
        if (q.count_ones() as usize) < k {
            return None;
        }
        if let Some(&hit) = self.memo.lock().expect("poisoned").get(&(q, k)) {
            return hit;
        }
        self.nodes.fetch_add(1, Ordering::Relaxed);
        let result = self.solve_uncached(q, k);
        self.memo.lock().expect("poisoned").insert((q, k), result);
        result
    }

    fn solve_uncached(&self, q: u32, k: usize) -> Option<u32> {
        if k == 1 {
            return Some(q & q.wrapping_neg());
        }
        if bits(q).all(|i| self.conf[i] & q == 0) {
            return Some(bits(q).take(k).fold(0, |m, i| m | (1 << i)));
        }
        if k == 2 {
            return bits(q).find_map(|i| {
                let rest = q & !self.conf[i] & !((2u32 << i) - 1);
                (rest != 0).then(|| (1 << i) | (rest & rest.wrapping_neg()))
            });
        }
        if self.cell_bound(q) < k {
            return None;
        }
        let branches = self.branches(q);
        let mut prev = 0;
        let mut h = 2;
        loop {
            let hh = h.min(k);
            let lo = if prev == 0 { 0 } else { prev + 1 };
            let hit = par::find_map_first(&branches, |b| self.try_branch(b, k, lo, hh));
            if hit.is_some() {
                self.max_h.fetch_max(hh, Ordering::Relaxed);
                return hit;
            }
            if hh >= k {
                self.max_h.fetch_max(hh, Ordering::Relaxed);
                return None;
            }
            prev = hh;
            h *= 2;
        }
    }

    /// Number of occupied cells of side just under sqrt(2) (two centers in
    /// one cell always overlap), minimised over half-cell shifts.
    fn cell_bound(&self, q: u32) -> usize {
        let side = std::f64::consts::SQRT_2 * (1.0 - 1e-6);
        let d = self.inst.centers.dim.min(3);
        (0..1usize << d)
            .map(|shift| {
                let mut cells: Vec<Vec<i64>> = bits(q)
                    .map(|i| {
                        self.pts()[i]
                            .coords()
                            .iter()
                            .enumerate()
                            .map(|(ax, &x)| {
                                let off = if ax < d && shift & (1 << ax) != 0 { 0.5 * side } else { 0.0 };
                                ((x + off) / side).floor() as i64
                            })
                            .collect()
                    })
                    .collect();
                cells.sort_unstable();
                cells.dedup();
                cells.len()
            })
            .min()
            .unwrap_or(0)
    }

    /// Distinct (inside, outside, crossing) splits of `q`, ordered by center
    /// (lexicographic) then radius (ascending).
    fn branches(&self, q: u32) -> Vec<Branch> {
        let idx: Vec<usize> = bits(q).collect();
        let sub = self.inst.centers.subset(&idx);
        let mut centers: Vec<Point> = sub.points.clone();
        if sub.len() >= 2 {
            let max_def = (sub.dim + 1).min(3);
            if let Ok(c) = candidate_spheres(&sub, max_def, self.tol) {
                centers.extend(c.into_iter().map(|s| s.center));
            }
        }
        centers.sort_by(|a, b| a.lex_cmp(b));
        centers.dedup_by(|a, b| a.dist(b) <= self.tol.eps_geom);

        let t = self.tol.eps_geom;
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for c in &centers {
            let dists: Vec<f64> = idx.iter().map(|&i| c.dist(&self.pts()[i])).collect();
            let mut events: Vec<f64> = dists
                .iter()
                .flat_map(|&d| [d - 1.0, d + 1.0])
                .filter(|&r| r > 0.0)
                .collect();
            events.push(0.0);
            events.sort_by(f64::total_cmp);
            events.dedup();
            let mut radii: Vec<f64> = events.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            radii.push(events.last().copied().unwrap_or(0.0) + 1.0);
            for r in radii {
                let (mut inside, mut outside, mut cross) = (0u32, 0u32, 0u32);
                for (a, &i) in idx.iter().enumerate() {
                    let d = dists[a];
                    if d + 1.0 < r - t {
                        inside |= 1 << i;
                    } else if d - 1.0 > r + t {
                        outside |= 1 << i;
                    } else {
                        cross |= 1 << i;
                    }
                }
                if seen.insert((inside, outside)) {
                    out.push(Branch { inside, outside, cross });
                }
            }
        }
        out
    }

    fn try_branch(&self, b: &Branch, k: usize, lo: usize, hi: usize) -> Option<u32> {
        let cap = cap(k);
        let cross: Vec<usize> = bits(b.cross).collect();
        let mut found = None;
        for size in lo..=hi.min(cross.len()) {
            self.for_each_independent(&cross, size, &mut |x| {
                let blocked = bits(x).fold(x, |m, i| m | self.conf[i]);
                let a_in = b.inside & !blocked;
                let a_out = b.outside & !blocked;
                let rem = k - size;
                for k_in in 0..=rem.min(cap) {
                    let k_out = rem - k_in;
                    if k_out > cap
                        || (a_in.count_ones() as usize) < k_in
                        || (a_out.count_ones() as usize) < k_out
                    {
                        continue;
                    }
                    self.note_ratio(k_in.max(k_out), k);
                    let Some(s_in) = self.solve(a_in, k_in) else { continue };
                    let Some(s_out) = self.solve(a_out, k_out) else { continue };
                    found = Some(x | s_in | s_out);
                    return true;
                }
                false
            });
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn note_ratio(&self, child: usize, k: usize) {
        let r = child as f64 / k as f64;
        let mut g = self.max_ratio.lock().expect("poisoned");
        if r > *g {
            *g = r;
        }
    }

    /// Visits independent subsets of `items` of exactly `size` elements in
    /// lexicographic order until `f` returns true.
    fn for_each_independent(&self, items: &[usize], size: usize, f: &mut dyn FnMut(u32) -> bool) -> bool {
        fn rec(s: &Solver<'_>, items: &[usize], from: usize, left: usize, acc: u32, f: &mut dyn FnMut(u32) -> bool) -> bool {
            if left == 0 {
                return f(acc);
            }
            for a in from..items.len() {
                if items.len() - a < left {
                    break;
                }
                let i = items[a];
                if s.conf[i] & acc == 0 && rec(s, items, a + 1, left - 1, acc | (1 << i), f) {
                    return true;
                }
            }
            false
        }
        rec(self, items, 0, size, 0, f)
    }
}
