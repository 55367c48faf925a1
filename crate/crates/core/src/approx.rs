//! Shifted-grid approximation schemes for minimum ε-cover and maximum
//! ε-packing, plus exhaustive oracles.
//!
//! Covers pick centers from the input (every point must lie within ε of a
//! chosen point). Packings pick points pairwise at least ε apart.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{dist_sq, Point};
use crate::nets::REL_SLACK;
use crate::par;
use crate::pointgen::PointSet;

pub const BRUTE_FORCE_MAX: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPartition {
    /// Shift vector in `{0, .., ell-1}^d`.
    pub shift_index: Vec<usize>,
    pub cell_side: f64,
    /// Lower corner of cell `[0, .., 0]`.
    pub origin: Vec<f64>,
    /// Cell key to point indices, ascending. Cells are left-closed,
    /// right-open boxes.
    pub cells: BTreeMap<Vec<i64>, Vec<usize>>,
}

impl GridPartition {
    pub fn cell_lower(&self, key: &[i64]) -> Vec<f64> {
        key.iter().zip(&self.origin).map(|(&k, &o)| o + k as f64 * self.cell_side).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    /// Point indices, ascending.
    pub chosen: Vec<usize>,
}

pub type CoverSolution = Selection;
pub type PackingSolution = Selection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    Cover,
    Packing,
}

/// Outcome of a shifted-grid run, with the size obtained for every shift so
/// the choice can be audited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtasReport {
    pub solution: Selection,
    pub shift_index: Vec<usize>,
    pub sizes_by_shift: Vec<(Vec<usize>, usize)>,
    /// Largest number of points in any single cell, over all shifts.
    pub max_cell_points: usize,
}

fn covers(a: &Point, b: &Point, eps: f64) -> bool {
    dist_sq(a.coords(), b.coords()) <= eps * eps * (1.0 + REL_SLACK)
}

fn conflicts(a: &Point, b: &Point, eps: f64) -> bool {
    dist_sq(a.coords(), b.coords()) < eps * eps * (1.0 - REL_SLACK)
}

pub fn is_cover(p: &PointSet, eps: f64, chosen: &[usize]) -> bool {
    p.points.iter().all(|x| chosen.iter().any(|&c| covers(&p.points[c], x, eps)))
}

pub fn is_packing(p: &PointSet, eps: f64, chosen: &[usize]) -> bool {
    chosen
        .iter()
        .enumerate()
        .all(|(a, &i)| chosen[a + 1..].iter().all(|&j| !conflicts(&p.points[i], &p.points[j], eps)))
}

fn check_params(eps: f64, ell: usize) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if ell == 0 {
        return Err(Error::InvalidInput("ell must be at least 1".into()));
    }
    Ok(())
}

fn shift_vectors(ell: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..ell).map(move |i| {
                    let mut w = v.clone();
                    w.push(i);
                    w
                })
            })
            .collect();
    }
    out
}

/// All `ell^d` partitions, shift vectors in lexicographic order. Shift `i`
/// moves the hyperplanes of axis `a` right by `i_a * cell_side / ell` from
/// the minimum corner of `p`.
pub fn shifted_partitions(p: &PointSet, eps: f64, ell: usize, cell_side: f64) -> Result<Vec<GridPartition>> {
    check_params(eps, ell)?;
    if !(cell_side > 0.0 && cell_side.is_finite()) {
        return Err(Error::InvalidInput(format!("cell_side must be positive, got {cell_side}")));
    }
    let min = p.bounds().map(|(lo, _)| lo).unwrap_or_else(|| vec![0.0; p.dim]);
    let step = cell_side / ell as f64;
    Ok(shift_vectors(ell, p.dim)
        .into_iter()
        .map(|shift| {
            let origin: Vec<f64> = min.iter().zip(&shift).map(|(&m, &i)| m + i as f64 * step).collect();
            let mut cells: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
            for (idx, x) in p.points.iter().enumerate() {
                let key = x
                    .coords()
                    .iter()
                    .zip(&origin)
                    .map(|(&c, &o)| ((c - o) / cell_side).floor() as i64)
                    .collect();
                cells.entry(key).or_default().push(idx);
            }
            GridPartition {
                shift_index: shift,
                cell_side,
                origin,
                cells,
            }
        })
        .collect())
}

/// Minimum cover of `idx` using centers from `idx`, or `None` past `cap`.
/// Iterative deepening that always branches on the first uncovered point.
fn min_cover(points: &[Point], idx: &[usize], eps: f64, cap: usize) -> Option<Vec<usize>> {
    let m = idx.len();
    let nbr: Vec<Vec<usize>> = (0..m)
        .map(|a| (0..m).filter(|&b| covers(&points[idx[a]], &points[idx[b]], eps)).collect())
        .collect();
    let widest = nbr.iter().map(Vec::len).max().unwrap_or(0);

    fn dfs(nbr: &[Vec<usize>], widest: usize, count: &mut [u32], uncovered: usize, left: usize, chosen: &mut Vec<usize>) -> bool {
        let Some(u) = count.iter().position(|&c| c == 0) else {
            return true;
        };
        if left * widest < uncovered {
            return false;
        }
        for &c in &nbr[u] {
            let mut fresh = 0;
            for &v in &nbr[c] {
                if count[v] == 0 {
                    fresh += 1;
                }
                count[v] += 1;
            }
            chosen.push(c);
            if dfs(nbr, widest, count, uncovered - fresh, left - 1, chosen) {
                return true;
            }
            chosen.pop();
            for &v in &nbr[c] {
                count[v] -= 1;
            }
        }
        false
    }

    if m == 0 {
        return Some(vec![]);
    }
    for size in 1..=cap.min(m) {
        let mut count = vec![0u32; m];
        let mut chosen = Vec::with_capacity(size);
        if dfs(&nbr, widest, &mut count, m, size, &mut chosen) {
            let mut out: Vec<usize> = chosen.into_iter().map(|a| idx[a]).collect();
            out.sort_unstable();
            return Some(out);
        }
    }
    None
}

/// Maximum packing among `idx` by branch and bound on the conflict graph.
fn max_packing(points: &[Point], idx: &[usize], eps: f64) -> Vec<usize> {
    let m = idx.len();
    let adj: Vec<Vec<bool>> = (0..m)
        .map(|a| (0..m).map(|b| a != b && conflicts(&points[idx[a]], &points[idx[b]], eps)).collect())
        .collect();

    fn rec(adj: &[Vec<bool>], cands: Vec<usize>, cur: &mut Vec<usize>, best: &mut Vec<usize>) {
        if cur.len() + cands.len() <= best.len() {
            return;
        }
        let Some(&v) = cands.first() else {
            *best = cur.clone();
            return;
        };
        let rest: Vec<usize> = cands[1..].iter().copied().filter(|&u| !adj[v][u]).collect();
        let isolated = rest.len() + 1 == cands.len();
        cur.push(v);
        rec(adj, rest, cur, best);
        cur.pop();
        if !isolated {
            rec(adj, cands[1..].to_vec(), cur, best);
        }
    }

    let mut best = Vec::new();
    rec(&adj, (0..m).collect(), &mut Vec::new(), &mut best);
    let mut out: Vec<usize> = best.into_iter().map(|a| idx[a]).collect();
    out.sort_unstable();
    out
}

/// Minimum-cardinality cover of a cell by its own points, searched in
/// increasing size up to `cap`.
pub fn exact_cell_cover(cell_points: &PointSet, eps: f64, cap: usize) -> Result<CoverSolution> {
    check_params(eps, 1)?;
    if cap == 0 {
        return Err(Error::InvalidInput("cap must be at least 1".into()));
    }
    let idx: Vec<usize> = (0..cell_points.len()).collect();
    min_cover(&cell_points.points, &idx, eps, cap)
        .map(|chosen| Selection { chosen })
        .ok_or(Error::CapExceeded {
            cap,
            cell_size: cell_points.len(),
        })
}

fn pick_best(results: Vec<(Vec<usize>, Vec<usize>)>, larger: bool) -> (Vec<usize>, Vec<usize>) {
    // Partitions arrive in lexicographic shift order, so the first of equal
    // size wins.
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    for r in results {
        let better = match &best {
            None => true,
            Some(b) if larger => r.1.len() > b.1.len(),
            Some(b) => r.1.len() < b.1.len(),
        };
        if better {
            best = Some(r);
        }
    }
    best.unwrap_or_default()
}

fn report(parts: &[GridPartition], results: Vec<(Vec<usize>, Vec<usize>)>, larger: bool) -> PtasReport {
    let sizes_by_shift = results.iter().map(|(s, c)| (s.clone(), c.len())).collect();
    let max_cell_points = parts
        .iter()
        .flat_map(|g| g.cells.values().map(Vec::len))
        .max()
        .unwrap_or(0);
    let (shift_index, chosen) = pick_best(results, larger);
    PtasReport {
        solution: Selection { chosen },
        shift_index,
        sizes_by_shift,
        max_cell_points,
    }
}

pub fn ptas_cover(p: &PointSet, eps: f64, ell: usize) -> Result<CoverSolution> {
    ptas_cover_detailed(p, eps, ell).map(|r| r.solution)
}

/// Best union of exact per-cell covers over all shifts of a grid with cells
/// of side `2 * ell * eps`.
pub fn ptas_cover_detailed(p: &PointSet, eps: f64, ell: usize) -> Result<PtasReport> {
    let parts = shifted_partitions(p, eps, ell, 2.0 * ell as f64 * eps)?;
    let results = par::map(&parts, |g| -> Result<(Vec<usize>, Vec<usize>)> {
        let mut chosen = Vec::new();
        for cell in g.cells.values() {
            let sol = min_cover(&p.points, cell, eps, cell.len()).ok_or(Error::CapExceeded {
                cap: cell.len(),
                cell_size: cell.len(),
            })?;
            chosen.extend(sol);
        }
        chosen.sort_unstable();
        Ok((g.shift_index.clone(), chosen))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(report(&parts, results, false))
}

pub fn ptas_packing(p: &PointSet, eps: f64, ell: usize) -> Result<PackingSolution> {
    ptas_packing_detailed(p, eps, ell).map(|r| r.solution)
}

/// Best union of exact per-cell packings over all shifts of a grid with
/// cells of side `ell * eps`, keeping only points at least `eps / 2` from
/// their cell's boundary.
pub fn ptas_packing_detailed(p: &PointSet, eps: f64, ell: usize) -> Result<PtasReport> {
    let side = ell as f64 * eps;
    let parts = shifted_partitions(p, eps, ell, side)?;
    let margin = 0.5 * eps * (1.0 - REL_SLACK);
    let results = par::map(&parts, |g| {
        let mut chosen = Vec::new();
        for (key, cell) in &g.cells {
            let lower = g.cell_lower(key);
            let interior: Vec<usize> = cell
                .iter()
                .copied()
                .filter(|&i| {
                    p.points[i]
                        .coords()
                        .iter()
                        .zip(&lower)
                        .all(|(&x, &lo)| x - lo >= margin && lo + side - x >= margin)
                })
                .collect();
            chosen.extend(max_packing(&p.points, &interior, eps));
        }
        chosen.sort_unstable();
        (g.shift_index.clone(), chosen)
    });
    Ok(report(&parts, results, true))
}

/// Exact optimum by walking every subset mask. Among optimal subsets the
/// smallest mask wins.
pub fn brute_force_opt(p: &PointSet, eps: f64, problem: Problem) -> Result<Selection> {
    check_params(eps, 1)?;
    let n = p.len();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::OutOfRange(format!("brute_force_opt supports n <= {BRUTE_FORCE_MAX}, got {n}")));
    }
    let pts = &p.points;
    let rel: Vec<u32> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| match problem {
                    Problem::Cover => covers(&pts[i], &pts[j], eps),
                    Problem::Packing => i != j && conflicts(&pts[i], &pts[j], eps),
                })
                .fold(0, |m, j| m | (1 << j))
        })
        .collect();
    let full: u32 = ((1u64 << n) - 1) as u32;
    // acc[mask] = union of covered sets (cover) or whether mask is
    // conflict-free (packing), built from mask minus its lowest bit.
    let mut acc = vec![0u32; 1 << n];
    let mut best: Option<u32> = None;
    if problem == Problem::Packing {
        acc[0] = 1;
        best = Some(0);
    } else if n == 0 {
        best = Some(0);
    }
    for mask in 1u32..=full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let (ok, val) = match problem {
            Problem::Cover => {
                let u = acc[rest as usize] | rel[low];
                (u == full, u)
            }
            Problem::Packing => {
                let ok = acc[rest as usize] == 1 && rel[low] & rest == 0;
                (ok, ok as u32)
            }
        };
        acc[mask as usize] = val;
        if ok {
            let better = match best {
                None => true,
                Some(b) => match problem {
                    Problem::Cover => mask.count_ones() < b.count_ones(),
                    Problem::Packing => mask.count_ones() > b.count_ones(),
                },
            };
            if better {
                best = Some(mask);
            }
        }
    }
    let mask = best.unwrap_or(0);
    Ok(Selection {
        chosen: (0..n).filter(|&i| mask & (1 << i) != 0).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointgen::{generate, GeneratorSpec};

    #[test]
    fn partition_counts() {
        let p = generate(&GeneratorSpec::random(30, 2, 1).with_scale(10.0)).unwrap();
        assert_eq!(shifted_partitions(&p, 1.0, 1, 2.0).unwrap().len(), 1);
        let parts = shifted_partitions(&p, 1.0, 3, 6.0).unwrap();
        assert_eq!(parts.len(), 9);
        for g in &parts {
            let mut all: Vec<usize> = g.cells.values().flatten().copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..30).collect::<Vec<_>>());
        }
    }

    #[test]
    fn cell_cover_examples() {
        let one = PointSet::from_xy(&[(0.0, 0.0), (0.5, 0.0), (0.0, 0.5)]);
        assert_eq!(exact_cell_cover(&one, 1.0, 3).unwrap().chosen.len(), 1);
        let two = PointSet::from_xy(&[(0.0, 0.0), (0.2, 0.0), (3.0, 0.0), (3.2, 0.0)]);
        assert_eq!(exact_cell_cover(&two, 1.0, 4).unwrap().chosen.len(), 2);
        assert!(matches!(exact_cell_cover(&two, 1.0, 1), Err(Error::CapExceeded { .. })));
        let single = PointSet::from_xy(&[(5.0, 5.0)]);
        assert_eq!(exact_cell_cover(&single, 1.0, 1).unwrap().chosen, vec![0]);
    }

    #[test]
    fn cover_examples() {
        let cluster = PointSet::from_xy(&[(0.0, 0.0), (0.3, 0.1), (0.1, 0.4)]);
        for ell in 1..5 {
            assert_eq!(ptas_cover(&cluster, 1.0, ell).unwrap().chosen.len(), 1);
        }
        let isolated = PointSet::from_xy(&[(0.0, 0.0), (2.5, 0.0), (0.0, 2.5), (2.5, 2.5)]);
        assert_eq!(ptas_cover(&isolated, 1.0, 4).unwrap().chosen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn packing_examples() {
        let single = PointSet::from_xy(&[(1.0, 1.0)]);
        assert_eq!(ptas_packing(&single, 1.0, 3).unwrap().chosen, vec![0]);
        let close = PointSet::from_xy(&[(0.0, 0.0), (0.5, 0.0)]);
        assert_eq!(ptas_packing(&close, 1.0, 3).unwrap().chosen.len(), 1);
        let line: Vec<(f64, f64)> = (0..8).map(|i| (i as f64, 0.0)).collect();
        let line = PointSet::from_xy(&line);
        assert_eq!(brute_force_opt(&line, 1.0, Problem::Packing).unwrap().chosen.len(), 8);
        let got = ptas_packing(&line, 1.0, 4).unwrap().chosen.len();
        assert!(got as f64 >= 0.5 * 8.0);
    }

    #[test]
    fn oracle_examples() {
        let cluster = PointSet::from_xy(&[(0.0, 0.0), (0.3, 0.1), (0.1, 0.4)]);
        assert_eq!(brute_force_opt(&cluster, 1.0, Problem::Cover).unwrap().chosen, vec![0]);
        assert!(brute_force_opt(&PointSet::from_xy(&[]), 1.0, Problem::Cover).unwrap().chosen.is_empty());
    }

    #[test]
    fn bounds_hold_on_random_instances() {
        for seed in 0..10 {
            let p = generate(&GeneratorSpec::random(14, 2, seed).with_scale(6.0)).unwrap();
            let opt_c = brute_force_opt(&p, 1.0, Problem::Cover).unwrap().chosen.len();
            let opt_p = brute_force_opt(&p, 1.0, Problem::Packing).unwrap().chosen.len();
            let c = ptas_cover(&p, 1.0, 4).unwrap();
            let k = ptas_packing(&p, 1.0, 4).unwrap();
            assert!(is_cover(&p, 1.0, &c.chosen));
            assert!(is_packing(&p, 1.0, &k.chosen));
            assert!(c.chosen.len() as f64 <= 1.5 * opt_c as f64);
            // (1 - d/l) with d = 2, l = 4
            assert!(k.chosen.len() as f64 >= (1.0 - 2.0 / 4.0) * opt_p as f64);
        }
    }
}
