//! Greedy ε-nets and the three dimension estimators.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{dist_sq, Point};
use crate::par;
use crate::pointgen::PointSet;
use crate::regression::ols;
use crate::spatial::HashGrid;

/// Relative slack on net admission. Relative so that scaling the input and
/// the radius together never changes a decision.
pub(crate) const REL_SLACK: f64 = 1e-9;

/// r2 below this marks an estimate as unreliable.
pub const MIN_RELIABLE_R2: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    /// Indices into the input pointset, in admission order.
    pub indices: Vec<usize>,
    pub epsilon: f64,
}

impl Net {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn points(&self, p: &PointSet) -> Vec<Point> {
        self.indices.iter().map(|&i| p.points[i].clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetOrder {
    /// Lexicographic by coordinates.
    Lexicographic,
    /// Input order.
    Given,
    /// Uniform shuffle from a ChaCha8 stream.
    Random(u64),
}

fn ordering(p: &PointSet, order: &NetOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    match order {
        NetOrder::Lexicographic => idx.sort_by(|&a, &b| p.points[a].lex_cmp(&p.points[b]).then(a.cmp(&b))),
        NetOrder::Given => {}
        NetOrder::Random(seed) => idx.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed)),
    }
    idx
}

pub fn build_epsilon_net(p: &PointSet, eps: f64, order: &NetOrder) -> Result<Net> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::OutOfRange(format!("eps must be positive, got {eps}")));
    }
    let threshold = eps * eps * (1.0 - REL_SLACK);
    let mut grid = HashGrid::new(eps, p.dim);
    let mut indices = Vec::new();
    for i in ordering(p, order) {
        let q = &p.points[i];
        if grid.any_within(&p.points, q, threshold, eps).is_none() {
            grid.insert(i, q);
            indices.push(i);
        }
    }
    Ok(Net { indices, epsilon: eps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetCheck {
    pub is_packing: bool,
    pub is_covering: bool,
    /// A pair of subset members closer than eps.
    pub packing_witness: Option<(usize, usize)>,
    /// A point of P farther than eps from every member.
    pub covering_witness: Option<usize>,
}

/// Exhaustive check of both net properties. Indices refer to `p`.
pub fn verify_net(p: &PointSet, subset: &[usize], eps: f64) -> NetCheck {
    let pts = &p.points;
    let mut packing_witness = None;
    'outer: for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            if dist_sq(pts[i].coords(), pts[j].coords()) < eps * eps * (1.0 - REL_SLACK) {
                packing_witness = Some((i.min(j), i.max(j)));
                break 'outer;
            }
        }
    }
    let cover_r = eps * (1.0 + REL_SLACK);
    let grid = HashGrid::build(pts, subset.iter().copied(), eps);
    let covering_witness = (0..pts.len()).find(|&i| grid.within(pts, &pts[i], cover_r).is_empty());
    NetCheck {
        is_packing: packing_witness.is_none(),
        is_covering: covering_witness.is_none(),
        packing_witness,
        covering_witness,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    FractalNet,
    BoxCounting,
    Doubling,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::FractalNet => "fractal_net",
            Method::BoxCounting => "box_counting",
            Method::Doubling => "doubling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub delta_hat: f64,
    pub method: Method,
    pub fit_r2: f64,
    /// `(scale, count)`; the scale is r/eps, 1/eps or r depending on the method.
    pub samples: Vec<(f64, f64)>,
    pub n: usize,
}

impl DimensionEstimate {
    pub fn is_reliable(&self) -> bool {
        self.fit_r2 >= MIN_RELIABLE_R2
    }

    pub fn csv_row(&self) -> String {
        format!("{},{:.6},{:.6},{}", self.method.name(), self.delta_hat, self.fit_r2, self.n)
    }
}

fn fit_log_log(method: Method, samples: Vec<(f64, f64)>, n: usize) -> Result<DimensionEstimate> {
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let fit = ols(&xs, &ys)?;
    Ok(DimensionEstimate {
        delta_hat: fit.slope.max(0.0),
        method,
        fit_r2: fit.r2,
        samples,
        n,
    })
}

/// Smallest nearest-neighbour distance.
fn min_spacing(p: &PointSet) -> f64 {
    let d = nn_distances(p);
    if d.is_empty() {
        return 0.0;
    }
    d.into_iter().fold(f64::INFINITY, f64::min)
}

/// Median nearest-neighbour distance. Equals the minimum on lattices.
fn median_spacing(p: &PointSet) -> f64 {
    let mut d = nn_distances(p);
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    d[(d.len() - 1) / 2]
}

fn nn_distances(p: &PointSet) -> Vec<f64> {
    let Some((lo, hi)) = p.bounds() else { return vec![] };
    let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    if extent == 0.0 {
        return vec![0.0];
    }
    // grid sized so an average cell holds a handful of points
    let cell = extent / (p.len() as f64).powf(1.0 / p.dim as f64).max(1.0);
    let grid = HashGrid::build(&p.points, 0..p.len(), cell);
    let per_point = par::map_range(p.len(), |i| {
        let mut r = cell;
        loop {
            let mut best = f64::INFINITY;
            grid.for_each_candidate(p.points[i].coords(), r, |j| {
                if j != i {
                    best = best.min(dist_sq(p.points[i].coords(), p.points[j].coords()));
                }
            });
            if best <= r * r || r > 2.0 * extent {
                return best.sqrt();
            }
            r *= 2.0;
        }
    });
    per_point.into_iter().filter(|d| d.is_finite()).collect()
}

/// Default scale pairs: `eps` at the median nearest-neighbour spacing (on a
/// lattice the net is then all of P) and `r = 2 eps * sqrt(2)^j` up to a quarter of the diameter, where
/// boundary saturation is still mild.
pub fn default_fractal_scales(p: &PointSet) -> Vec<(f64, f64)> {
    let diam = p.diameter();
    let s = median_spacing(p);
    if diam == 0.0 || s == 0.0 {
        return vec![(1.0, 2.0), (1.0, 4.0), (1.0, 8.0)];
    }
    let mut out: Vec<(f64, f64)> = (0..64)
        .map(|j| (s, 2.0 * s * 2f64.powf(0.5 * j as f64)))
        .take_while(|&(_, r)| r <= diam / 4.0)
        .collect();
    // tiny sets: fall back to three scales anyway
    while out.len() < 3 {
        let r = 2.0 * s * 2f64.powf(0.5 * out.len() as f64);
        out.push((s, r));
    }
    out
}

pub fn estimate_fractal_dimension(p: &PointSet, scales: &[(f64, f64)]) -> Result<DimensionEstimate> {
    if scales.len() < 3 {
        return Err(Error::InvalidInput(format!("need >= 3 scale pairs, got {}", scales.len())));
    }
    if let Some(&(e, r)) = scales.iter().find(|&&(e, r)| !(e > 0.0 && r >= 2.0 * e * (1.0 - REL_SLACK))) {
        return Err(Error::OutOfRange(format!("scale pair requires r >= 2 eps > 0, got ({e}, {r})")));
    }
    let counts = par::map(scales, |&(eps, r)| -> Result<(f64, f64)> {
        let net = build_epsilon_net(p, eps, &NetOrder::Lexicographic)?;
        Ok((r / eps, max_ball_count(p, &net.indices, r) as f64))
    });
    let mut samples = counts.into_iter().collect::<Result<Vec<_>>>()?;
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    fit_log_log(Method::FractalNet, samples, p.len())
}

/// max over members x of |N ∩ ball(x, r)|.
fn max_ball_count(p: &PointSet, net: &[usize], r: f64) -> usize {
    let grid = HashGrid::build(&p.points, net.iter().copied(), r);
    let r_cmp = r * (1.0 + REL_SLACK);
    net.iter()
        .map(|&i| grid.within(&p.points, &p.points[i], r_cmp).len())
        .max()
        .unwrap_or(0)
}

/// Default box widths `L / sqrt(2)^j` from `L/2` down to twice the spacing,
/// where `L` is the largest extent plus one spacing, so a lattice of the
/// minimal spacing fills the anchored cube exactly.
pub fn default_box_scales(p: &PointSet) -> Vec<f64> {
    let Some((lo, hi)) = p.bounds() else { return vec![1.0, 0.5, 0.25] };
    let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let s = min_spacing(p);
    if extent == 0.0 || s == 0.0 {
        return vec![1.0, 0.5, 0.25];
    }
    let l = extent + s;
    let mut out: Vec<f64> = (2..128)
        .map(|j| l / 2f64.powf(0.5 * j as f64))
        .take_while(|&e| e >= 2.0 * s)
        .collect();
    while out.len() < 3 {
        out.push(l / 2f64.powf(0.5 * (out.len() + 2) as f64));
    }
    out
}

pub fn estimate_box_counting_dimension(p: &PointSet, eps_list: &[f64]) -> Result<DimensionEstimate> {
    if eps_list.len() < 3 {
        return Err(Error::InvalidInput(format!("need >= 3 scales, got {}", eps_list.len())));
    }
    if let Some(e) = eps_list.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::OutOfRange(format!("box width must be positive, got {e}")));
    }
    let lo = p.bounds().map(|b| b.0).unwrap_or_default();
    let counts = par::map(eps_list, |&eps| {
        let mut cells: Vec<Vec<i64>> = p
            .points
            .iter()
            .map(|q| q.coords().iter().zip(&lo).map(|(x, l)| ((x - l) / eps).floor() as i64).collect())
            .collect();
        cells.sort_unstable();
        cells.dedup();
        (1.0 / eps, cells.len() as f64)
    });
    let mut samples = counts;
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    fit_log_log(Method::BoxCounting, samples, p.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingBudget {
    pub centers: usize,
    pub radii: usize,
    pub seed: u64,
}

impl Default for DoublingBudget {
    fn default() -> Self {
        Self {
            centers: 16,
            radii: 8,
            seed: 0,
        }
    }
}

/// λ̂ = log2 of the largest greedy half-radius cover over sampled balls.
/// Samples are `(r, cover count)` for the worst center at each radius.
pub fn estimate_doubling_dimension(p: &PointSet, budget: &DoublingBudget) -> Result<DimensionEstimate> {
    if p.len() < 2 {
        return Err(Error::InvalidInput("doubling estimate needs at least 2 points".into()));
    }
    let mut centers: Vec<usize> = (0..p.len()).collect();
    centers.shuffle(&mut ChaCha8Rng::seed_from_u64(budget.seed));
    centers.truncate(budget.centers.max(1));
    centers.sort_unstable();
    let diam = p.diameter();
    let s = min_spacing(p);
    let radii: Vec<f64> = (0..budget.radii.max(1))
        .map(|j| diam / 2f64.powi(j as i32))
        .filter(|&r| r >= s)
        .collect();
    let radii = if radii.is_empty() { vec![diam] } else { radii };
    let samples: Vec<(f64, f64)> = par::map(&radii, |&r| {
        let grid = HashGrid::build(&p.points, 0..p.len(), r);
        let r_cmp = r * (1.0 + REL_SLACK);
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut worst = 1;
        for &c in &centers {
            let mut members = grid.within(&p.points, &p.points[c], r_cmp);
            members.sort_unstable();
            // large radii often give every center the same ball
            let count = match seen.get(&members) {
                Some(&k) => k,
                None => {
                    let k = greedy_half_cover(p, &members, r_cmp / 2.0);
                    seen.insert(members, k);
                    k
                }
            };
            worst = worst.max(count);
        }
        (r, worst as f64)
    });
    let max_count = samples.iter().map(|s| s.1).fold(1.0, f64::max);
    Ok(DimensionEstimate {
        delta_hat: max_count.log2(),
        method: Method::Doubling,
        fit_r2: 1.0,
        samples,
        n: p.len(),
    })
}

/// Greedy set cover of `members` by balls of radius `half` centred at members.
/// Picks the largest marginal gain, lowest index on ties.
fn greedy_half_cover(p: &PointSet, members: &[usize], half: f64) -> usize {
    let local: Vec<Point> = members.iter().map(|&g| p.points[g].clone()).collect();
    let m = local.len();
    let grid = HashGrid::build(&local, 0..m, half);
    let covers: Vec<Vec<usize>> = local.iter().map(|q| grid.within(&local, q, half)).collect();
    let mut covered = vec![false; m];
    let mut gain: Vec<usize> = covers.iter().map(Vec::len).collect();
    let mut left = m;
    let mut used = 0;
    while left > 0 {
        let (best, _) = gain
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty");
        used += 1;
        for &a in &covers[best] {
            if !covered[a] {
                covered[a] = true;
                left -= 1;
                // the ball relation is symmetric, so covers[a] lists every
                // candidate that had a in its cover
                for &b in &covers[a] {
                    gain[b] -= 1;
                }
            }
        }
    }
    used
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointgen::{generate, GeneratorSpec};
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::from_xy(&xs.iter().map(|&x| (x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn net_examples() {
        let single = line(&[4.0]);
        assert_eq!(build_epsilon_net(&single, 1.0, &NetOrder::Lexicographic).unwrap().indices, vec![0]);

        let ten = line(&(0..10).map(f64::from).collect::<Vec<_>>());
        let net = build_epsilon_net(&ten, 3.0, &NetOrder::Given).unwrap();
        assert_eq!(net.indices, vec![0, 3, 6, 9]);

        let c1 = generate(&GeneratorSpec::carpet(1)).unwrap();
        assert_eq!(build_epsilon_net(&c1, 10.0, &NetOrder::Lexicographic).unwrap().len(), 1);

        assert!(build_epsilon_net(&ten, 0.0, &NetOrder::Given).is_err());
        let empty = PointSet::new(2, vec![], "e").unwrap();
        assert!(build_epsilon_net(&empty, 1.0, &NetOrder::Given).unwrap().is_empty());
    }

    #[test]
    fn verify_examples() {
        let two = line(&[0.0, 1.0]);
        let c = verify_net(&two, &[0, 1], 2.0);
        assert!(!c.is_packing);
        assert_eq!(c.packing_witness, Some((0, 1)));

        let far = line(&[0.0, 5.0]);
        let c = verify_net(&far, &[0], 2.0);
        assert!(!c.is_covering);
        assert_eq!(c.covering_witness, Some(1));
    }

    #[test]
    fn line_fractal_dimension() {
        let p = generate(&GeneratorSpec::line(1000)).unwrap();
        let est = estimate_fractal_dimension(&p, &default_fractal_scales(&p)).unwrap();
        assert!((0.9..=1.1).contains(&est.delta_hat), "{est:?}");
    }

    #[test]
    fn grid_fractal_dimension() {
        let p = generate(&GeneratorSpec::grid(64, 2)).unwrap();
        let est = estimate_fractal_dimension(&p, &default_fractal_scales(&p)).unwrap();
        assert!((1.9..=2.1).contains(&est.delta_hat), "{est:?}");
    }

    #[test]
    fn single_point_box_dimension_is_zero() {
        let p = line(&[3.0]);
        let est = estimate_box_counting_dimension(&p, &[1.0, 0.5, 0.25]).unwrap();
        assert_eq!(est.delta_hat, 0.0);
    }

    #[test]
    fn fractal_scales_are_validated() {
        let p = line(&[0.0, 1.0, 2.0]);
        assert!(estimate_fractal_dimension(&p, &[(1.0, 2.0), (0.5, 2.0)]).is_err());
        assert!(estimate_fractal_dimension(&p, &[(1.0, 1.0), (0.5, 2.0), (0.25, 2.0)]).is_err());
    }

    #[test]
    fn constant_counts_give_zero() {
        // all scales see the same two points
        let p = line(&[0.0, 100.0]);
        let est = estimate_fractal_dimension(&p, &[(0.5, 1.0), (0.25, 1.0), (0.125, 1.0)]).unwrap();
        assert_eq!(est.delta_hat, 0.0);
        assert!(!est.is_reliable());
    }

    #[test]
    fn doubling_examples() {
        let two = line(&[0.0, 1.0]);
        assert!(estimate_doubling_dimension(&two, &DoublingBudget::default()).unwrap().delta_hat <= 1.0);
        let l = generate(&GeneratorSpec::line(1000)).unwrap();
        let est = estimate_doubling_dimension(&l, &DoublingBudget::default()).unwrap();
        assert!((1.0..=3.0).contains(&est.delta_hat), "{est:?}");
        let c3 = generate(&GeneratorSpec::carpet(3)).unwrap();
        let est = estimate_doubling_dimension(&c3, &DoublingBudget::default()).unwrap();
        assert!((1.5..=4.0).contains(&est.delta_hat), "{est:?}");
        assert!(estimate_doubling_dimension(&line(&[1.0]), &DoublingBudget::default()).is_err());
    }

    fn small_set() -> impl Strategy<Value = PointSet> {
        prop::collection::hash_set((0i32..40, 0i32..40), 1..60).prop_map(|s| {
            let mut v: Vec<(f64, f64)> = s.into_iter().map(|(x, y)| (x as f64 * 0.5, y as f64 * 0.5)).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            PointSet::from_xy(&v)
        })
    }

    proptest! {
        #[test]
        fn nets_always_verify(p in small_set(), eps in 0.3..8.0f64, seed in any::<u64>()) {
            for order in [NetOrder::Lexicographic, NetOrder::Given, NetOrder::Random(seed)] {
                let net = build_epsilon_net(&p, eps, &order).unwrap();
                let check = verify_net(&p, &net.indices, eps);
                prop_assert!(check.is_packing && check.is_covering, "{check:?}");
            }
        }

        #[test]
        fn net_size_is_monotone(p in small_set(), e1 in 0.3..4.0f64, f in 1.0..4.0f64) {
            let a = build_epsilon_net(&p, e1, &NetOrder::Lexicographic).unwrap();
            let b = build_epsilon_net(&p, e1 * f, &NetOrder::Lexicographic).unwrap();
            prop_assert!(a.len() >= b.len());
        }

        #[test]
        fn nets_are_scale_invariant(p in small_set(), eps in 0.3..6.0f64, c in 0.01..100.0f64) {
            let a = build_epsilon_net(&p, eps, &NetOrder::Lexicographic).unwrap();
            let b = build_epsilon_net(&p.scaled(c), eps * c, &NetOrder::Lexicographic).unwrap();
            prop_assert_eq!(a.indices, b.indices);
        }
    }
}
