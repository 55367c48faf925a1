//! Solvers against independent oracles written from first principles.

// Index loops read closest to the textbook recurrences here.
#![allow(clippy::needless_range_loop)]

use fractal_geom::approx::{brute_force_opt, is_cover, is_packing, ptas_cover_detailed, ptas_packing_detailed, Problem};
use fractal_geom::geom::{l1_diamond, Segment};
use fractal_geom::indset::{separator_independent_set, UnitBallInstance};
use fractal_geom::rsmt::{exact_rsmt, rsmt_diamond_check, Rst};
use fractal_geom::spanner::{build_spanner, prune_shortcuts, verify_dilation};
use fractal_geom::tsp::{held_karp_tsp, separator_tsp, tour_length};
use fractal_geom::{generate, GeneratorSpec, Point, PointSet};

fn random(n: usize, seed: u64, scale: f64) -> PointSet {
    generate(&GeneratorSpec::random(n, 2, seed).with_scale(scale)).unwrap()
}

// Tours through every permutation of 1..n, fixing 0 first.
fn permutation_tsp(p: &PointSet) -> f64 {
    fn go(p: &PointSet, order: &mut Vec<usize>, used: &mut [bool], best: &mut f64) {
        if order.len() == p.len() {
            *best = best.min(tour_length(p, order));
            return;
        }
        for v in 1..p.len() {
            if !used[v] {
                used[v] = true;
                order.push(v);
                go(p, order, used, best);
                order.pop();
                used[v] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut used = vec![false; p.len()];
    used[0] = true;
    go(p, &mut vec![0], &mut used, &mut best);
    best
}

#[test]
fn tsp_matches_permutation_oracle() {
    for seed in 0..12 {
        let p = random(4 + seed as usize % 5, 100 + seed, 1.0);
        let want = permutation_tsp(&p);
        let hk = held_karp_tsp(&p).unwrap();
        let sep = separator_tsp(&p).unwrap();
        assert!((hk.length - want).abs() <= 1e-9, "seed {seed}: held-karp {} vs {want}", hk.length);
        assert!((sep.length - want).abs() <= 1e-9, "seed {seed}: separator {} vs {want}", sep.length);
        assert!((tour_length(&p, &sep.order) - sep.length).abs() <= 1e-9);
    }
}

// Steiner tree in the Hanan grid graph by Dreyfus-Wagner.
fn hanan_steiner(p: &PointSet) -> f64 {
    let mut xs: Vec<f64> = p.points.iter().map(|q| q.coords()[0]).collect();
    let mut ys: Vec<f64> = p.points.iter().map(|q| q.coords()[1]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let (w, h) = (xs.len(), ys.len());
    let m = w * h;
    let id = |i: usize, j: usize| i * h + j;
    let mut d = vec![vec![f64::INFINITY; m]; m];
    for (a, row) in d.iter_mut().enumerate() {
        row[a] = 0.0;
    }
    for i in 0..w {
        for j in 0..h {
            if i + 1 < w {
                let c = xs[i + 1] - xs[i];
                d[id(i, j)][id(i + 1, j)] = c;
                d[id(i + 1, j)][id(i, j)] = c;
            }
            if j + 1 < h {
                let c = ys[j + 1] - ys[j];
                d[id(i, j)][id(i, j + 1)] = c;
                d[id(i, j + 1)][id(i, j)] = c;
            }
        }
    }
    for k in 0..m {
        for a in 0..m {
            for b in 0..m {
                d[a][b] = d[a][b].min(d[a][k] + d[k][b]);
            }
        }
    }
    let terms: Vec<usize> = p
        .points
        .iter()
        .map(|q| {
            let i = xs.iter().position(|&x| x == q.coords()[0]).unwrap();
            let j = ys.iter().position(|&y| y == q.coords()[1]).unwrap();
            id(i, j)
        })
        .collect();
    let t = terms.len();
    let full = (1usize << t) - 1;
    let mut dp = vec![vec![f64::INFINITY; m]; 1 << t];
    for (k, &tv) in terms.iter().enumerate() {
        dp[1 << k][..m].copy_from_slice(&d[tv][..m]);
    }
    for s in 1..=full {
        if s.count_ones() < 2 {
            continue;
        }
        for v in 0..m {
            let mut sub = (s - 1) & s;
            while sub > 0 {
                dp[s][v] = dp[s][v].min(dp[sub][v] + dp[s ^ sub][v]);
                sub = (sub - 1) & s;
            }
        }
        for v in 0..m {
            let best = (0..m).map(|u| dp[s][u] + d[u][v]).fold(f64::INFINITY, f64::min);
            dp[s][v] = dp[s][v].min(best);
        }
    }
    dp[full][terms[0]]
}

#[test]
fn rsmt_matches_hanan_graph_steiner_tree() {
    for seed in 0..10 {
        let n = 3 + seed as usize % 4;
        let p = random(n, 200 + seed, 10.0);
        let t = exact_rsmt(&p, n - 2).unwrap();
        let want = hanan_steiner(&p);
        assert!((t.length - want).abs() <= 1e-9, "seed {seed}: {} vs {want}", t.length);
    }
    let cross = PointSet::from_xy(&[(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]);
    assert!((hanan_steiner(&cross) - 4.0).abs() < 1e-12);
}

// Samples a lattice inside each diamond and looks for a point strictly
// inside another.
fn sampled_diamonds_disjoint(t: &Rst) -> bool {
    let ds: Vec<(Point, f64)> = t.edges.iter().map(l1_diamond).collect();
    let inside = |c: &Point, r: f64, x: f64, y: f64| (x - c.coords()[0]).abs() + (y - c.coords()[1]).abs() < r * (1.0 - 1e-6);
    for (i, (ci, ri)) in ds.iter().enumerate() {
        let steps = 24;
        for a in 0..=steps {
            for b in 0..=steps {
                let x = ci.coords()[0] - ri + 2.0 * ri * a as f64 / steps as f64;
                let y = ci.coords()[1] - ri + 2.0 * ri * b as f64 / steps as f64;
                if !inside(ci, *ri, x, y) {
                    continue;
                }
                if ds.iter().enumerate().any(|(j, (cj, rj))| j != i && inside(cj, *rj, x, y)) {
                    return false;
                }
            }
        }
    }
    true
}

#[test]
fn diamond_check_agrees_with_sampling() {
    for seed in 0..10 {
        let n = 3 + seed as usize % 4;
        let t = exact_rsmt(&random(n, 300 + seed, 10.0), n - 2).unwrap();
        assert!(rsmt_diamond_check(&t));
        assert!(sampled_diamonds_disjoint(&t));
    }
    // Two long parallel rails one apart: a valid tree, far from minimal.
    let v = vec![Point::xy(0.0, 0.0), Point::xy(4.0, 0.0), Point::xy(0.0, 1.0), Point::xy(4.0, 1.0)];
    let segs = [
        Segment::new(v[0].clone(), v[1].clone()).unwrap(),
        Segment::new(v[2].clone(), v[3].clone()).unwrap(),
        Segment::new(v[0].clone(), v[2].clone()).unwrap(),
    ];
    let t = Rst::from_segments(v, vec![], &segs).unwrap();
    assert!(!rsmt_diamond_check(&t));
    assert!(!sampled_diamonds_disjoint(&t));
}

// Largest set of pairwise disjoint unit balls, over all subsets.
fn max_independent(p: &PointSet) -> usize {
    let n = p.len();
    let mut conflict = vec![0u32; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && p.points[i].dist(&p.points[j]) < 2.0 - 1e-9 {
                conflict[i] |= 1 << j;
            }
        }
    }
    (0u32..1 << n)
        .filter(|&s| (0..n).all(|i| s & (1 << i) == 0 || conflict[i] & s == 0))
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

#[test]
fn independent_set_matches_subset_oracle() {
    for seed in 0..16 {
        let n = 8 + seed as usize % 5;
        let p = random(n, 400 + seed, 5.0);
        let best = max_independent(&p);
        let inst = UnitBallInstance::new(p).unwrap();
        for k in 1..=5 {
            let got = separator_independent_set(&inst, k).unwrap();
            assert_eq!(got.is_some(), k <= best, "seed {seed} k {k} best {best}");
        }
    }
}

// Exact cover and packing sizes by enumerating subsets in size order.
fn subset_opt(p: &PointSet, eps: f64, problem: Problem) -> usize {
    let n = p.len();
    let sets = 0u32..1 << n;
    let chosen = |s: u32| (0..n).filter(|&i| s & (1 << i) != 0).collect::<Vec<_>>();
    match problem {
        Problem::Cover => sets.filter(|&s| is_cover(p, eps, &chosen(s))).map(u32::count_ones).min(),
        Problem::Packing => sets.filter(|&s| is_packing(p, eps, &chosen(s))).map(u32::count_ones).max(),
    }
    .unwrap() as usize
}

#[test]
fn ptas_against_subset_oracle() {
    let eps = 1.0;
    for seed in 0..8 {
        let p = random(12, 500 + seed, 4.0);
        for problem in [Problem::Cover, Problem::Packing] {
            let opt = subset_opt(&p, eps, problem);
            assert_eq!(brute_force_opt(&p, eps, problem).unwrap().chosen.len(), opt);
            let rep = match problem {
                Problem::Cover => ptas_cover_detailed(&p, eps, 4).unwrap(),
                Problem::Packing => ptas_packing_detailed(&p, eps, 4).unwrap(),
            };
            let size = rep.solution.chosen.len();
            // every shift is evaluated and the reported one is extremal
            assert_eq!(rep.sizes_by_shift.len(), 16);
            let sizes = rep.sizes_by_shift.iter().map(|s| s.1);
            match problem {
                Problem::Cover => {
                    assert!(is_cover(&p, eps, &rep.solution.chosen));
                    assert!(size >= opt);
                    assert_eq!(Some(size), sizes.min());
                }
                Problem::Packing => {
                    assert!(is_packing(&p, eps, &rep.solution.chosen));
                    assert!(size <= opt);
                    assert_eq!(Some(size), sizes.max());
                }
            }
        }
    }
}

fn floyd_dilation(p: &PointSet, edges: &[(usize, usize, f64)]) -> f64 {
    let n = p.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, w) in edges {
        d[u][v] = d[u][v].min(w);
        d[v][u] = d[v][u].min(w);
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                d[a][b] = d[a][b].min(d[a][k] + d[k][b]);
            }
        }
    }
    let mut worst: f64 = 1.0;
    for a in 0..n {
        for b in a + 1..n {
            worst = worst.max(d[a][b] / p.points[a].dist(&p.points[b]));
        }
    }
    worst
}

#[test]
fn dilation_matches_floyd_warshall() {
    for seed in 0..6 {
        let p = random(30 + 10 * seed as usize, 600 + seed, 1.0);
        for eps in [0.25, 1.0] {
            let g = build_spanner(&p, eps).unwrap();
            for h in [g.clone(), prune_shortcuts(&g, &p)] {
                let edges: Vec<_> = h.edges.iter().map(|e| (e.u, e.v, e.length)).collect();
                let want = floyd_dilation(&p, &edges);
                let got = verify_dilation(&h, &p).unwrap();
                assert!((got - want).abs() <= 1e-9 * want, "seed {seed} eps {eps}: {got} vs {want}");
            }
        }
    }
}
