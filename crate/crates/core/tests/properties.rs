use proptest::prelude::*;

use fractal_geom::approx::{is_cover, is_packing, ptas_cover, ptas_packing};
use fractal_geom::geom::Tolerance;
use fractal_geom::indset::{is_independent, separator_independent_set, UnitBallInstance};
use fractal_geom::nets::{build_epsilon_net, verify_net, NetOrder};
use fractal_geom::pathdecomp::{build_path_decomposition_detailed, verify_path_decomposition};
use fractal_geom::spanner::{build_box_tree, build_spanner, is_shortcut, prune_shortcuts, verify_dilation, EdgeTag, SpannerGraph};
use fractal_geom::tsp::separator_tsp;
use fractal_geom::{generate, GeneratorSpec, Point, PointSet};

// Distinct points on a 1/64 lattice so that ties and collinear runs occur.
fn pointset(min: usize, max: usize, side: u32) -> impl Strategy<Value = PointSet> {
    prop::collection::btree_set((0..side * 64, 0..side * 64), min..=max).prop_map(|s| {
        let xy: Vec<(f64, f64)> = s.into_iter().map(|(x, y)| (x as f64 / 64.0, y as f64 / 64.0)).collect();
        PointSet::from_xy(&xy)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn box_tree_invariants(p in pointset(2, 60, 4)) {
        let t = build_box_tree(&p).unwrap();
        prop_assert!(t.len() < 2 * p.len());
        prop_assert_eq!(&t.root().members, &(0..p.len()).collect::<Vec<_>>());
        for (id, b) in t.nodes.iter().enumerate() {
            prop_assert_eq!(b.is_leaf(), b.members.len() == 1);
            prop_assert!(b.members.contains(&b.rep));
            for &m in &b.members {
                prop_assert!(b.cube.contains(&p.points[m]));
            }
            // minimal: the cube's side is the members' largest extent
            let extent = (0..2)
                .map(|k| {
                    let xs = b.members.iter().map(|&m| p.points[m].coords()[k]);
                    xs.clone().fold(f64::MIN, f64::max) - xs.fold(f64::MAX, f64::min)
                })
                .fold(0.0, f64::max);
            prop_assert!((b.size() - extent).abs() <= 1e-12);
            if b.is_leaf() {
                continue;
            }
            prop_assert!(b.children.len() >= 2);
            let mut union: Vec<usize> = b.children.iter().flat_map(|&c| t.nodes[c].members.clone()).collect();
            union.sort_unstable();
            prop_assert_eq!(&union, &b.members);
            let inherit = b.children.iter().filter(|&&c| t.nodes[c].rep == b.rep).count();
            prop_assert_eq!(inherit, 1);
            for &c in &b.children {
                prop_assert_eq!(t.nodes[c].father, Some(id));
                prop_assert!(c > id);
            }
        }
    }

    #[test]
    fn spanner_dilation_and_pruning(p in pointset(2, 50, 4), eps in prop::sample::select(vec![0.1, 0.5, 1.0])) {
        let g = build_spanner(&p, eps).unwrap();
        prop_assert!(verify_dilation(&g, &p).unwrap() <= 1.0 + eps + 1e-9);
        let gp = prune_shortcuts(&g, &p);
        for e in &gp.edges {
            prop_assert!(g.edges.contains(e));
        }
        // pruning keeps the graph connected
        prop_assert!(verify_dilation(&gp, &p).is_ok());
    }

    #[test]
    fn pruned_spanners_decompose(p in pointset(2, 60, 4)) {
        let g = prune_shortcuts(&build_spanner(&p, 1.0).unwrap(), &p);
        let rep = build_path_decomposition_detailed(&g, &p, Tolerance::default()).unwrap();
        let check = verify_path_decomposition(&g, &rep.decomposition);
        prop_assert!(check.valid, "{:?}", check.violation);
        prop_assert!(check.uncovered_vertices.is_empty());
        prop_assert_eq!(check.width, rep.decomposition.width);
    }

    #[test]
    fn nets_are_nets(p in pointset(2, 80, 4), eps in 0.05f64..1.0) {
        let net = build_epsilon_net(&p, eps, &NetOrder::Lexicographic).unwrap();
        let check = verify_net(&p, &net.indices, eps);
        prop_assert!(check.is_packing && check.is_covering, "{:?}", check);
    }

    #[test]
    fn ptas_outputs_are_feasible(p in pointset(2, 40, 6), eps in 0.5f64..1.5) {
        prop_assert!(is_cover(&p, eps, &ptas_cover(&p, eps, 3).unwrap().chosen));
        prop_assert!(is_packing(&p, eps, &ptas_packing(&p, eps, 3).unwrap().chosen));
    }

    #[test]
    fn independent_sets_are_sound(p in pointset(2, 14, 6), k in 1usize..5) {
        let inst = UnitBallInstance::new(p).unwrap();
        if let Some(s) = separator_independent_set(&inst, k).unwrap() {
            prop_assert_eq!(s.chosen.len(), k);
            prop_assert!(is_independent(&inst, &s.chosen));
        }
    }

    #[test]
    fn separator_tours_are_permutations(p in pointset(3, 8, 2)) {
        let t = separator_tsp(&p).unwrap();
        prop_assert!(t.is_permutation(p.len()));
    }
}

#[test]
fn parallel_edge_shortcut_prunes_the_later_edge() {
    let eps = 0.5;
    let d = eps / 40.0;
    // equal lengths: index order puts (0,1) first
    let p = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.0, d), (1.0, d)]);
    assert!(is_shortcut(&p.points[2], &p.points[3], &p.points[0], &p.points[1], eps));
    let g = SpannerGraph::from_pairs(&p, eps, [(0, 1, EdgeTag::E1), (2, 3, EdgeTag::E1)]);
    let kept: Vec<(usize, usize)> = prune_shortcuts(&g, &p).edges.iter().map(|e| (e.u, e.v)).collect();
    assert_eq!(kept, vec![(0, 1)]);
}

#[test]
fn shortcut_needs_matching_direction() {
    let (x, y) = (Point::xy(0.0, 0.0), Point::xy(1.0, 0.0));
    let (z, w) = (Point::xy(0.0, 0.001), Point::xy(0.0, 1.0));
    assert!(!is_shortcut(&x, &y, &z, &w, 1.0));
    assert!(is_shortcut(&x, &y, &x, &Point::xy(0.5, 0.0), 1.0));
}

// The dilation argument for pruning inducts over pairs by length, but a
// pair absent from G may route through a longer edge that was itself pruned
// in its favor. Pinned from a seeded instance where this happens.
#[test]
fn pruning_can_exceed_twice_eps() {
    let p = generate(&GeneratorSpec::random(182, 2, 4018)).unwrap();
    let g = build_spanner(&p, 0.5).unwrap();
    let gp = prune_shortcuts(&g, &p);
    assert!(verify_dilation(&g, &p).unwrap() <= 1.5);
    let d = verify_dilation(&gp, &p).unwrap();
    assert!(d > 2.0, "dilation {d}");
    let (x, y, w) = (20, 77, 130);
    assert!(g.edges.iter().any(|e| (e.u, e.v) == (x, y)));
    assert!(!gp.edges.iter().any(|e| (e.u, e.v) == (x, y)));
    assert!(!g.edges.iter().any(|e| (e.u, e.v) == (y, w) || (e.u, e.v) == (w, y)));
    assert!(is_shortcut(&p.points[x], &p.points[y], &p.points[x], &p.points[w], 0.5));
}

#[test]
fn generators_are_deterministic_and_round_trip() {
    for spec in ["carpet:2", "cantor:3:2", "grid:5:3", "line:17", "random:50:3:9@2.5"] {
        let spec: GeneratorSpec = spec.parse().unwrap();
        let a = generate(&spec).unwrap();
        assert_eq!(a, generate(&spec).unwrap());
        assert_eq!(PointSet::from_json(&a.to_json()).unwrap(), a);
    }
}
