use jacobi_sets::connectivity::{
    nonreduced_connectivity, pl_graph, reduced_connectivity, reduction_stats, StageTimings,
};
use jacobi_sets::fields::ScalarGrid;
use jacobi_sets::jacobi::{check_even_degree, extract_critical_edges, is_critical, kappa_linear};
use jacobi_sets::mesh::{Point2, Triangulation};
use jacobi_sets::simplicial::{betti01, nerve_of_critical_edges, strong_collapse};
use jacobi_sets::{Simplex, SimplicialComplex};
use proptest::prelude::*;

fn grid(n: usize, values: Vec<f64>) -> ScalarGrid {
    let h = 1.0 / (n - 1) as f64;
    ScalarGrid::new(n, n, [0.0, 0.0], [h, h], values).unwrap()
}

/// Two random fields on the same `n x n` lattice, `n` in `3..=max`.
fn field_pair(max: usize) -> impl Strategy<Value = (ScalarGrid, ScalarGrid)> {
    (3..=max).prop_flat_map(|n| {
        let vals = prop::collection::vec(-1.0f64..1.0, n * n);
        (vals.clone(), vals).prop_map(move |(f, g)| (grid(n, f), grid(n, g)))
    })
}

/// Gradient of the linear interpolant on a triangle, by Cramer's rule on
/// `[p1 - p0; p2 - p0] grad = [v1 - v0; v2 - v0]`.
fn gradient(p: [Point2; 3], v: [f64; 3]) -> (f64, f64) {
    let (e1, e2) = (p[1] - p[0], p[2] - p[0]);
    let (d1, d2) = (v[1] - v[0], v[2] - v[0]);
    let det = e1.x * e2.y - e1.y * e2.x;
    ((d1 * e2.y - d2 * e1.y) / det, (e1.x * d2 - e2.x * d1) / det)
}

fn random_complex() -> impl Strategy<Value = SimplicialComplex> {
    prop::collection::vec(1u16..(1 << 8), 1..7).prop_map(|masks| {
        SimplicialComplex::from_simplices(
            masks
                .into_iter()
                .map(|m| Simplex::new((0..8u32).filter(|b| m & (1 << b) != 0))),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_kappa_matches_gradient_oracle((f, g) in field_pair(7)) {
        let t = Triangulation::for_grid(&f);
        for e in t.interior_edges() {
            let nb = t.edge_neighborhood(e).unwrap();
            let k = kappa_linear(&nb, &f, &g).unwrap();
            let v2 = nb.v2.unwrap();
            for (value, tri) in [(k.v1, [nb.a, nb.b, nb.v1]), (k.v2, [nb.a, v2, nb.b])] {
                let pos = tri.map(|v| v.pos);
                let (fx, fy) = gradient(pos, tri.map(|v| f.at(v.id as usize)));
                let (gx, gy) = gradient(pos, tri.map(|v| g.at(v.id as usize)));
                let oracle = fx * gy - fy * gx;
                // Cancellation in the cross product limits accuracy to a few
                // ulps of |grad f| |grad g|.
                let scale = (fx.hypot(fy) * gx.hypot(gy)) * 64.0 * f64::EPSILON;
                prop_assert!((value - oracle).abs() <= 1e-12 * oracle.abs() + scale,
                    "edge {e}: {value} vs {oracle}");
            }
        }
    }

    #[test]
    fn power_of_two_scaling_keeps_critical_set(
        (f, g) in field_pair(7),
        a in -4i32..4,
        b in -4i32..4,
        flip in any::<bool>(),
    ) {
        let alpha = if flip { -(2f64.powi(a)) } else { 2f64.powi(a) };
        let beta = 2f64.powi(b);
        let scale = |s: &ScalarGrid, c: f64| {
            ScalarGrid::new(s.nx(), s.ny(), s.origin(), s.spacing(),
                s.values().iter().map(|v| v * c).collect()).unwrap()
        };
        let (fs, gs) = (scale(&f, alpha), scale(&g, beta));
        let t = Triangulation::for_grid(&f);
        for e in t.interior_edges() {
            let nb = t.edge_neighborhood(e).unwrap();
            let k = kappa_linear(&nb, &f, &g).unwrap();
            let ks = kappa_linear(&nb, &fs, &gs).unwrap();
            prop_assert_eq!(ks.v1, alpha * beta * k.v1);
            prop_assert_eq!(ks.v2, alpha * beta * k.v2);
            prop_assert_eq!(is_critical(&ks), is_critical(&k));
        }
    }

    #[test]
    fn jacobi_points_lie_on_link_polyline((f, g) in field_pair(8)) {
        let t = Triangulation::for_grid(&f);
        for r in extract_critical_edges(&f, &g, &t).unwrap() {
            let nb = t.edge_neighborhood(r.edge).unwrap();
            let m = nb.midpoint();
            let v2 = nb.v2.unwrap().pos;
            let d = r.point.distance_to_segment(nb.v1.pos, m)
                .min(r.point.distance_to_segment(m, v2));
            prop_assert!(d <= 1e-9, "edge {}: off the polyline by {d}", r.edge);
            prop_assert!((0.0..=1.0).contains(&r.lambda));
        }
    }

    #[test]
    fn random_fields_satisfy_parity_accounting_and_homotopy((f, g) in field_pair(9)) {
        let t = Triangulation::for_grid(&f);
        let records = extract_critical_edges(&f, &g, &t).unwrap();
        let degrees = check_even_degree(&records, &t);
        prop_assert!(degrees.holds());

        let nonreduced = nonreduced_connectivity(&records);
        let reduced = reduced_connectivity(&records).unwrap();
        let stats = reduction_stats(&records, &nonreduced, &reduced, StageTimings::default());
        prop_assert!(stats.is_ok());
        let mut r_nodes: Vec<_> = reduced.jacobi_points().iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
        let mut n_nodes: Vec<_> = nonreduced.jacobi_points().iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
        r_nodes.sort_unstable();
        n_nodes.sort_unstable();
        prop_assert_eq!(r_nodes, n_nodes);

        let pl = betti01(&pl_graph(&records, &t).to_complex());
        prop_assert_eq!(pl, betti01(&nerve_of_critical_edges(&records)));
        prop_assert_eq!(pl, betti01(&reduced.to_complex()));
    }

    #[test]
    fn strong_collapse_reaches_a_core(k in random_complex()) {
        let (core, trace) = strong_collapse(&k);
        prop_assert!(core.dominated_vertices().is_empty());
        prop_assert_eq!(betti01(&core), betti01(&k));
        prop_assert_eq!(trace.replay(&k).unwrap(), core.clone());
        let (again, second) = strong_collapse(&core);
        prop_assert!(second.moves.is_empty());
        prop_assert_eq!(again, core);
    }

    #[test]
    fn elementary_collapses_preserve_homology(k in random_complex()) {
        let before = (betti01(&k), k.euler_characteristic());
        let mut current = k;
        loop {
            let free = current
                .simplices()
                .find_map(|s| current.free_coface(s).map(|c| (s.clone(), c)));
            let Some((face, coface)) = free else { break };
            current.elementary_collapse(&face, &coface).unwrap();
            prop_assert_eq!((betti01(&current), current.euler_characteristic()), before);
        }
    }
}
