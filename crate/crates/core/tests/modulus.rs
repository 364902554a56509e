use igs_core::graph::{build_graph, enumerate_simple_paths, Graph};
use igs_core::io::bundled;
use igs_core::modulus::{
    brute_force_modulus, check_conductive_uniformity, dual_exponent, level_modulus_check, linear_capacity,
    p_capacity_solve, replacement_density, replacement_flow, vertex_modulus, Density, Mode, DEFAULT_TOL,
};
use igs_core::tower::{Tower, DEFAULT_EDGE_BUDGET};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: [f64; 4] = [1.25, 1.5, 2.0, 3.0];

fn tower(name: &str, n: usize) -> Tower {
    Tower::build(bundled(name).unwrap().igs, n, DEFAULT_EDGE_BUDGET).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn indices(g: &Graph, ids: &[u64]) -> Vec<u32> {
    g.indices_of(ids).unwrap()
}

/// Connected random graph: a random spanning tree plus extra edges.
fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.gen_range(3..=9u64);
    let max_edges = (n * (n - 1) / 2).min(16);
    let mut edges: Vec<(u64, u64)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    let target = rng.gen_range(n - 1..=max_edges);
    while (edges.len() as u64) < target {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let e = (a.min(b), a.max(b));
        if a != b && !edges.iter().any(|&(x, y)| (x.min(y), x.max(y)) == e) {
            edges.push(e);
        }
    }
    let ids: Vec<u64> = (0..n).collect();
    build_graph(&ids, &edges).unwrap()
}

fn random_terminals(rng: &mut ChaCha8Rng, n: usize) -> (Vec<u32>, Vec<u32>) {
    let mut order: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let ka = rng.gen_range(1..=(n - 1).min(2));
    let kb = rng.gen_range(1..=(n - ka).min(2));
    (order[..ka].to_vec(), order[ka..ka + kb].to_vec())
}

#[test]
fn solver_matches_path_enumeration_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..25 {
        let g = random_graph(&mut rng);
        let (a, b) = random_terminals(&mut rng, g.vertex_count());
        let paths = enumerate_simple_paths(&g, &a, &b, 10_000).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let solved = p_capacity_solve(&g, &a, &b, p, DEFAULT_TOL).unwrap();
            let brute = brute_force_modulus(&g, &paths, p, Mode::Edge).unwrap();
            assert!(rel(solved.value, brute.value) < 1e-6, "p = {p}: {} vs {}", solved.value, brute.value);
            assert!(solved.duality_residual <= 10.0 * DEFAULT_TOL);
            if p == 2.0 {
                let (lin, _) = linear_capacity(&g, &a, &b).unwrap();
                assert!((solved.value - lin).abs() <= 1e-10 * lin.max(1.0));
            }
        }
    }
}

#[test]
fn closed_form_moduli_with_certificates() {
    let cases: [(&str, [u64; 2], [u64; 2], fn(f64) -> f64); 3] = [
        ("counterexample", [1, 2], [7, 8], |p| 8.0 * 4f64.powf(-p)),
        ("laakso_n2_l4", [1, 2], [7, 8], |p| 8.0 * 4f64.powf(-p)),
        ("laakso_space", [1, 2], [4, 5], |p| 4.0 * 2f64.powf(-p)),
    ];
    for (name, a, b, f) in cases {
        let igs = bundled(name).unwrap().igs;
        let g = igs.base();
        for p in GRID {
            let r = p_capacity_solve(g, &indices(g, &a), &indices(g, &b), p, DEFAULT_TOL).unwrap();
            assert!(rel(r.value, f(p)) < 1e-10, "{name} p = {p}");
            assert!(r.duality_residual <= 1e-9);
            assert!((r.flow.outflow(g) - 1.0).abs() <= DEFAULT_TOL);
            assert!(r.flow.interior_divergence(g) <= DEFAULT_TOL);
        }
    }
}

#[test]
fn conductive_uniformity_of_bundled_systems() {
    let report = check_conductive_uniformity(&bundled("counterexample").unwrap().igs, &GRID, 1e-8).unwrap();
    assert!(report.uniform);
    for pt in &report.points {
        assert!(rel(pt.modulus, 8.0 * 4f64.powf(-pt.p)) < 1e-10);
        assert!((pt.duality_product - 1.0).abs() < 1e-10);
    }
    let report = check_conductive_uniformity(&bundled("nonsym_n3_l4").unwrap().igs, &GRID, 1e-8).unwrap();
    assert!(report.uniform);
    for pt in &report.points {
        assert!(rel(pt.modulus, 3.0 * 4f64.powf(1.0 - pt.p)) < 1e-10);
    }
}

#[test]
fn modulus_strictly_decreases_in_p() {
    let report = check_conductive_uniformity(&bundled("probably_loewner").unwrap().igs, &[1.1, 1.5, 2.0, 3.0, 4.0], 1e-8)
        .unwrap();
    for w in report.points.windows(2) {
        assert!(w[0].modulus - w[1].modulus > 10.0 * DEFAULT_TOL);
    }
}

#[test]
fn replacement_density_and_flow_lift_the_optimum() {
    let t = tower("counterexample", 3);
    let g1 = t.igs().base();
    let a = indices(g1, &[1, 2]);
    let b = indices(g1, &[7, 8]);
    for p in [1.5, 2.0, 3.0] {
        let q = dual_exponent(p);
        let base = p_capacity_solve(g1, &a, &b, p, DEFAULT_TOL).unwrap();
        let m_p = base.value;
        let r_p = base.flow.energy(q);
        for m in 1..=2 {
            let rho = replacement_density(&t, 1, &base.density, p, m, 1e-8).unwrap();
            assert!(rel(rho.mass(p), m_p.powi(m as i32 + 1)) < 1e-9);
            let flow = replacement_flow(&t, 1, &base.flow, p, m, 1e-8).unwrap();
            let gm = t.graph(1 + m).unwrap();
            assert!(rel(flow.energy(q), r_p.powi(m as i32 + 1)) < 1e-9);
            assert!((flow.outflow(gm) - 1.0).abs() < 1e-9);
            // Lifted pair is again optimal for the lifted problem.
            let direct = p_capacity_solve(gm, &flow.source, &flow.sink, p, DEFAULT_TOL).unwrap();
            assert!(rel(direct.value, rho.mass(p)) < 1e-8);
            // Support stays inside the fiber of the level-1 support.
            let e1 = g1.edge_count();
            for (j, &r) in rho.values.iter().enumerate() {
                if r > 0.0 {
                    assert!(base.density.values[j / e1.pow(m as u32)] > 0.0);
                }
            }
        }
        let same = replacement_density(&t, 1, &base.density, p, 0, 1e-8).unwrap();
        assert_eq!(same, base.density);
    }
    let zero = Density { values: vec![0.0; 1] };
    assert!(replacement_density(&t, 1, &zero, 2.0, 1, 1e-8).is_err());
}

#[test]
fn level_law_on_the_counterexample_and_diamond() {
    let t = tower("counterexample", 3);
    for p in [1.5, 2.0] {
        for m in 1..=3 {
            let c = level_modulus_check(&t, 1, 0, p, m, 1e-6).unwrap();
            assert!(c.within_tol, "p = {p}, m = {m}: {}", c.relative_error);
        }
    }
    let half = level_modulus_check(&t, 1, 0, 1.5, 2, 1e-6).unwrap();
    assert!((half.direct - 1.0).abs() < 1e-8);

    let d = tower("laakso_diamond", 2);
    let g2 = d.graph(2).unwrap();
    let a = d.gluing_fiber(d.igs().glue_id(0, 0), 2).unwrap();
    let b = d.gluing_fiber(d.igs().glue_id(0, 1), 2).unwrap();
    let r = p_capacity_solve(g2, &a, &b, 2.0, DEFAULT_TOL).unwrap();
    assert!((r.value - 1.0 / 9.0).abs() < 1e-10);
}

#[test]
fn moduli_are_asymptotically_multiplicative() {
    let t = tower("counterexample", 2);
    let g1 = t.igs().base();
    let g2 = t.graph(2).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let m_p = 8.0 * 4f64.powf(-p);
        for (a, b) in [(vec![3u64], vec![6u64]), (vec![1, 2], vec![4]), (vec![1], vec![8])] {
            let a = indices(g1, &a);
            let b = indices(g1, &b);
            let level1 = p_capacity_solve(g1, &a, &b, p, DEFAULT_TOL).unwrap().value;
            let fa = t.fiber(2, 1, &a).unwrap();
            let fb = t.fiber(2, 1, &b).unwrap();
            let level2 = p_capacity_solve(g2, &fa, &fb, p, DEFAULT_TOL).unwrap().value;
            assert!(rel(level2, level1 * m_p) < 1e-6, "p = {p}");
        }
    }
}

#[test]
fn edge_and_vertex_modulus_are_comparable() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let g = random_graph(&mut rng);
        let (a, b) = random_terminals(&mut rng, g.vertex_count());
        for p in [1.5, 2.0, 3.0] {
            let edge = p_capacity_solve(&g, &a, &b, p, DEFAULT_TOL).unwrap().value;
            let vertex = vertex_modulus(&g, &a, &b, p).unwrap();
            let deg = g.max_degree() as f64;
            assert!(vertex <= 2.0 * edge * (1.0 + 1e-9));
            assert!(edge <= 2f64.powf(p) * deg * vertex * (1.0 + 1e-9));
        }
    }
    let igs = bundled("laakso_space").unwrap().igs;
    let g = igs.base();
    let v = vertex_modulus(g, &[0, 1], &[3, 4], 2.0).unwrap();
    assert!(v <= 2.0 && 1.0 <= 4.0 * 4.0 * v);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn capacity_is_homogeneous_in_the_density(scale in 0.1f64..10.0, p in 1.2f64..4.0, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng);
        let (a, b) = random_terminals(&mut rng, g.vertex_count());
        let r = p_capacity_solve(&g, &a, &b, p, DEFAULT_TOL).unwrap();
        let scaled = Density { values: r.density.values.iter().map(|x| x * scale).collect() };
        prop_assert!(rel(scaled.mass(p), scale.powf(p) * r.value) < 1e-12);
        prop_assert!(r.flow.interior_divergence(&g) <= DEFAULT_TOL);
        prop_assert!((r.flow.outflow(&g) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn potentials_obey_the_maximum_principle(p in 1.2f64..4.0, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng);
        let (a, b) = random_terminals(&mut rng, g.vertex_count());
        let r = p_capacity_solve(&g, &a, &b, p, DEFAULT_TOL).unwrap();
        prop_assert!(r.potential.values.iter().all(|&u| (-1e-12..=1.0 + 1e-12).contains(&u)));
    }
}

#[test]
fn exponents_near_one_match_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..25 {
        let g = random_graph(&mut rng);
        let (a, b) = random_terminals(&mut rng, g.vertex_count());
        let paths = enumerate_simple_paths(&g, &a, &b, 10_000).unwrap();
        for p in [1.05, 1.1, 1.2] {
            let solved = p_capacity_solve(&g, &a, &b, p, DEFAULT_TOL).unwrap();
            let brute = brute_force_modulus(&g, &paths, p, Mode::Edge).unwrap();
            assert!(rel(solved.value, brute.value) < 1e-6, "p = {p}: {} vs {}", solved.value, brute.value);
            assert!(solved.flow.interior_divergence(&g) <= DEFAULT_TOL);
        }
    }
}
