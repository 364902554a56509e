use std::time::Instant;

use igs_core::analysis::{
    conformal_dimension, counterexample_report, default_evidence_pairs, hausdorff_dimension, loewner_evidence,
    porosity_witness, remove_edge_subigs, removable_edge_check, walk_dimension, Certificate, CLP_GRID, POROSITY_BANDS,
    VERDICT_POSITIVE, WALK_GRID,
};
use igs_core::checks::structural_suite;
use igs_core::graph::{build_graph, enumerate_simple_paths, Graph};
use igs_core::igs::Igs;
use igs_core::io::{bundled, bundled_names};
use igs_core::modulus::{brute_force_modulus, linear_capacity, p_capacity_solve, Mode, DEFAULT_TOL};
use igs_core::tower::{Tower, DEFAULT_EDGE_BUDGET};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL_HAUSDORFF: f64 = 1e-12;
const TOL_CONFORMAL: f64 = 1e-9;
const RUNTIME_REPRODUCTION_S: f64 = 10.0;
const TOL_CLOSED_FORM: f64 = 1e-8;
const TOL_RESIDUAL: f64 = 1e-8;
const CLOSED_FORM_GRID: [f64; 4] = [1.25, 1.5, 2.0, 3.0];
const TOL_LEVEL_LAW: f64 = 1e-6;
const LEVEL_LAW_GRID: [f64; 2] = [1.5, 2.0];
const RUNTIME_LEVEL_LAW_S: f64 = 60.0;
const TOL_WALK: f64 = 1e-8;
const TOL_SUB_AGREEMENT: f64 = 2e-9;
const RANDOM_GRAPHS: usize = 25;
const RANDOM_SEED: u64 = 2024;
const MAX_RANDOM_EDGES: u64 = 16;
const ORACLE_GRID: [f64; 3] = [1.5, 2.0, 3.0];
const TOL_BRUTE: f64 = 1e-6;
const TOL_LINEAR: f64 = 1e-10;
const STRUCTURAL_LEVEL: usize = 3;
const EVIDENCE_M_MAX: usize = 2;
const EVIDENCE_BAND: [f64; 2] = [0.5, 2.0];
const EVIDENCE_SPREAD: f64 = 1.25;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn load(name: &str) -> Igs {
    bundled(name).expect("bundled example").igs
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn reproduction() -> Outcome {
    let start = Instant::now();
    let igs = load("counterexample");
    let qh = hausdorff_dimension(&igs).unwrap();
    let qh_err = (qh - 9f64.ln() / 4f64.ln()).abs();
    let cd = conformal_dimension(&igs, TOL_CONFORMAL).unwrap();
    let q_err = (cd.q - 1.5).abs();
    let rem = removable_edge_check(&igs, (4, 5), &CLP_GRID, DEFAULT_TOL).unwrap();
    let symmetric = rem.removable && rem.certificate == Some(Certificate::Symmetry);
    let report = counterexample_report(&igs, TOL_CONFORMAL);
    let positive = report.positive && report.verdict == VERDICT_POSITIVE;
    let seconds = start.elapsed().as_secs_f64();
    let passed =
        qh_err <= TOL_HAUSDORFF && q_err <= TOL_CONFORMAL && symmetric && positive && seconds < RUNTIME_REPRODUCTION_S;
    outcome(
        passed,
        format!(
            "|Q_H - log9/log4| = {qh_err:.1e}, |Q* - 1.5| = {q_err:.1e}, {{4,5}} symmetry = {symmetric}, \
             verdict = {:?}, {seconds:.2} s",
            report.verdict
        ),
    )
}

fn closed_forms() -> Outcome {
    let cases: [(&str, fn(f64) -> f64); 4] = [
        ("counterexample", |p| 8.0 * 4f64.powf(-p)),
        ("laakso_n2_l4", |p| 8.0 * 4f64.powf(-p)),
        ("laakso_space", |p| 4.0 * 2f64.powf(-p)),
        ("nonsym_n3_l4", |p| 3.0 * 4f64.powf(1.0 - p)),
    ];
    let mut worst_rel = 0f64;
    let mut worst_res = 0f64;
    for (name, f) in cases {
        let igs = load(name);
        let a = igs.glue_map(0, 0).to_vec();
        let b = igs.glue_map(0, 1).to_vec();
        for p in CLOSED_FORM_GRID {
            let r = p_capacity_solve(igs.base(), &a, &b, p, DEFAULT_TOL).unwrap();
            worst_rel = worst_rel.max(rel(r.value, f(p)));
            worst_res = worst_res.max(r.duality_residual);
        }
    }
    outcome(
        worst_rel <= TOL_CLOSED_FORM && worst_res <= TOL_RESIDUAL,
        format!("max relative error {worst_rel:.1e}, max duality residual {worst_res:.1e} over 4 systems x 4 exponents"),
    )
}

fn level_law() -> Outcome {
    let start = Instant::now();
    let igs = load("counterexample");
    let t = Tower::build(igs.clone(), 3, DEFAULT_EDGE_BUDGET).unwrap();
    let mut worst = 0f64;
    let mut sizes = Vec::new();
    for p in LEVEL_LAW_GRID {
        let base = p_capacity_solve(igs.base(), igs.glue_map(0, 0), igs.glue_map(0, 1), p, DEFAULT_TOL).unwrap().value;
        for m in [2usize, 3] {
            let g = t.graph(m).unwrap();
            let a = t.gluing_fiber(igs.glue_id(0, 0), m).unwrap();
            let b = t.gluing_fiber(igs.glue_id(0, 1), m).unwrap();
            let direct = p_capacity_solve(g, &a, &b, p, DEFAULT_TOL).unwrap().value;
            worst = worst.max(rel(direct, base.powi(m as i32)));
            if p == LEVEL_LAW_GRID[0] {
                sizes.push(g.edge_count());
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    outcome(
        worst <= TOL_LEVEL_LAW && sizes == [81, 729] && seconds < RUNTIME_LEVEL_LAW_S,
        format!("max relative error {worst:.1e} on G_2/G_3 with {sizes:?} edges, {seconds:.2} s"),
    )
}

fn walk_dimensions() -> Outcome {
    let mut equal = true;
    for name in ["laakso_n2_l4", "nonsym_n3_l4"] {
        for p in WALK_GRID {
            let w = walk_dimension(&load(name), p, TOL_WALK).unwrap();
            equal &= w.equality && (w.value - p).abs() <= TOL_WALK;
        }
    }
    let gap = 1.125f64.ln() / 4f64.ln();
    let mut worst_gap = 0f64;
    let mut strict = true;
    for p in WALK_GRID {
        let w = walk_dimension(&load("counterexample"), p, TOL_WALK).unwrap();
        worst_gap = worst_gap.max((w.value - p - gap).abs());
        strict &= !w.equality;
    }
    let loewner = walk_dimension(&load("probably_loewner"), 2.0, TOL_WALK).unwrap();
    outcome(
        equal && worst_gap <= TOL_WALK && strict && loewner.value > 2.0,
        format!(
            "d_w = p flags on laakso_n2_l4/nonsym_n3_l4 = {equal}, counterexample gap error {worst_gap:.1e}, \
             probably_loewner d_w2 = {:.6}",
            loewner.value
        ),
    )
}

fn sub_agreement_and_porosity() -> Outcome {
    let igs = load("counterexample");
    let sub = remove_edge_subigs(&igs, (4, 5)).unwrap();
    let q = conformal_dimension(&igs, TOL_CONFORMAL).unwrap().q;
    let q_sub = conformal_dimension(&sub, TOL_CONFORMAL).unwrap().q;
    let diff = (q - q_sub).abs();
    let t = Tower::new(igs);
    let st = Tower::new(sub);
    let w = porosity_witness(&t, &st, &POROSITY_BANDS).unwrap();
    let passed = diff <= TOL_SUB_AGREEMENT && w.nominal_verified;
    let note = if w.nominal_verified {
        String::new()
    } else {
        format!(
            "; the nominal witness edge at level m+2 shares a vertex with the sub-tower \
             (clearance 0), so only the depth-{} constant {} is certified",
            w.depth, w.constant
        )
    };
    outcome(
        passed,
        format!(
            "|Q* - Q*_sub| = {diff:.1e}, nominal constant {} verified = {}, corrected constant {} verified = {} \
             over {} centers{note}",
            w.nominal_constant,
            w.nominal_verified,
            w.constant,
            w.verified,
            w.entries.len()
        ),
    )
}

fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.gen_range(3..=9u64);
    let max_edges = (n * (n - 1) / 2).min(MAX_RANDOM_EDGES);
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
    let ka = rng.gen_range(1..=(n - 1).min(3));
    let kb = rng.gen_range(1..=(n - ka).min(3));
    (order[..ka].to_vec(), order[ka..ka + kb].to_vec())
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    let mut worst_brute = 0f64;
    let mut worst_linear = 0f64;
    for _ in 0..RANDOM_GRAPHS {
        let g = random_graph(&mut rng);
        let (a, b) = random_terminals(&mut rng, g.vertex_count());
        let paths = enumerate_simple_paths(&g, &a, &b, 100_000).unwrap();
        for p in ORACLE_GRID {
            let solved = p_capacity_solve(&g, &a, &b, p, DEFAULT_TOL).unwrap().value;
            let brute = brute_force_modulus(&g, &paths, p, Mode::Edge).unwrap().value;
            worst_brute = worst_brute.max(rel(solved, brute));
            if p == 2.0 {
                let (lin, _) = linear_capacity(&g, &a, &b).unwrap();
                worst_linear = worst_linear.max(rel(solved, lin)).max(rel(brute, lin));
            }
        }
    }
    outcome(
        worst_brute <= TOL_BRUTE && worst_linear <= TOL_LINEAR,
        format!(
            "{RANDOM_GRAPHS} graphs: max relative gap to brute force {worst_brute:.1e}, \
             to linear solve at p=2 {worst_linear:.1e}"
        ),
    )
}

fn structural() -> Outcome {
    let mut failures = Vec::new();
    let mut checks = 0;
    for name in bundled_names() {
        let t = Tower::build(load(name), STRUCTURAL_LEVEL, DEFAULT_EDGE_BUDGET).unwrap();
        for c in structural_suite(&t).unwrap() {
            checks += 1;
            if !c.passed {
                failures.push(format!("{name}/{}: {}", c.name, c.detail));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{checks} checks over {} examples at level {STRUCTURAL_LEVEL}", bundled_names().len())
    } else {
        format!("{} failing: {}", failures.len(), failures.join("; "))
    };
    outcome(failures.is_empty(), detail)
}

fn evidence() -> Outcome {
    let igs = load("counterexample");
    let q = conformal_dimension(&igs, TOL_CONFORMAL).unwrap().q;
    let t = Tower::new(igs);
    let pairs = default_evidence_pairs(&t, 1).unwrap();
    let ev = loewner_evidence(&t, 1, &pairs, q, EVIDENCE_M_MAX, DEFAULT_TOL).unwrap();
    let ok = ev.bands.iter().all(|b| {
        b.min >= EVIDENCE_BAND[0] && b.max <= EVIDENCE_BAND[1] && b.max / b.min <= EVIDENCE_SPREAD
    }) && !ev.bands.is_empty();
    let bands: Vec<String> =
        ev.bands.iter().map(|b| format!("{} [{:.6}, {:.6}]", b.label, b.min, b.max)).collect();
    outcome(
        ok,
        format!(
            "limit-space statements (CLP of the limit, non-attainment, Ahlfors regularity) are not reproducible at \
             desk scale; substitute ratio bands at p = Q* = {q:.9}, m = 1..{EVIDENCE_M_MAX}: {}",
            bands.join(", ")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("counterexample reproduction", reproduction),
        ("closed-form moduli", closed_forms),
        ("level-m law", level_law),
        ("walk dimensions", walk_dimensions),
        ("sub-IGS agreement and porosity", sub_agreement_and_porosity),
        ("oracle equivalence", oracle_equivalence),
        ("structural suite", structural),
        ("limit statements and evidence", evidence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!("{} {} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
}
