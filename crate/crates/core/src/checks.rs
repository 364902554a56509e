//! Exhaustive structural checks on built towers: edge counts, the
//! similarity-map properties SM1–SM3, the ancestor distance laws DL1–DL3,
//! degree preservation under doubling and flow conservation.

use serde::Serialize;

use crate::error::Result;
use crate::graph::UNREACHABLE;
use crate::igs::check_doubling;
use crate::modulus::{gluing_problems, p_capacity_solve, replacement_flow, uniformity_point, DEFAULT_TOL};
use crate::tower::{Item, Tower};

/// Exponent used by the flow-conservation check.
pub const CONSERVATION_P: f64 = 2.0;
/// Allowed divergence and outflow defect in the flow-conservation check.
pub const CONSERVATION_TOL: f64 = 1e-9;

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, failures: Vec<String>, tested: usize) -> Check {
        let passed = failures.is_empty();
        let detail = if passed {
            format!("{tested} cases")
        } else {
            format!("{} of {tested} cases failed; first: {}", failures.len(), failures[0])
        };
        Check { name: name.to_string(), passed, detail }
    }
}

/// `|E_n| = |E_1|^n` at every built level.
pub fn check_edge_counts(tower: &Tower) -> Result<Check> {
    let e1 = tower.igs().base().edge_count();
    let mut failures = Vec::new();
    for n in 1..=tower.top() {
        let got = tower.graph(n)?.edge_count();
        let want = e1.pow(n as u32);
        if got != want {
            failures.push(format!("level {n}: {got} edges, expected {want}"));
        }
    }
    Ok(Check::new("edge-count", failures, tower.top()))
}

/// SM1: every `σ_{e,m}` is injective, preserves adjacency both ways and
/// labels, and the images cover `V_{n+m}`.
pub fn check_sm1(tower: &Tower) -> Result<Check> {
    let ne1 = tower.igs().base().edge_count() as u32;
    let mut failures = Vec::new();
    let mut tested = 0;
    for n in 1..tower.top() {
        for m in 1..=tower.top() - n {
            let fine = tower.graph(n + m)?;
            let small = tower.graph(m)?;
            let mut covered = vec![false; fine.vertex_count()];
            for e in 0..tower.graph(n)?.edge_count() as u32 {
                tested += 1;
                let emb = tower.sigma_embed(n, e, m)?;
                let mut inverse = vec![u32::MAX; fine.vertex_count()];
                for (x, &y) in emb.vertices.iter().enumerate() {
                    if inverse[y as usize] != u32::MAX {
                        failures.push(format!("σ({e},{m}) at level {n} is not injective"));
                    }
                    inverse[y as usize] = x as u32;
                    covered[y as usize] = true;
                }
                let offset = e * ne1.pow(m as u32);
                for (j, &(a, b)) in small.edges().iter().enumerate() {
                    let image = offset + j as u32;
                    let (c, d) = fine.edge(image);
                    let (sa, sb) = (emb.vertices[a as usize], emb.vertices[b as usize]);
                    if (c, d) != (sa.min(sb), sa.max(sb)) {
                        failures.push(format!("σ({e},{m}) at level {n} moves edge {j} off its image"));
                        continue;
                    }
                    for x in [a, b] {
                        if tower.label(m, x, j as u32) != tower.label(n + m, emb.vertices[x as usize], image) {
                            failures.push(format!("σ({e},{m}) at level {n} changes a label on edge {j}"));
                        }
                    }
                }
                for (j, &(c, d)) in fine.edges().iter().enumerate() {
                    let (a, b) = (inverse[c as usize], inverse[d as usize]);
                    if a != u32::MAX && b != u32::MAX && (j as u32) / ne1.pow(m as u32) != e {
                        failures.push(format!("σ({e},{m}) at level {n}: edge {j} joins image vertices outside e·E_m"));
                    }
                }
            }
            if covered.iter().any(|c| !c) {
                failures.push(format!("σ images at level {n}, m = {m} do not cover V_{}", n + m));
            }
        }
    }
    Ok(Check::new("SM1", failures, tested))
}

/// SM2: images of `e` and `f` meet iff the edges share a vertex `v`, and
/// then in exactly the ancestors of `v`.
pub fn check_sm2(tower: &Tower) -> Result<Check> {
    let mut failures = Vec::new();
    let mut tested = 0;
    for n in 1..tower.top() {
        for m in 1..=tower.top() - n {
            let g = tower.graph(n)?;
            let images: Vec<Vec<u32>> = (0..g.edge_count() as u32)
                .map(|e| {
                    let mut v = tower.sigma_embed(n, e, m).map(|emb| emb.vertices)?;
                    v.sort_unstable();
                    Ok(v)
                })
                .collect::<Result<_>>()?;
            for e in 0..g.edge_count() {
                for f in e + 1..g.edge_count() {
                    tested += 1;
                    let common: Vec<u32> =
                        images[e].iter().copied().filter(|x| images[f].binary_search(x).is_ok()).collect();
                    let (a, b) = g.edge(e as u32);
                    let (c, d) = g.edge(f as u32);
                    let shared: Vec<u32> = [a, b].into_iter().filter(|v| *v == c || *v == d).collect();
                    let expected = match shared.as_slice() {
                        [] => Vec::new(),
                        [v] => tower.fiber(n + m, n, &[*v])?,
                        _ => unreachable!("simple graph"),
                    };
                    if common != expected {
                        failures.push(format!("level {n}, m = {m}: images of edges {e} and {f} meet wrongly"));
                    }
                }
            }
        }
    }
    Ok(Check::new("SM2", failures, tested))
}

/// SM3: the sets `e·E_m` partition `E_{n+m}` and project onto `e`.
pub fn check_sm3(tower: &Tower) -> Result<Check> {
    let mut failures = Vec::new();
    let mut tested = 0;
    for n in 1..tower.top() {
        for m in 1..=tower.top() - n {
            let mut owner = vec![u32::MAX; tower.graph(n + m)?.edge_count()];
            for e in 0..tower.graph(n)?.edge_count() as u32 {
                tested += 1;
                for j in tower.sigma_embed(n, e, m)?.edges {
                    if owner[j as usize] != u32::MAX {
                        failures.push(format!("edge {j} of level {} lies in two images", n + m));
                    }
                    owner[j as usize] = e;
                    if tower.project(n + m, Item::Edge(j), n)? != Item::Edge(e) {
                        failures.push(format!("edge {j} of level {} does not project to {e}", n + m));
                    }
                }
            }
            if owner.contains(&u32::MAX) {
                failures.push(format!("images do not cover E_{}", n + m));
            }
        }
    }
    Ok(Check::new("SM3", failures, tested))
}

/// DL1–DL3 over every ancestor pair at every pair of built levels.
/// Distances are compared in hops: DL1 as `d_{G_{n+m}} = L^m·d_{G_n}`,
/// DL2 and DL3 as `d_{G_{n+m}} ≤ C_diam·L^m`.
pub fn check_distance_laws(tower: &Tower) -> Result<Vec<Check>> {
    let Some(l) = tower.l_star() else {
        let skip = |name: &str| Check {
            name: name.to_string(),
            passed: false,
            detail: "no uniform scaling".into(),
        };
        return Ok(vec![skip("DL1"), skip("DL2"), skip("DL3")]);
    };
    let c_diam = tower.igs().base().diameter().unwrap_or(UNREACHABLE);
    let (mut f1, mut f2, mut f3) = (Vec::new(), Vec::new(), Vec::new());
    let (mut t1, mut t2, mut t3) = (0, 0, 0);
    for n in 1..=tower.top() {
        let coarse = tower.graph(n)?;
        let coarse_dist: Vec<Vec<u32>> = (0..coarse.vertex_count() as u32).map(|v| coarse.bfs(&[v])).collect();
        for m in 0..=tower.top() - n {
            let fine = tower.graph(n + m)?;
            let scale = l.pow(m as u32);
            let bound = c_diam * scale;
            let fibers: Vec<Vec<u32>> =
                (0..coarse.vertex_count() as u32).map(|v| tower.fiber(n + m, n, &[v])).collect::<Result<_>>()?;
            for (xn, fx) in fibers.iter().enumerate() {
                for &x in fx {
                    let dist = fine.bfs(&[x]);
                    for (yn, fy) in fibers.iter().enumerate() {
                        for &y in fy {
                            let d = dist[y as usize];
                            if xn != yn {
                                t1 += 1;
                                if d != coarse_dist[xn][yn] * scale {
                                    f1.push(format!("levels {n}+{m}: ancestors {x},{y} at {d} hops"));
                                }
                            } else {
                                t2 += 1;
                                if d > bound {
                                    f2.push(format!("levels {n}+{m}: ancestors {x},{y} of one vertex at {d} hops"));
                                }
                            }
                        }
                    }
                }
            }
            if m == 0 {
                continue;
            }
            for e in 0..coarse.edge_count() as u32 {
                let (a, b) = coarse.edge(e);
                let tile = tower.sigma_embed(n, e, m)?.vertices;
                for &x in &tile {
                    let dist = fine.bfs(&[x]);
                    for end in [a, b] {
                        for &hat in &fibers[end as usize] {
                            t3 += 1;
                            if dist[hat as usize] > bound {
                                f3.push(format!("levels {n}+{m}: tile vertex {x} is far from ancestor {hat}"));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(vec![Check::new("DL1", f1, t1), Check::new("DL2", f2, t2), Check::new("DL3", f3, t3)])
}

/// Under doubling, `deg(G_n) = deg(G_1)` at every built level.
pub fn check_degree_preservation(tower: &Tower) -> Result<Check> {
    if !check_doubling(tower.igs()).holds {
        return Ok(Check { name: "degree".into(), passed: true, detail: "not doubling; nothing to check".into() });
    }
    let d1 = tower.igs().base().max_degree();
    let mut failures = Vec::new();
    for n in 1..=tower.top() {
        let d = tower.graph(n)?.max_degree();
        if d != d1 {
            failures.push(format!("level {n}: degree {d}, expected {d1}"));
        }
    }
    Ok(Check::new("degree", failures, tower.top()))
}

/// Optimal flows of every gluing-fiber problem at every built level are
/// unit flows: outflow 1 and no divergence off the boundary sets. Under
/// doubling and uniformity the replacement lifts of the level-1 flows are
/// checked the same way.
pub fn check_flow_conservation(tower: &Tower) -> Result<Check> {
    let igs = tower.igs();
    let mut failures = Vec::new();
    let mut tested = 0;
    let verify = |label: String, out: f64, div: f64, failures: &mut Vec<String>| {
        if (out - 1.0).abs() > CONSERVATION_TOL || div > CONSERVATION_TOL {
            failures.push(format!("{label}: outflow {out}, divergence {div:.2e}"));
        }
    };
    let uniform = check_doubling(igs).holds
        && uniformity_point(igs, CONSERVATION_P, DEFAULT_TOL).map(|pt| pt.uniform).unwrap_or(false);
    for problem in gluing_problems(igs) {
        let base = p_capacity_solve(
            igs.base(),
            igs.map(problem.source_map),
            igs.map(problem.sink_map),
            CONSERVATION_P,
            DEFAULT_TOL,
        )?;
        for n in 1..=tower.top() {
            let g = tower.graph(n)?;
            let a = tower.gluing_fiber(problem.source_map, n)?;
            let b = tower.gluing_fiber(problem.sink_map, n)?;
            let r = p_capacity_solve(g, &a, &b, CONSERVATION_P, DEFAULT_TOL)?;
            tested += 1;
            verify(
                format!("level {n}, maps {}→{}", problem.source_map, problem.sink_map),
                r.flow.outflow(g),
                r.flow.interior_divergence(g),
                &mut failures,
            );
            if uniform && n > 1 {
                tested += 1;
                match replacement_flow(tower, 1, &base.flow, CONSERVATION_P, n - 1, CONSERVATION_TOL) {
                    Ok(lift) => verify(
                        format!("lift to level {n}, maps {}→{}", problem.source_map, problem.sink_map),
                        lift.outflow(g),
                        lift.interior_divergence(g),
                        &mut failures,
                    ),
                    Err(e) => failures.push(format!("lift to level {n}: {e}")),
                }
            }
        }
    }
    Ok(Check::new("flow-conservation", failures, tested))
}

/// Every structural check on `tower`.
pub fn structural_suite(tower: &Tower) -> Result<Vec<Check>> {
    let mut out = vec![
        check_edge_counts(tower)?,
        check_sm1(tower)?,
        check_sm2(tower)?,
        check_sm3(tower)?,
    ];
    out.extend(check_distance_laws(tower)?);
    out.push(check_degree_preservation(tower)?);
    out.push(check_flow_conservation(tower)?);
    Ok(out)
}
