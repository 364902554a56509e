use std::collections::BTreeMap;

use igs_core::checks::structural_suite;
use igs_core::graph::{build_graph, find_isomorphism, Path};
use igs_core::io::{bundled, bundled_names};
use igs_core::tower::{Item, Tower, DEFAULT_EDGE_BUDGET};
use igs_core::igs::Igs;
use igs_core::Error;

fn tower(name: &str, n: usize) -> Tower {
    Tower::build(bundled(name).unwrap().igs, n, DEFAULT_EDGE_BUDGET).unwrap()
}

/// Level-by-level replacement by label propagation over explicit
/// `(z, edge)` pairs: every pair starts in its own class and pairs glued at
/// a shared vertex repeatedly adopt the smaller class until nothing changes.
/// Returns per level the vertex count and the edge list with side labels.
fn naive_levels(igs: &Igs, top: usize) -> Vec<(usize, Vec<(u32, u32, [u32; 2])>)> {
    let g = igs.base();
    let nv = g.vertex_count();
    let base_edges: Vec<(u32, u32, [u32; 2])> =
        g.edges().iter().enumerate().map(|(j, &(a, b))| (a, b, igs.glue_table()[j])).collect();
    let mut levels = vec![(nv, base_edges.clone())];
    for _ in 1..top {
        let (count, edges) = levels.last().unwrap();
        let mut incident: Vec<Vec<(usize, u32)>> = vec![Vec::new(); *count];
        for (j, &(a, b, lab)) in edges.iter().enumerate() {
            incident[a as usize].push((j, lab[0]));
            incident[b as usize].push((j, lab[1]));
        }
        let mut class: Vec<usize> = (0..edges.len() * nv).collect();
        let mut relations = Vec::new();
        for inc in &incident {
            for w in inc.windows(2) {
                let (j0, m0) = w[0];
                let (j1, m1) = w[1];
                for (&z0, &z1) in igs.map(m0).iter().zip(igs.map(m1)) {
                    relations.push((j0 * nv + z0 as usize, j1 * nv + z1 as usize));
                }
            }
        }
        let mut changed = true;
        while changed {
            changed = false;
            for &(p, q) in &relations {
                let low = class[p].min(class[q]);
                if class[p] != low || class[q] != low {
                    class[p] = low;
                    class[q] = low;
                    changed = true;
                }
            }
        }
        let mut ids = BTreeMap::new();
        for &c in &class {
            let next = ids.len() as u32;
            ids.entry(c).or_insert(next);
        }
        let mut next_edges = Vec::new();
        for j in 0..edges.len() {
            for &(z1, z2, lab) in &base_edges {
                let a = ids[&class[j * nv + z1 as usize]];
                let b = ids[&class[j * nv + z2 as usize]];
                next_edges.push((a, b, lab));
            }
        }
        levels.push((ids.len(), next_edges));
    }
    levels
}

#[test]
fn counterexample_level_sizes() {
    let t = tower("counterexample", 3);
    let sizes: Vec<(usize, usize)> =
        (1..=3).map(|n| (t.graph(n).unwrap().vertex_count(), t.graph(n).unwrap().edge_count())).collect();
    assert_eq!(sizes, vec![(8, 9), (52, 81), (428, 729)]);
    assert_eq!(t.graph(2).unwrap().diameter(), Some(16));
}

#[test]
fn diamond_level_two_has_36_edges() {
    assert_eq!(tower("laakso_diamond", 2).graph(2).unwrap().edge_count(), 36);
}

#[test]
fn levels_match_label_propagation_oracle() {
    for name in bundled_names() {
        let t = tower(name, 3);
        let naive = naive_levels(t.igs(), 3);
        for (n, (count, edges)) in naive.iter().enumerate() {
            let g = t.graph(n + 1).unwrap();
            assert_eq!(g.vertex_count(), *count, "{name} level {}", n + 1);
            assert_eq!(g.edge_count(), edges.len(), "{name} level {}", n + 1);
            let ids: Vec<u64> = (0..*count as u64).collect();
            let pairs: Vec<(u64, u64)> = edges.iter().map(|&(a, b, _)| (a as u64, b as u64)).collect();
            let oracle = build_graph(&ids, &pairs).unwrap();
            if n < 2 {
                let relabeled = igs_core::graph::Graph::from_index_edges(g.vertex_count(), g.edges().to_vec()).unwrap();
                assert!(find_isomorphism(&oracle, &relabeled, &[]).is_some(), "{name} level {}", n + 1);
            }
        }
    }
}

#[test]
fn edge_projection_and_vertex_projection() {
    let t = tower("counterexample", 2);
    for j in 0..81 {
        assert_eq!(t.project(2, Item::Edge(j), 1).unwrap(), Item::Edge(j / 9));
    }
    let g1 = t.igs().base();
    let lvl = t.level(2).unwrap();
    let in_image = t.igs().image_membership();
    for (v, &(z, e)) in lvl.rep.iter().enumerate() {
        let proj = t.project(2, Item::Vertex(v as u32), 1).unwrap();
        let (lo, hi) = g1.edge(e);
        let m0 = t.igs().glue_id(e, 0) as usize;
        let m1 = t.igs().glue_id(e, 1) as usize;
        let expected = if in_image[m0][z as usize] {
            Item::Vertex(lo)
        } else if in_image[m1][z as usize] {
            Item::Vertex(hi)
        } else {
            Item::Edge(e)
        };
        assert_eq!(proj, expected);
    }
    assert!(matches!(t.project(3, Item::Edge(0), 1), Err(Error::LevelOutOfRange { .. })));
}

#[test]
fn sigma_image_of_shared_vertex_is_its_fiber() {
    let t = tower("counterexample", 2);
    let g1 = t.igs().base();
    let v4 = g1.index_of(4).unwrap();
    let e34 = g1.edge_by_ids(3, 4).unwrap();
    let e45 = g1.edge_by_ids(4, 5).unwrap();
    let a: Vec<u32> = t.sigma_embed(1, e34, 1).unwrap().vertices;
    let b: Vec<u32> = t.sigma_embed(1, e45, 1).unwrap().vertices;
    let mut common: Vec<u32> = a.iter().copied().filter(|x| b.contains(x)).collect();
    common.sort_unstable();
    assert_eq!(common, t.fiber(2, 1, &[v4]).unwrap());
    assert_eq!(common.len(), 2);
    let emb = t.sigma_embed(1, e34, 1).unwrap();
    assert_eq!(emb.edges.len(), 9);
}

#[test]
fn structural_suite_on_all_bundled_examples() {
    for name in bundled_names() {
        let t = tower(name, 3);
        for check in structural_suite(&t).unwrap() {
            assert!(check.passed, "{name}: {} {}", check.name, check.detail);
        }
    }
}

#[test]
fn scaled_distances_follow_the_ancestor_laws() {
    let t = tower("counterexample", 2);
    let g1 = t.igs().base();
    let one = g1.index_of(1).unwrap();
    let seven = g1.index_of(7).unwrap();
    let d1 = t.scaled_distance(1, Item::Vertex(one), Item::Vertex(seven)).unwrap();
    assert_eq!(d1.value(), 1.0);
    let a = t.fiber(2, 1, &[one]).unwrap();
    let b = t.fiber(2, 1, &[seven]).unwrap();
    for &x in &a {
        for &y in &b {
            assert_eq!(t.scaled_distance(2, Item::Vertex(x), Item::Vertex(y)).unwrap().value(), 1.0);
        }
    }
    let four = t.fiber(2, 1, &[g1.index_of(4).unwrap()]).unwrap();
    let d = t.scaled_distance(2, Item::Vertex(four[0]), Item::Vertex(four[1])).unwrap();
    assert!(d.value() <= 4.0 / 4.0);
    assert_eq!(t.scaled_distance(2, Item::Vertex(3), Item::Vertex(3)).unwrap().value(), 0.0);
}

#[test]
fn decompose_shortest_cross_path() {
    let t = tower("counterexample", 2);
    let g1 = t.igs().base();
    let a = [g1.index_of(1).unwrap()];
    let b = [g1.index_of(7).unwrap()];
    let fa = t.fiber(2, 1, &a).unwrap();
    let fb = t.fiber(2, 1, &b).unwrap();
    let g2 = t.graph(2).unwrap();
    let path = shortest_path(g2, fa[0], &fb);
    assert_eq!(path.len(), 16);
    let dec = t.decompose_path(1, 1, &path, &a, &b).unwrap();
    assert_eq!(dec.coarse.len(), 4);
    assert_eq!(dec.pieces.len(), 4);
    let fine_ne = 9;
    for (piece, &tile) in dec.pieces.iter().zip(&dec.tiles) {
        assert!(piece.edge_indices(g2).iter().all(|&j| j / fine_ne == tile));
    }

    let inside = t.sigma_embed(1, 0, 1).unwrap();
    let (lo, hi) = g1.edge(0);
    let tile_path = shortest_path(g2, inside.vertices[t.igs().glue_map(0, 0)[0] as usize], &t.fiber(2, 1, &[hi]).unwrap());
    let dec = t.decompose_path(1, 1, &tile_path, &[lo], &[hi]).unwrap();
    assert_eq!(dec.coarse.len(), 1);

    let wrong = Path { vertices: vec![fa[0]] };
    assert!(matches!(t.decompose_path(1, 1, &wrong, &a, &b), Err(Error::InvalidEndpoints(_))));
}

fn shortest_path(g: &igs_core::graph::Graph, from: u32, to: &[u32]) -> Path {
    let dist = g.bfs(to);
    let mut cur = from;
    let mut vertices = vec![cur];
    while dist[cur as usize] > 0 {
        cur = g.neighbors(cur).iter().map(|&(w, _)| w).find(|&w| dist[w as usize] + 1 == dist[cur as usize]).unwrap();
        vertices.push(cur);
    }
    Path::new(g, vertices).unwrap()
}

#[test]
fn budget_is_enforced() {
    let igs = bundled("counterexample").unwrap().igs;
    assert!(matches!(Tower::build(igs, 3, 700), Err(Error::BudgetExceeded { level: 3, needed: 729, budget: 700 })));
}
