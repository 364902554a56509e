//! Fundamental neighborhoods of tower edges and their equivalence classes.
//!
//! The fundamental neighborhood of an edge `e ∈ E_n` is the ball of radius 2
//! around `e` in `G_n`; the extended neighborhood has radius `10·C_diam`
//! with `C_diam = diam(G_1)`. Two neighborhoods are equivalent when their
//! extended neighborhoods are isomorphic by a map that sends central edge to
//! central edge and preserves every gluing label.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{find_isomorphism_with, Graph};
use crate::tower::Tower;

/// Fundamental-neighborhood radius.
pub const FUNDAMENTAL_RADIUS: u32 = 2;

/// Class statistics for levels `1..=up_to`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborhoodClasses {
    pub extended_radius: u32,
    pub fundamental_radius: u32,
    /// Number of distinct classes among the edges of each level.
    pub per_level: Vec<usize>,
    /// The same count when classifying by the radius-2 neighborhoods alone.
    pub fundamental_per_level: Vec<usize>,
    /// Classes first seen at each level.
    pub new_per_level: Vec<usize>,
    /// Distinct classes over all levels.
    pub total: usize,
    /// Class id of every edge, per level.
    #[serde(skip)]
    pub class_of_edge: Vec<Vec<usize>>,
}

impl NeighborhoodClasses {
    /// Whether the last two levels have the same extended class count.
    pub fn count_stabilized(&self) -> bool {
        last_two_equal(&self.per_level)
    }

    /// Whether the last two levels have the same fundamental class count.
    pub fn fundamental_stabilized(&self) -> bool {
        last_two_equal(&self.fundamental_per_level)
    }
}

fn last_two_equal(counts: &[usize]) -> bool {
    let k = counts.len();
    k >= 2 && counts[k - 1] == counts[k - 2]
}

/// A labeled neighborhood: induced subgraph, its central edge, per-edge
/// gluing labels `[label of local lo, label of local hi]` and stable
/// refinement colors.
struct Neighborhood {
    graph: Graph,
    center: (u32, u32),
    labels: Vec<[u32; 2]>,
    colors: Vec<u32>,
    key: Vec<u32>,
}

/// Shared interner so that refinement colors are comparable across
/// neighborhoods.
#[derive(Default)]
struct Colors {
    table: HashMap<(u32, Vec<[u32; 3]>), u32>,
}

impl Colors {
    fn intern(&mut self, prev: u32, signature: Vec<[u32; 3]>) -> u32 {
        let next = self.table.len() as u32;
        *self.table.entry((prev, signature)).or_insert(next)
    }

    /// Color refinement started from the distances to both central
    /// vertices, with neighbor colors paired with the edge labels.
    fn refine(&mut self, graph: &Graph, labels: &[[u32; 2]], center: (u32, u32)) -> (Vec<u32>, Vec<u32>) {
        let dx = graph.bfs(&[center.0]);
        let dy = graph.bfs(&[center.1]);
        let n = graph.vertex_count();
        let mut colors: Vec<u32> = (0..n).map(|v| self.intern(u32::MAX, vec![[dx[v], dy[v], 0]])).collect();
        let mut distinct = count_distinct(&colors);
        loop {
            let next: Vec<u32> = (0..n as u32)
                .map(|v| {
                    let mut sig: Vec<[u32; 3]> = graph
                        .neighbors(v)
                        .iter()
                        .map(|&(w, le)| {
                            let l = labels[le as usize];
                            let (mine, theirs) = if graph.edge(le).0 == v { (l[0], l[1]) } else { (l[1], l[0]) };
                            [colors[w as usize], mine, theirs]
                        })
                        .collect();
                    sig.sort_unstable();
                    self.intern(colors[v as usize], sig)
                })
                .collect();
            let d = count_distinct(&next);
            colors = next;
            if d == distinct {
                break;
            }
            distinct = d;
        }
        let mut key = colors.clone();
        key.sort_unstable();
        (colors, key)
    }
}

fn count_distinct<T: Ord + Copy>(items: &[T]) -> usize {
    let mut c = items.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn neighborhood(tower: &Tower, n: usize, j: u32, radius: u32, interner: &mut Colors) -> Result<Neighborhood> {
    let g = tower.graph(n)?;
    let (x, y) = g.edge(j);
    let dist = g.bfs(&[x, y]);
    let keep: Vec<u32> = (0..g.vertex_count() as u32).filter(|&v| dist[v as usize] <= radius).collect();
    let (graph, origin) = g.induced(&keep);
    let local = |v: u32| keep.binary_search(&v).expect("central vertex kept") as u32;
    let labels: Vec<[u32; 2]> = origin
        .iter()
        .map(|&oj| {
            let (a, b) = g.edge(oj);
            [tower.label(n, a, oj), tower.label(n, b, oj)]
        })
        .collect();
    let center = (local(x), local(y));
    let (colors, mut key) = interner.refine(&graph, &labels, center);
    key.push(graph.edge_count() as u32);
    Ok(Neighborhood { graph, center, labels, colors, key })
}

fn side_labels(nb: &Neighborhood, a: u32, b: u32) -> Option<(u32, u32)> {
    let le = nb.graph.edge_between(a, b)?;
    let l = nb.labels[le as usize];
    Some(if nb.graph.edge(le).0 == a { (l[0], l[1]) } else { (l[1], l[0]) })
}

fn equivalent(p: &Neighborhood, q: &Neighborhood) -> bool {
    if p.key != q.key {
        return false;
    }
    let (x1, y1) = p.center;
    let (x2, y2) = q.center;
    let ok = |x: u32, y: u32, c: u32, d: u32| {
        p.colors[x as usize] == q.colors[c as usize]
            && p.colors[y as usize] == q.colors[d as usize]
            && side_labels(p, x, y) == side_labels(q, c, d)
    };
    [(x2, y2), (y2, x2)].into_iter().any(|(a, b)| {
        ok(x1, y1, a, b) && find_isomorphism_with(&p.graph, &q.graph, &[(x1, a), (y1, b)], false, ok).is_some()
    })
}

/// Class ids of every edge of levels `1..=up_to` at the given radius,
/// followed by the total class count.
fn classify(tower: &Tower, up_to: usize, radius: u32) -> Result<(Vec<Vec<usize>>, usize)> {
    let mut reps: Vec<Neighborhood> = Vec::new();
    let mut buckets: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    let mut interner = Colors::default();
    let mut class_of_edge = Vec::new();
    for n in 1..=up_to {
        let mut classes = Vec::new();
        for j in 0..tower.graph(n)?.edge_count() as u32 {
            let nb = neighborhood(tower, n, j, radius, &mut interner)?;
            let bucket = buckets.entry(nb.key.clone()).or_default();
            let class = match bucket.iter().copied().find(|&c| equivalent(&nb, &reps[c])) {
                Some(c) => c,
                None => {
                    bucket.push(reps.len());
                    reps.push(nb);
                    reps.len() - 1
                }
            };
            classes.push(class);
        }
        class_of_edge.push(classes);
    }
    Ok((class_of_edge, reps.len()))
}

fn distinct_counts(class_of_edge: &[Vec<usize>]) -> Vec<usize> {
    class_of_edge.iter().map(|c| count_distinct(c)).collect()
}

/// Classifies every edge of levels `1..=up_to` by its extended neighborhood.
pub fn neighborhood_classes(tower: &Tower, up_to: usize) -> Result<NeighborhoodClasses> {
    if up_to == 0 || up_to > tower.top() {
        return Err(Error::LevelOutOfRange { level: up_to, top: tower.top() });
    }
    let c_diam = tower.igs().base().diameter().ok_or(Error::DisconnectedBase)?;
    let radius = 10 * c_diam;
    let (class_of_edge, total) = classify(tower, up_to, radius)?;
    let (fundamental, _) = classify(tower, up_to, FUNDAMENTAL_RADIUS)?;
    let mut new_per_level = Vec::new();
    let mut max_seen = 0usize;
    for classes in &class_of_edge {
        let top = classes.iter().map(|&c| c + 1).max().unwrap_or(0).max(max_seen);
        new_per_level.push(top - max_seen);
        max_seen = top;
    }
    Ok(NeighborhoodClasses {
        extended_radius: radius,
        fundamental_radius: FUNDAMENTAL_RADIUS,
        per_level: distinct_counts(&class_of_edge),
        fundamental_per_level: distinct_counts(&fundamental),
        new_per_level,
        total,
        class_of_edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::bundled;

    #[test]
    fn single_edge_base_has_one_class() {
        let g = crate::graph::build_graph(&[1, 2], &[(1, 2)]).unwrap();
        let igs = crate::igs::orient_from_order(g, vec!["a".into()], vec![0], vec![1]).unwrap();
        let t = Tower::build(igs, 2, 1000).unwrap();
        let c = neighborhood_classes(&t, 1).unwrap();
        assert_eq!(c.per_level, vec![1]);
    }

    #[test]
    fn label_isomorphic_edges_share_a_class() {
        let t = Tower::new(bundled("counterexample").unwrap().igs);
        let c = neighborhood_classes(&t, 1).unwrap();
        // Swapping vertices 1 and 2 preserves every label; swapping 4 and 5
        // does not, since it reverses the labels of {4, 5}.
        assert_eq!(c.class_of_edge[0], vec![0, 0, 1, 2, 3, 4, 5, 6, 6]);
    }

    #[test]
    fn counterexample_classes() {
        let t = Tower::build(bundled("counterexample").unwrap().igs, 3, 1_000_000).unwrap();
        let c = neighborhood_classes(&t, 3).unwrap();
        assert_eq!(c.extended_radius, 40);
        assert_eq!(c.fundamental_per_level, vec![7, 25, 25]);
        assert!(c.fundamental_stabilized());
        assert_eq!(c.per_level, vec![7, 49, 343]);
        assert!(!c.count_stabilized());
    }
}
