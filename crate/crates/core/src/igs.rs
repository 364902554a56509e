//! Iterated graph systems: a base graph `G_1`, an ordered gluing set `I` and,
//! for every edge `e` and endpoint `v ∈ e`, an injection `φ_{v,e}: I → V_1`.
//!
//! Gluing maps are stored once in a table of distinct injections; each edge
//! refers to the maps of its two endpoints by id. Side 0 of an edge is its
//! lower-index endpoint.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{find_isomorphism, Graph, VertexId};

/// Global two-map orientation: `φ_{v,{v,u}} = φ_-` when `v` precedes `u`
/// in `order`, `φ_+` otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    pub minus: u32,
    pub plus: u32,
    /// Vertex identifiers in orientation order. Equal to the identifier
    /// order unless a custom order was supplied.
    pub order: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Igs {
    base: Graph,
    gluing_set: Vec<String>,
    maps: Vec<Vec<u32>>,
    glue: Vec<[u32; 2]>,
    orientation: Option<Orientation>,
}

impl Igs {
    /// Assembles an IGS without validating it; see [`validate_igs`].
    ///
    /// `glue[j][s]` indexes `maps` for side `s` of base edge `j`.
    pub fn from_parts(
        base: Graph,
        gluing_set: Vec<String>,
        maps: Vec<Vec<u32>>,
        glue: Vec<[u32; 2]>,
        orientation: Option<Orientation>,
    ) -> Igs {
        assert_eq!(glue.len(), base.edge_count(), "one glue entry per base edge");
        Igs { base, gluing_set, maps, glue, orientation }
    }

    /// Builds and validates an IGS from a per-(vertex, edge) table.
    ///
    /// `table` lists `(vertex, edge index, image of I)`; every incidence of
    /// the base graph must appear exactly once.
    pub fn from_table(base: Graph, gluing_set: Vec<String>, table: &[(u32, u32, Vec<u32>)]) -> Result<Igs> {
        let mut images: Vec<[Option<&Vec<u32>>; 2]> = vec![[None, None]; base.edge_count()];
        for (v, j, image) in table {
            if *j as usize >= base.edge_count() {
                return Err(Error::ValidationError(format!("edge index {j} out of range")));
            }
            let (lo, hi) = base.edge(*j);
            let side = if *v == lo {
                0
            } else if *v == hi {
                1
            } else {
                return Err(Error::ValidationError(format!(
                    "vertex {} is not an endpoint of edge {{{}, {}}}",
                    base.id(*v),
                    base.id(lo),
                    base.id(hi)
                )));
            };
            if images[*j as usize][side].replace(image).is_some() {
                return Err(Error::ValidationError(format!(
                    "gluing map for vertex {} on edge {{{}, {}}} given twice",
                    base.id(*v),
                    base.id(lo),
                    base.id(hi)
                )));
            }
        }
        // Map ids follow first appearance in (edge, side) order.
        let mut maps: Vec<Vec<u32>> = Vec::new();
        let mut glue = Vec::with_capacity(base.edge_count());
        for (j, sides) in images.iter().enumerate() {
            let mut ids = [0u32; 2];
            for (s, image) in sides.iter().enumerate() {
                let Some(image) = image else {
                    let (lo, hi) = base.edge(j as u32);
                    let v = if s == 0 { lo } else { hi };
                    return Err(Error::ValidationError(format!(
                        "missing gluing map for vertex {} on edge {{{}, {}}}",
                        base.id(v),
                        base.id(lo),
                        base.id(hi)
                    )));
                };
                ids[s] = match maps.iter().position(|m| m == *image) {
                    Some(id) => id as u32,
                    None => {
                        maps.push((*image).clone());
                        maps.len() as u32 - 1
                    }
                };
            }
            glue.push(ids);
        }
        let igs = Igs { base, gluing_set, maps, glue, orientation: None };
        igs.validated()
    }

    fn validated(self) -> Result<Igs> {
        let violations = validate_igs(&self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidIgs(violations))
        }
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn gluing_set(&self) -> &[String] {
        &self.gluing_set
    }

    /// Distinct gluing injections, as vertex indices of `G_1`.
    pub fn maps(&self) -> &[Vec<u32>] {
        &self.maps
    }

    pub fn map(&self, id: u32) -> &[u32] {
        &self.maps[id as usize]
    }

    /// Map id used at side `side` of base edge `j`.
    pub fn glue_id(&self, j: u32, side: usize) -> u32 {
        self.glue[j as usize][side]
    }

    /// `φ_{v,e}` for side `side` of base edge `j`.
    pub fn glue_map(&self, j: u32, side: usize) -> &[u32] {
        self.map(self.glue_id(j, side))
    }

    pub fn glue_table(&self) -> &[[u32; 2]] {
        &self.glue
    }

    pub fn orientation(&self) -> Option<&Orientation> {
        self.orientation.as_ref()
    }

    /// The pair of maps when every edge uses exactly the same two distinct
    /// maps on its two sides.
    pub fn two_map_pair(&self) -> Option<(u32, u32)> {
        if let Some(o) = &self.orientation {
            return Some((o.minus, o.plus));
        }
        let first = *self.glue.first()?;
        if first[0] == first[1] {
            return None;
        }
        let pair = BTreeSet::from(first);
        self.glue
            .iter()
            .all(|g| BTreeSet::from(*g) == pair)
            .then_some((first[0], first[1]))
    }

    /// Sorted set of vertices lying in some gluing image.
    pub fn gluing_vertices(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.glue.iter().flatten().flat_map(|&m| self.maps[m as usize].iter().copied()).collect();
        set.into_iter().collect()
    }

    /// Membership table `in_image[map id][vertex]`.
    pub fn image_membership(&self) -> Vec<Vec<bool>> {
        self.maps
            .iter()
            .map(|m| {
                let mut row = vec![false; self.base.vertex_count()];
                for &z in m {
                    row[z as usize] = true;
                }
                row
            })
            .collect()
    }

    /// Sub-IGS on the induced edge subset `keep_edges` and vertex subset
    /// `keep_vertices`, with inherited gluing maps.
    pub(crate) fn restrict(&self, keep_vertices: &[u32], keep_edges: &[u32]) -> Result<Igs> {
        let mut local = vec![u32::MAX; self.base.vertex_count()];
        for (i, &v) in keep_vertices.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let ids: Vec<VertexId> = keep_vertices.iter().map(|&v| self.base.id(v)).collect();
        let mut edges: Vec<(u32, u32, u32)> = keep_edges
            .iter()
            .map(|&j| {
                let (a, b) = self.base.edge(j);
                (local[a as usize], local[b as usize], j)
            })
            .collect();
        edges.sort_unstable();
        let base = Graph::with_ids(ids, edges.iter().map(|&(a, b, _)| (a, b)).collect())?;
        let mut maps = Vec::with_capacity(self.maps.len());
        for m in &self.maps {
            let mapped: Option<Vec<u32>> = m
                .iter()
                .map(|&z| Some(local[z as usize]).filter(|&l| l != u32::MAX))
                .collect();
            maps.push(mapped.unwrap_or_default());
        }
        let glue = edges.iter().map(|&(_, _, j)| self.glue[j as usize]).collect();
        let orientation = self.orientation.as_ref().map(|o| Orientation {
            minus: o.minus,
            plus: o.plus,
            order: o.order.iter().copied().filter(|id| base.index_of(*id).is_ok()).collect(),
        });
        Igs { base, gluing_set: self.gluing_set.clone(), maps, glue, orientation }.validated()
    }
}

/// Lists every violated clause: injectivity, independence, disjointness of
/// opposite images, connectivity of the base. Empty means valid.
pub fn validate_igs(candidate: &Igs) -> Vec<String> {
    let g = &candidate.base;
    let n = g.vertex_count() as u32;
    let k = candidate.gluing_set.len();
    let mut out = Vec::new();
    if k == 0 {
        out.push("gluing set is empty".to_string());
    }
    let mut names = candidate.gluing_set.clone();
    names.sort();
    names.dedup();
    if names.len() != k {
        out.push("gluing set has repeated labels".to_string());
    }
    let mut used = BTreeSet::new();
    for sides in &candidate.glue {
        used.extend(sides.iter().copied());
    }
    for &m in &used {
        let Some(image) = candidate.maps.get(m as usize) else {
            out.push(format!("gluing map id {m} is undefined"));
            continue;
        };
        let describe = || format!("[{}]", image.iter().map(|&z| if z < n { g.id(z).to_string() } else { "?".into() }).collect::<Vec<_>>().join(", "));
        if image.len() != k || image.iter().any(|&z| z >= n) {
            out.push(format!("gluing map {} is not a map from I into V_1", describe()));
            continue;
        }
        let distinct: BTreeSet<u32> = image.iter().copied().collect();
        if distinct.len() != k {
            out.push(format!("injectivity: gluing map {} repeats a vertex", describe()));
        }
        for (i, &x) in image.iter().enumerate() {
            for &y in &image[i + 1..] {
                if g.edge_between(x, y).is_some() {
                    out.push(format!(
                        "independence: image {} contains the edge {{{}, {}}}",
                        describe(),
                        g.id(x),
                        g.id(y)
                    ));
                }
            }
        }
    }
    for (j, sides) in candidate.glue.iter().enumerate() {
        let (Some(a), Some(b)) = (candidate.maps.get(sides[0] as usize), candidate.maps.get(sides[1] as usize)) else {
            continue;
        };
        if a.iter().any(|z| b.contains(z)) {
            let (lo, hi) = g.edge(j as u32);
            out.push(format!(
                "disjointness: images on edge {{{}, {}}} intersect",
                g.id(lo),
                g.id(hi)
            ));
        }
    }
    if !g.is_connected() {
        out.push("connectivity: base graph is disconnected".to_string());
    }
    out
}

/// Oriented IGS using identifier order: `φ_{v,{v,u}} = φ_-` iff `v < u`.
pub fn orient_from_order(base: Graph, gluing_set: Vec<String>, phi_minus: Vec<u32>, phi_plus: Vec<u32>) -> Result<Igs> {
    let order: Vec<u32> = (0..base.vertex_count() as u32).collect();
    orient_with_order(base, gluing_set, phi_minus, phi_plus, &order)
}

/// Oriented IGS for a custom vertex order (a permutation of vertex indices).
pub fn orient_with_order(
    base: Graph,
    gluing_set: Vec<String>,
    phi_minus: Vec<u32>,
    phi_plus: Vec<u32>,
    order: &[u32],
) -> Result<Igs> {
    let n = base.vertex_count();
    let mut rank = vec![usize::MAX; n];
    for (r, &v) in order.iter().enumerate() {
        if v as usize >= n || rank[v as usize] != usize::MAX {
            return Err(Error::ValidationError("vertex order is not a permutation".into()));
        }
        rank[v as usize] = r;
    }
    if order.len() != n {
        return Err(Error::ValidationError("vertex order is not a permutation".into()));
    }
    let glue = base
        .edges()
        .iter()
        .map(|&(lo, hi)| if rank[lo as usize] < rank[hi as usize] { [0, 1] } else { [1, 0] })
        .collect();
    let orientation = Orientation { minus: 0, plus: 1, order: order.iter().map(|&v| base.id(v)).collect() };
    Igs { base, gluing_set, maps: vec![phi_minus, phi_plus], glue, orientation: Some(orientation) }.validated()
}

/// The oriented IGS of `n` line segments, each subdivided into `l` parts,
/// with points at interior positions identified according to
/// `identifications[k - 1]` (a list of blocks of 1-based line numbers;
/// unlisted lines stay separate).
///
/// Vertices are numbered from 1 by position, and within a position by the
/// smallest line in each class. `I = {1..n}`, `φ_-(i) = i` and
/// `φ_+(i) = M - n + i` where `M` is the vertex count.
pub fn make_subdivided_lines(n: usize, l: usize, identifications: &[Vec<Vec<usize>>]) -> Result<Igs> {
    if n < 2 || l < 2 {
        return Err(Error::ValidationError("need at least two lines and two parts".into()));
    }
    if identifications.len() != l - 1 {
        return Err(Error::ValidationError(format!(
            "expected identifications for {} interior positions",
            l - 1
        )));
    }
    // class[k][i] = vertex id of line i at position k.
    let mut class = vec![vec![0u64; n]; l + 1];
    let mut next = 1u64;
    for i in 0..n {
        class[0][i] = next;
        next += 1;
    }
    for k in 1..l {
        let mut block_of = (0..n).collect::<Vec<usize>>();
        for block in &identifications[k - 1] {
            let min = *block.iter().min().ok_or_else(|| Error::ValidationError("empty block".into()))?;
            for &line in block {
                if line == 0 || line > n {
                    return Err(Error::ValidationError(format!("line {line} out of range")));
                }
                block_of[line - 1] = min - 1;
            }
        }
        let mut assigned = vec![0u64; n];
        for i in 0..n {
            let rep = block_of[i];
            if assigned[rep] == 0 {
                assigned[rep] = next;
                next += 1;
            }
            class[k][i] = assigned[rep];
        }
    }
    for i in 0..n {
        class[l][i] = next;
        next += 1;
    }
    let vertices: Vec<VertexId> = (1..next).collect();
    let mut edges = Vec::new();
    let mut seen = BTreeSet::new();
    for i in 0..n {
        for k in 0..l {
            let (a, b) = (class[k][i], class[k + 1][i]);
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::DuplicateEdge(a.min(b), a.max(b)));
            }
            edges.push((a, b));
        }
    }
    let base = crate::graph::build_graph(&vertices, &edges)?;
    if !base.is_connected() {
        return Err(Error::DisconnectedBase);
    }
    let m = vertices.len() as u32;
    let phi_minus = (0..n as u32).collect();
    let phi_plus = (0..n as u32).map(|i| m - n as u32 + i).collect();
    orient_from_order(base, (1..=n).map(|i| i.to_string()).collect(), phi_minus, phi_plus)
}

/// The common distance `L_*` between opposite gluing images, if it is
/// constant over all edges and point pairs and at least 2.
pub fn check_uniform_scaling(igs: &Igs) -> Option<u32> {
    let g = igs.base();
    let mut common = None;
    for j in 0..g.edge_count() as u32 {
        for &x in igs.glue_map(j, 0) {
            let dist = g.bfs(&[x]);
            for &y in igs.glue_map(j, 1) {
                let d = dist[y as usize];
                match common {
                    None => common = Some(d),
                    Some(c) if c != d => return None,
                    _ => {}
                }
            }
        }
    }
    common.filter(|&l| l >= 2 && l != crate::graph::UNREACHABLE)
}

/// Result of the doubling check, with the neighbor map `z ↦ 𝔫(z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Doubling {
    pub holds: bool,
    /// `neighbor[z]` is the unique neighbor of gluing vertex `z`.
    pub neighbor: Vec<Option<u32>>,
}

/// Every gluing-image vertex has degree 1.
pub fn check_doubling(igs: &Igs) -> Doubling {
    let g = igs.base();
    let mut neighbor = vec![None; g.vertex_count()];
    let mut holds = true;
    for z in igs.gluing_vertices() {
        if g.degree(z) == 1 {
            neighbor[z as usize] = Some(g.neighbors(z)[0].0);
        } else {
            holds = false;
        }
    }
    Doubling { holds, neighbor }
}

/// An automorphism `η` of `G_1` with `η∘φ_- = φ_+` and `η∘φ_+ = φ_-`.
pub fn detect_symmetry(igs: &Igs) -> Result<Option<Vec<u32>>> {
    symmetry_fixing(igs, &[])
}

/// As [`detect_symmetry`], additionally requiring `η(v) = v` for `fixed`.
pub fn symmetry_fixing(igs: &Igs, fixed: &[u32]) -> Result<Option<Vec<u32>>> {
    let (minus, plus) = igs.two_map_pair().ok_or(Error::NotOriented)?;
    let (a, b) = (igs.map(minus), igs.map(plus));
    let mut pins: Vec<(u32, u32)> = Vec::new();
    let push = |x: u32, y: u32, pins: &mut Vec<(u32, u32)>| -> bool {
        match pins.iter().find(|p| p.0 == x) {
            Some(p) => p.1 == y,
            None => {
                pins.push((x, y));
                true
            }
        }
    };
    for (&x, &y) in a.iter().zip(b) {
        if !push(x, y, &mut pins) || !push(y, x, &mut pins) {
            return Ok(None);
        }
    }
    for &v in fixed {
        if !push(v, v, &mut pins) {
            return Ok(None);
        }
    }
    let mut targets: Vec<u32> = pins.iter().map(|p| p.1).collect();
    targets.sort_unstable();
    targets.dedup();
    if targets.len() != pins.len() {
        return Ok(None);
    }
    let g = igs.base();
    Ok(find_isomorphism(g, g, &pins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn names(k: usize) -> Vec<String> {
        ["a", "b", "c"][..k].iter().map(|s| s.to_string()).collect()
    }

    fn counterexample() -> Igs {
        let g = build_graph(
            &[1, 2, 3, 4, 5, 6, 7, 8],
            &[(1, 3), (3, 4), (4, 6), (6, 7), (2, 3), (3, 5), (5, 6), (6, 8), (4, 5)],
        )
        .unwrap();
        orient_from_order(g, names(2), vec![0, 1], vec![6, 7]).unwrap()
    }

    #[test]
    fn counterexample_is_valid_and_scaled() {
        let igs = counterexample();
        assert!(validate_igs(&igs).is_empty());
        assert_eq!(check_uniform_scaling(&igs), Some(4));
        assert!(check_doubling(&igs).holds);
    }

    #[test]
    fn independence_and_disjointness_violations() {
        let g = build_graph(&[1, 2, 3, 4, 5], &[(1, 3), (2, 3), (3, 4), (3, 5)]).unwrap();
        let err = orient_from_order(g.clone(), names(2), vec![0, 2], vec![3, 4]).unwrap_err();
        let Error::InvalidIgs(v) = err else { panic!() };
        assert!(v.iter().any(|s| s.starts_with("independence")));
        let err = orient_from_order(g, names(2), vec![0, 1], vec![0, 1]).unwrap_err();
        let Error::InvalidIgs(v) = err else { panic!() };
        assert!(v.iter().any(|s| s.starts_with("disjointness")));
    }

    #[test]
    fn laakso_space_and_diamond() {
        let g = build_graph(&[1, 2, 3, 4, 5], &[(1, 3), (2, 3), (3, 4), (3, 5)]).unwrap();
        let space = orient_from_order(g, names(2), vec![0, 1], vec![3, 4]).unwrap();
        assert_eq!(check_uniform_scaling(&space), Some(2));
        let d = build_graph(&[1, 2, 3, 4, 5, 6], &[(1, 2), (2, 3), (2, 4), (3, 5), (4, 5), (5, 6)]).unwrap();
        let diamond = orient_from_order(d, names(1), vec![0], vec![5]).unwrap();
        assert_eq!(check_uniform_scaling(&diamond), Some(4));
    }

    #[test]
    fn subdivided_lines_reproduce_figures() {
        let laakso = make_subdivided_lines(2, 4, &[vec![vec![1, 2]], vec![], vec![vec![1, 2]]]).unwrap();
        let g = laakso.base();
        let edges: Vec<(u64, u64)> = g.edges().iter().map(|&(a, b)| (g.id(a), g.id(b))).collect();
        assert_eq!(edges, vec![(1, 3), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6), (6, 7), (6, 8)]);
        assert_eq!(laakso.map(1), &[6, 7]);

        let nonsym = make_subdivided_lines(3, 4, &[vec![vec![1, 2]], vec![], vec![vec![1, 2, 3]]]).unwrap();
        assert_eq!(nonsym.base().edge_count(), 12);
        assert_eq!(nonsym.base().vertex_count(), 12);
        assert_eq!(check_uniform_scaling(&nonsym), Some(4));
        assert_eq!(detect_symmetry(&nonsym).unwrap(), None);

        assert!(make_subdivided_lines(1, 4, &[vec![], vec![], vec![]]).is_err());
        assert_eq!(
            make_subdivided_lines(2, 3, &[vec![], vec![]]).unwrap_err(),
            Error::DisconnectedBase
        );
        assert!(matches!(
            make_subdivided_lines(2, 4, &[vec![vec![1, 2]], vec![vec![1, 2]], vec![]]),
            Err(Error::DuplicateEdge(_, _))
        ));
    }

    #[test]
    fn counterexample_symmetry() {
        let igs = counterexample();
        let eta = detect_symmetry(&igs).unwrap().unwrap();
        let g = igs.base();
        let image: Vec<u64> = (0..8).map(|v| g.id(eta[v])).collect();
        assert_eq!(image, vec![7, 8, 6, 4, 5, 3, 1, 2]);
    }

    #[test]
    fn uniform_scaling_rejects_unequal_chains() {
        let g = build_graph(&[1, 2, 3, 4, 5, 6], &[(1, 3), (3, 5), (2, 4), (4, 6), (3, 4)]).unwrap();
        // 1 -> 5 has length 2, 1 -> 6 has length 3.
        let igs = orient_from_order(g, names(2), vec![0, 1], vec![4, 5]).unwrap();
        assert_eq!(check_uniform_scaling(&igs), None);
    }
}
