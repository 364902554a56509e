//! Finite simple graphs with path metrics, simple-path enumeration,
//! edge-disjoint path counts and pinned isomorphism search.
//!
//! Vertices carry opaque identifiers ([`VertexId`]) but every algorithm works
//! on dense indices `0..n`, where index order equals identifier order. All
//! iteration follows that order, so results are deterministic.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};

/// Opaque, totally ordered vertex identifier.
pub type VertexId = u64;

/// Marker for "unreachable" in BFS distance tables.
pub const UNREACHABLE: u32 = u32::MAX;

/// A finite simple graph.
///
/// Edges are stored as index pairs `(lo, hi)` with `lo < hi`. The edge order
/// is part of the graph: graphs built by [`build_graph`] sort their edges
/// lexicographically, graphs produced by the replacement rule keep the order
/// in which copies are generated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    ids: Vec<VertexId>,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<(u32, u32)>>,
    lookup: HashMap<(u32, u32), u32>,
}

/// A vertex path `[v_1, ..., v_k]` given by vertex indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub vertices: Vec<u32>,
}

impl Path {
    /// Checks that consecutive vertices are adjacent in `g`.
    pub fn new(g: &Graph, vertices: Vec<u32>) -> Result<Path> {
        if vertices.is_empty() {
            return Err(Error::ValidationError("empty path".into()));
        }
        for &v in &vertices {
            if v as usize >= g.vertex_count() {
                return Err(Error::UnknownVertex(v as u64));
            }
        }
        for w in vertices.windows(2) {
            if g.edge_between(w[0], w[1]).is_none() {
                return Err(Error::ValidationError(format!(
                    "vertices {} and {} are not adjacent",
                    g.id(w[0]),
                    g.id(w[1])
                )));
            }
        }
        Ok(Path { vertices })
    }

    /// Number of edges traversed.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() <= 1
    }

    pub fn first(&self) -> u32 {
        self.vertices[0]
    }

    pub fn last(&self) -> u32 {
        *self.vertices.last().expect("paths are nonempty")
    }

    /// Edge indices traversed by the path, in order.
    pub fn edge_indices(&self, g: &Graph) -> Vec<u32> {
        self.vertices
            .windows(2)
            .map(|w| g.edge_between(w[0], w[1]).expect("validated path"))
            .collect()
    }
}

/// Builds a validated graph from identifiers and identifier pairs.
///
/// Vertex identifiers are treated as a set. Edges are sorted
/// lexicographically by their endpoint indices.
pub fn build_graph(vertex_ids: &[VertexId], edge_pairs: &[(VertexId, VertexId)]) -> Result<Graph> {
    let mut ids = vertex_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let index = |id: VertexId| -> Result<u32> {
        ids.binary_search(&id)
            .map(|i| i as u32)
            .map_err(|_| Error::UnknownVertex(id))
    };
    let mut edges = Vec::with_capacity(edge_pairs.len());
    for &(a, b) in edge_pairs {
        if a == b {
            return Err(Error::LoopEdge(a));
        }
        let (x, y) = (index(a)?, index(b)?);
        edges.push((x.min(y), x.max(y)));
    }
    edges.sort_unstable();
    for w in edges.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateEdge(ids[w[0].0 as usize], ids[w[0].1 as usize]));
        }
    }
    Graph::with_ids(ids, edges)
}

impl Graph {
    /// Graph on vertices `0..n` (identifiers equal indices), keeping the
    /// given edge order.
    pub fn from_index_edges(n: usize, edges: Vec<(u32, u32)>) -> Result<Graph> {
        Graph::with_ids((0..n as u64).collect(), edges)
    }

    pub(crate) fn with_ids(ids: Vec<VertexId>, edges: Vec<(u32, u32)>) -> Result<Graph> {
        let n = ids.len();
        let mut adj = vec![Vec::new(); n];
        let mut lookup = HashMap::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for (j, &(a, b)) in edges.iter().enumerate() {
            if a as usize >= n {
                return Err(Error::UnknownVertex(a as u64));
            }
            if b as usize >= n {
                return Err(Error::UnknownVertex(b as u64));
            }
            if a == b {
                return Err(Error::LoopEdge(ids[a as usize]));
            }
            let key = (a.min(b), a.max(b));
            if lookup.insert(key, j as u32).is_some() {
                return Err(Error::DuplicateEdge(ids[key.0 as usize], ids[key.1 as usize]));
            }
            normalized.push(key);
            adj[a as usize].push((b, j as u32));
            adj[b as usize].push((a, j as u32));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { ids, edges: normalized, adj, lookup })
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id(&self, v: u32) -> VertexId {
        self.ids[v as usize]
    }

    pub fn index_of(&self, id: VertexId) -> Result<u32> {
        self.ids
            .binary_search(&id)
            .map(|i| i as u32)
            .map_err(|_| Error::UnknownVertex(id))
    }

    pub fn indices_of(&self, ids: &[VertexId]) -> Result<Vec<u32>> {
        ids.iter().map(|&id| self.index_of(id)).collect()
    }

    /// Edges as `(lo, hi)` index pairs.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge(&self, j: u32) -> (u32, u32) {
        self.edges[j as usize]
    }

    /// Sorted `(neighbor, edge index)` pairs.
    pub fn neighbors(&self, v: u32) -> &[(u32, u32)] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_between(&self, a: u32, b: u32) -> Option<u32> {
        self.lookup.get(&(a.min(b), a.max(b))).copied()
    }

    /// Looks up an edge by endpoint identifiers.
    pub fn edge_by_ids(&self, a: VertexId, b: VertexId) -> Result<u32> {
        let (x, y) = (self.index_of(a)?, self.index_of(b)?);
        self.edge_between(x, y).ok_or(Error::UnknownEdge(a, b))
    }

    /// BFS distances from a set of sources; [`UNREACHABLE`] marks other components.
    pub fn bfs(&self, sources: &[u32]) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.vertex_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize] != 0 {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v as usize] + 1;
            for &(w, _) in &self.adj[v as usize] {
                if dist[w as usize] == UNREACHABLE {
                    dist[w as usize] = d;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() == 0 || self.bfs(&[0]).iter().all(|&d| d != UNREACHABLE)
    }

    /// Largest finite distance between two vertices, or `None` if disconnected.
    pub fn diameter(&self) -> Option<u32> {
        let mut best = 0;
        for v in 0..self.vertex_count() as u32 {
            for d in self.bfs(&[v]) {
                if d == UNREACHABLE {
                    return None;
                }
                best = best.max(d);
            }
        }
        Some(best)
    }

    /// Minimum distance between two vertex sets, `None` meaning infinity.
    pub fn set_distance(&self, a: &[u32], b: &[u32]) -> Option<u32> {
        let dist = self.bfs(a);
        b.iter()
            .map(|&v| dist[v as usize])
            .filter(|&d| d != UNREACHABLE)
            .min()
    }

    /// Subgraph induced by `keep` (sorted indices). Returns the subgraph and,
    /// for each of its edges, the index of the original edge.
    pub fn induced(&self, keep: &[u32]) -> (Graph, Vec<u32>) {
        let mut local = vec![u32::MAX; self.vertex_count()];
        for (i, &v) in keep.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let mut edges = Vec::new();
        let mut origin = Vec::new();
        for (j, &(a, b)) in self.edges.iter().enumerate() {
            let (x, y) = (local[a as usize], local[b as usize]);
            if x != u32::MAX && y != u32::MAX {
                edges.push((x, y));
                origin.push(j as u32);
            }
        }
        let ids = keep.iter().map(|&v| self.ids[v as usize]).collect();
        let g = Graph::with_ids(ids, edges).expect("induced subgraph of a simple graph");
        (g, origin)
    }
}

/// Length of the shortest path between two vertex sets (indices); `None` is infinity.
pub fn path_distance(g: &Graph, a: &[u32], b: &[u32]) -> Result<Option<u32>> {
    for &v in a.iter().chain(b) {
        if v as usize >= g.vertex_count() {
            return Err(Error::UnknownVertex(v as u64));
        }
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::ValidationError("distance between empty sets".into()));
    }
    Ok(g.set_distance(a, b))
}

/// All simple paths that start in `a`, end in `b` and have no interior
/// vertex in `a ∪ b`, in lexicographic order of their vertex sequences.
///
/// Every path of Θ(A,B) contains one of these as a sub-path, so they carry
/// the same modulus as the full connecting family.
pub fn enumerate_simple_paths(g: &Graph, a: &[u32], b: &[u32], cap: usize) -> Result<Vec<Path>> {
    let n = g.vertex_count();
    let mut role = vec![0u8; n];
    for &v in a {
        if v as usize >= n {
            return Err(Error::UnknownVertex(v as u64));
        }
        role[v as usize] = 1;
    }
    for &v in b {
        if v as usize >= n {
            return Err(Error::UnknownVertex(v as u64));
        }
        if role[v as usize] == 1 {
            return Err(Error::ValidationError("terminal sets must be disjoint".into()));
        }
        role[v as usize] = 2;
    }
    let mut starts = a.to_vec();
    starts.sort_unstable();
    starts.dedup();

    struct Walk<'g> {
        g: &'g Graph,
        role: Vec<u8>,
        on_path: Vec<bool>,
        stack: Vec<u32>,
        out: Vec<Path>,
        cap: usize,
    }
    impl Walk<'_> {
        fn extend(&mut self, v: u32) -> Result<()> {
            for &(w, _) in self.g.neighbors(v) {
                if self.on_path[w as usize] {
                    continue;
                }
                match self.role[w as usize] {
                    2 => {
                        if self.out.len() == self.cap {
                            return Err(Error::PathExplosion { cap: self.cap });
                        }
                        let mut vertices = self.stack.clone();
                        vertices.push(w);
                        self.out.push(Path { vertices });
                    }
                    1 => {}
                    _ => {
                        self.on_path[w as usize] = true;
                        self.stack.push(w);
                        self.extend(w)?;
                        self.stack.pop();
                        self.on_path[w as usize] = false;
                    }
                }
            }
            Ok(())
        }
    }

    let mut walk = Walk { g, role, on_path: vec![false; n], stack: Vec::new(), out: Vec::new(), cap };
    for s in starts {
        walk.on_path[s as usize] = true;
        walk.stack.push(s);
        walk.extend(s)?;
        walk.stack.pop();
        walk.on_path[s as usize] = false;
    }
    Ok(walk.out)
}

/// Maximum number of pairwise edge-disjoint paths from `a` to `b`
/// (unit-capacity max-flow, augmenting along shortest residual paths).
pub fn max_edge_disjoint_paths(g: &Graph, a: &[u32], b: &[u32]) -> Result<usize> {
    let n = g.vertex_count();
    let mut role = vec![0u8; n];
    for &v in a {
        if v as usize >= n {
            return Err(Error::UnknownVertex(v as u64));
        }
        role[v as usize] = 1;
    }
    for &v in b {
        if v as usize >= n {
            return Err(Error::UnknownVertex(v as u64));
        }
        role[v as usize] = if role[v as usize] == 1 { 3 } else { 2 };
    }
    if role.contains(&3) {
        return Err(Error::ValidationError("terminal sets must be disjoint".into()));
    }
    // flow[j] in {-1, 0, 1}, oriented from lo to hi.
    let mut flow = vec![0i8; g.edge_count()];
    let mut count = 0;
    loop {
        let mut pred: Vec<Option<(u32, u32)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for v in 0..n as u32 {
            if role[v as usize] == 1 {
                seen[v as usize] = true;
                queue.push_back(v);
            }
        }
        let mut reached = None;
        'bfs: while let Some(v) = queue.pop_front() {
            for &(w, j) in g.neighbors(v) {
                if seen[w as usize] {
                    continue;
                }
                let forward = g.edge(j).0 == v;
                let used = if forward { flow[j as usize] } else { -flow[j as usize] };
                if used >= 1 {
                    continue;
                }
                seen[w as usize] = true;
                pred[w as usize] = Some((v, j));
                if role[w as usize] == 2 {
                    reached = Some(w);
                    break 'bfs;
                }
                queue.push_back(w);
            }
        }
        let Some(mut v) = reached else { break };
        while let Some((u, j)) = pred[v as usize] {
            if g.edge(j).0 == u {
                flow[j as usize] += 1;
            } else {
                flow[j as usize] -= 1;
            }
            v = u;
        }
        count += 1;
    }
    Ok(count)
}

/// Edge-preserving bijection `g1 → g2` extending `pinned`, if one exists.
///
/// Backtracking visits vertices pins first, then in BFS order from the
/// pins; candidates are tried in increasing index order. Degrees, distance
/// profiles and distances to pinned vertices prune the search.
pub fn find_isomorphism(g1: &Graph, g2: &Graph, pinned: &[(u32, u32)]) -> Option<Vec<u32>> {
    find_isomorphism_with(g1, g2, pinned, true, |_, _, _, _| true)
}

/// Isomorphism search with an extra edge predicate
/// `edge_ok(x, y, image_x, image_y)` that must hold for every mapped edge.
pub(crate) fn find_isomorphism_with<F>(
    g1: &Graph,
    g2: &Graph,
    pinned: &[(u32, u32)],
    profiles: bool,
    edge_ok: F,
) -> Option<Vec<u32>>
where
    F: Fn(u32, u32, u32, u32) -> bool,
{
    let n = g1.vertex_count();
    if n != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return None;
    }
    let degrees = |g: &Graph| {
        let mut d: Vec<usize> = (0..g.vertex_count() as u32).map(|v| g.degree(v)).collect();
        d.sort_unstable();
        d
    };
    if degrees(g1) != degrees(g2) {
        return None;
    }
    let (profile1, profile2) = if profiles {
        let p1 = distance_profiles(g1);
        let p2 = distance_profiles(g2);
        let mut s1 = p1.clone();
        let mut s2 = p2.clone();
        s1.sort();
        s2.sort();
        if s1 != s2 {
            return None;
        }
        (p1, p2)
    } else {
        (Vec::new(), Vec::new())
    };

    const NONE: u32 = u32::MAX;
    let mut map = vec![NONE; n];
    let mut inverse = vec![NONE; n];
    for &(x, y) in pinned {
        if x as usize >= n || y as usize >= n {
            return None;
        }
        if map[x as usize] != NONE || inverse[y as usize] != NONE {
            return None;
        }
        map[x as usize] = y;
        inverse[y as usize] = x;
    }
    let pin_dist1: Vec<Vec<u32>> = pinned.iter().map(|&(x, _)| g1.bfs(&[x])).collect();
    let pin_dist2: Vec<Vec<u32>> = pinned.iter().map(|&(_, y)| g2.bfs(&[y])).collect();

    // Visit order: pins, then BFS from the pins, then remaining components.
    let mut order: Vec<u32> = Vec::with_capacity(n);
    let mut anchor = vec![NONE; n];
    let mut placed = vec![false; n];
    let mut queue = VecDeque::new();
    for &(x, _) in pinned {
        placed[x as usize] = true;
        queue.push_back(x);
    }
    let mut next_root = 0u32;
    loop {
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in g1.neighbors(v) {
                if !placed[w as usize] {
                    placed[w as usize] = true;
                    anchor[w as usize] = v;
                    queue.push_back(w);
                }
            }
        }
        while (next_root as usize) < n && placed[next_root as usize] {
            next_root += 1;
        }
        if next_root as usize == n {
            break;
        }
        placed[next_root as usize] = true;
        queue.push_back(next_root);
    }

    struct Search<'a, F> {
        g1: &'a Graph,
        g2: &'a Graph,
        profile1: &'a [Vec<u32>],
        profile2: &'a [Vec<u32>],
        pin_dist1: &'a [Vec<u32>],
        pin_dist2: &'a [Vec<u32>],
        order: &'a [u32],
        anchor: &'a [u32],
        map: Vec<u32>,
        inverse: Vec<u32>,
        edge_ok: F,
    }

    impl<F: Fn(u32, u32, u32, u32) -> bool> Search<'_, F> {
        fn consistent(&self, x: u32, c: u32) -> bool {
            if self.g1.degree(x) != self.g2.degree(c) {
                return false;
            }
            if !self.profile1.is_empty() && self.profile1[x as usize] != self.profile2[c as usize] {
                return false;
            }
            for (d1, d2) in self.pin_dist1.iter().zip(self.pin_dist2) {
                if d1[x as usize] != d2[c as usize] {
                    return false;
                }
            }
            let mut mapped = 0;
            for &(y, _) in self.g1.neighbors(x) {
                let my = self.map[y as usize];
                if my == u32::MAX {
                    continue;
                }
                mapped += 1;
                if self.g2.edge_between(c, my).is_none() || !(self.edge_ok)(x, y, c, my) {
                    return false;
                }
            }
            let images = self.g2.neighbors(c).iter().filter(|&&(w, _)| self.inverse[w as usize] != u32::MAX).count();
            mapped == images
        }

        fn run(&mut self, k: usize) -> bool {
            if k == self.order.len() {
                return true;
            }
            let x = self.order[k];
            if self.map[x as usize] != u32::MAX {
                return self.run(k + 1);
            }
            let candidates: Vec<u32> = match self.anchor[x as usize] {
                a if a != u32::MAX => self.g2.neighbors(self.map[a as usize]).iter().map(|&(w, _)| w).collect(),
                _ => (0..self.g2.vertex_count() as u32).collect(),
            };
            for c in candidates {
                if self.inverse[c as usize] != u32::MAX || !self.consistent(x, c) {
                    continue;
                }
                self.map[x as usize] = c;
                self.inverse[c as usize] = x;
                if self.run(k + 1) {
                    return true;
                }
                self.map[x as usize] = u32::MAX;
                self.inverse[c as usize] = u32::MAX;
            }
            false
        }
    }

    let mut search = Search {
        g1,
        g2,
        profile1: &profile1,
        profile2: &profile2,
        pin_dist1: &pin_dist1,
        pin_dist2: &pin_dist2,
        order: &order,
        anchor: &anchor,
        map,
        inverse,
        edge_ok,
    };
    // Pins must be mutually consistent before the search starts.
    for &(x, y) in pinned {
        search.map[x as usize] = u32::MAX;
        search.inverse[y as usize] = u32::MAX;
        let ok = search.consistent(x, y);
        search.map[x as usize] = y;
        search.inverse[y as usize] = x;
        if !ok {
            return None;
        }
    }
    if search.run(0) {
        Some(search.map)
    } else {
        None
    }
}

/// For each vertex, the number of vertices at each BFS distance.
fn distance_profiles(g: &Graph) -> Vec<Vec<u32>> {
    (0..g.vertex_count() as u32)
        .map(|v| {
            let mut hist = Vec::new();
            for d in g.bfs(&[v]) {
                let slot = if d == UNREACHABLE { 0 } else { d as usize + 1 };
                if hist.len() <= slot {
                    hist.resize(slot + 1, 0);
                }
                hist[slot] += 1;
            }
            hist
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counterexample() -> Graph {
        build_graph(
            &[1, 2, 3, 4, 5, 6, 7, 8],
            &[(1, 3), (3, 4), (4, 6), (6, 7), (2, 3), (3, 5), (5, 6), (6, 8), (4, 5)],
        )
        .unwrap()
    }

    #[test]
    fn build_rejects_bad_edges() {
        assert_eq!(build_graph(&[1], &[(1, 1)]), Err(Error::LoopEdge(1)));
        assert_eq!(build_graph(&[1, 2], &[(1, 2), (2, 1)]), Err(Error::DuplicateEdge(1, 2)));
        assert_eq!(build_graph(&[1, 2], &[(1, 3)]), Err(Error::UnknownVertex(3)));
        let single = build_graph(&[1], &[]).unwrap();
        assert_eq!((single.vertex_count(), single.edge_count()), (1, 0));
    }

    #[test]
    fn counterexample_distances() {
        let g = counterexample();
        assert_eq!((g.vertex_count(), g.edge_count()), (8, 9));
        let ix = |v| g.index_of(v).unwrap();
        assert_eq!(path_distance(&g, &[ix(1)], &[ix(7)]).unwrap(), Some(4));
        assert_eq!(path_distance(&g, &[ix(5)], &[ix(5)]).unwrap(), Some(0));
        assert_eq!(g.diameter(), Some(4));
    }

    #[test]
    fn disconnected_distance_is_infinite() {
        let g = build_graph(&[1, 2, 3], &[(1, 2)]).unwrap();
        assert_eq!(path_distance(&g, &[0], &[2]).unwrap(), None);
        assert_eq!(max_edge_disjoint_paths(&g, &[0], &[2]).unwrap(), 0);
    }

    #[test]
    fn isomorphism_counterexample_reflection() {
        let g = counterexample();
        let ix = |v| g.index_of(v).unwrap();
        let eta = find_isomorphism(&g, &g, &[(ix(1), ix(7)), (ix(2), ix(8))]).unwrap();
        let image = |v| g.id(eta[ix(v) as usize]);
        assert_eq!((image(3), image(4), image(5)), (6, 4, 5));
        assert_eq!((image(6), image(7), image(8)), (3, 1, 2));
    }

    #[test]
    fn isomorphism_rejects_different_shapes() {
        let path = build_graph(&[1, 2, 3], &[(1, 2), (2, 3)]).unwrap();
        let triangle = build_graph(&[1, 2, 3], &[(1, 2), (2, 3), (1, 3)]).unwrap();
        assert!(find_isomorphism(&path, &triangle, &[]).is_none());
        let id = find_isomorphism(&triangle, &triangle, &[]).unwrap();
        assert_eq!(id, vec![0, 1, 2]);
    }

    #[test]
    fn laakso_space_paths() {
        let g = build_graph(&[1, 2, 3, 4, 5], &[(1, 3), (2, 3), (3, 4), (3, 5)]).unwrap();
        let paths = enumerate_simple_paths(&g, &[0, 1], &[3, 4], 100).unwrap();
        assert_eq!(paths.len(), 4);
        assert!(paths.iter().all(|p| p.vertices[1] == 2));
        assert!(paths.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            enumerate_simple_paths(&g, &[0, 1], &[3, 4], 1),
            Err(Error::PathExplosion { cap: 1 })
        );
        assert_eq!(path_distance(&g, &[0, 1], &[3, 4]).unwrap(), Some(2));
    }

    #[test]
    fn adjacent_terminals_give_short_path() {
        let g = build_graph(&[1, 2, 3], &[(1, 2), (2, 3), (1, 3)]).unwrap();
        let paths = enumerate_simple_paths(&g, &[0], &[1], 10).unwrap();
        assert!(paths.contains(&Path { vertices: vec![0, 1] }));
    }

    #[test]
    fn disjoint_path_counts() {
        let g = counterexample();
        let ix = |v| g.index_of(v).unwrap();
        assert_eq!(max_edge_disjoint_paths(&g, &[ix(1), ix(2)], &[ix(7), ix(8)]).unwrap(), 2);
        let diamond = build_graph(&[1, 2, 3, 4, 5, 6], &[(1, 2), (2, 3), (2, 4), (4, 5), (3, 5), (5, 6)]).unwrap();
        assert_eq!(max_edge_disjoint_paths(&diamond, &[0], &[5]).unwrap(), 1);
    }
}
