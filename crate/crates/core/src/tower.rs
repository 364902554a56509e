//! Graph towers `G_1, G_2, …` generated by the replacement rule, with
//! projections `π`, similarity embeddings `σ_{e,m}` and scaled metrics.
//!
//! Level `k+1` vertices are union-find classes of pairs `(z, e)` with
//! `z ∈ V_1`, `e ∈ E_k`. A class is represented by its lexicographically
//! least pair, and vertices are numbered in increasing order of that pair.
//! The level-`(k+1)` copy of base edge `b` inside the tile of `e` gets index
//! `e·|E_1| + b`, so edge indices at level `n` are base-`|E_1|` words and
//! `π` on edges is integer division by `|E_1|`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, Path};
use crate::igs::{check_uniform_scaling, Igs};

/// Default cap on the number of edges of any built level.
pub const DEFAULT_EDGE_BUDGET: usize = 1_000_000;

/// A vertex or an edge of some level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Item {
    Vertex(u32),
    Edge(u32),
}

/// One level of a tower.
#[derive(Clone, Debug)]
pub struct Level {
    pub graph: Graph,
    /// Endpoints of each edge in base orientation: `ends[j][s]` carries the
    /// gluing map of side `s` of base edge `j mod |E_1|`.
    pub ends: Vec<[u32; 2]>,
    /// Canonical pair `(z, parent edge)` of each vertex; level 1 uses `(z, u32::MAX)`.
    pub rep: Vec<(u32, u32)>,
    /// `π` of each vertex to the previous level (empty at level 1).
    pub vertex_proj: Vec<Item>,
    /// Vertex of each pair `(z, e)` of the previous level, indexed `e·|V_1| + z`.
    pair_class: Vec<u32>,
}

impl Level {
    /// Vertex `[z, e]` of this level for `e` an edge of the previous one.
    pub fn class_of(&self, z: u32, e: u32, base_vertices: usize) -> u32 {
        self.pair_class[e as usize * base_vertices + z as usize]
    }
}

#[derive(Clone, Debug)]
pub struct Tower {
    igs: Igs,
    levels: Vec<Level>,
    l_star: Option<u32>,
    budget: usize,
    in_image: Vec<Vec<bool>>,
}

impl Tower {
    /// Tower holding only `G_1`.
    pub fn new(igs: Igs) -> Tower {
        Tower::with_budget(igs, DEFAULT_EDGE_BUDGET)
    }

    pub fn with_budget(igs: Igs, budget: usize) -> Tower {
        let g = igs.base().clone();
        let ends = g.edges().iter().map(|&(a, b)| [a, b]).collect();
        let rep = (0..g.vertex_count() as u32).map(|z| (z, u32::MAX)).collect();
        let level = Level { graph: g, ends, rep, vertex_proj: Vec::new(), pair_class: Vec::new() };
        let l_star = check_uniform_scaling(&igs);
        let in_image = igs.image_membership();
        Tower { igs, levels: vec![level], l_star, budget, in_image }
    }

    /// Tower built eagerly up to level `n`.
    pub fn build(igs: Igs, n: usize, budget: usize) -> Result<Tower> {
        let mut t = Tower::with_budget(igs, budget);
        while t.top() < n {
            t.replace_once()?;
        }
        Ok(t)
    }

    pub fn igs(&self) -> &Igs {
        &self.igs
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Highest built level.
    pub fn top(&self) -> usize {
        self.levels.len()
    }

    pub fn l_star(&self) -> Option<u32> {
        self.l_star
    }

    /// Level `n` (1-based).
    pub fn level(&self, n: usize) -> Result<&Level> {
        if n == 0 || n > self.top() {
            return Err(Error::LevelOutOfRange { level: n, top: self.top() });
        }
        Ok(&self.levels[n - 1])
    }

    pub fn graph(&self, n: usize) -> Result<&Graph> {
        Ok(&self.level(n)?.graph)
    }

    /// Expected `|E_n| = |E_1|^n`, checked against the budget.
    pub fn check_budget(&self, n: usize) -> Result<()> {
        let needed = (self.igs.base().edge_count() as u128).saturating_pow(n as u32);
        if needed > self.budget as u128 {
            return Err(Error::BudgetExceeded { level: n, needed, budget: self.budget });
        }
        Ok(())
    }

    /// Base edge of which edge `j` (at any level) is a copy.
    pub fn base_edge(&self, j: u32) -> u32 {
        j % self.igs.base().edge_count() as u32
    }

    /// Gluing map id of side `s` of edge `j` at any level.
    pub fn glue_id(&self, j: u32, s: usize) -> u32 {
        self.igs.glue_id(self.base_edge(j), s)
    }

    /// Map id `φ_{x,e}` for vertex `x` of edge `j` at level `n`.
    pub fn label(&self, n: usize, x: u32, j: u32) -> u32 {
        let ends = self.levels[n - 1].ends[j as usize];
        let side = if ends[0] == x { 0 } else { 1 };
        self.glue_id(j, side)
    }

    /// Appends `G_{k+1}`.
    pub fn replace_once(&mut self) -> Result<()> {
        let k = self.top();
        self.check_budget(k + 1)?;
        let base = self.igs.base();
        let nv = base.vertex_count();
        let ne1 = base.edge_count();
        let cur = &self.levels[k - 1];
        let ek = cur.graph.edge_count();
        let pairs = nv * ek;

        let mut dsu = Dsu::new(pairs);
        for x in 0..cur.graph.vertex_count() as u32 {
            let incident = cur.graph.neighbors(x);
            let Some(&(_, j0)) = incident.first() else { continue };
            let m0 = self.igs.map(self.label(k, x, j0));
            for &(_, j) in &incident[1..] {
                let m = self.igs.map(self.label(k, x, j));
                for (&a0, &a) in m0.iter().zip(m) {
                    dsu.union(j0 as usize * nv + a0 as usize, j as usize * nv + a as usize);
                }
            }
        }
        // Least pair (z, e) per class, compared as z first.
        let mut least = vec![usize::MAX; pairs];
        for e in 0..ek {
            for z in 0..nv {
                let r = dsu.find(e * nv + z);
                let key = z * ek + e;
                if key < least[r] {
                    least[r] = key;
                }
            }
        }
        let mut roots: Vec<(usize, usize)> = (0..pairs).filter(|&i| dsu.find(i) == i).map(|r| (least[r], r)).collect();
        roots.sort_unstable();
        let mut root_id = vec![u32::MAX; pairs];
        let mut rep = Vec::with_capacity(roots.len());
        for (i, &(key, r)) in roots.iter().enumerate() {
            root_id[r] = i as u32;
            rep.push(((key / ek) as u32, (key % ek) as u32));
        }
        let pair_class: Vec<u32> = (0..pairs).map(|i| root_id[dsu.find(i)]).collect();

        let mut ends = Vec::with_capacity(ek * ne1);
        for e in 0..ek {
            for &(z1, z2) in base.edges() {
                ends.push([pair_class[e * nv + z1 as usize], pair_class[e * nv + z2 as usize]]);
            }
        }
        let vertex_proj = rep
            .iter()
            .map(|&(z, e)| {
                let pe = cur.ends[e as usize];
                for s in 0..2 {
                    if self.in_image[self.glue_id(e, s) as usize][z as usize] {
                        return Item::Vertex(pe[s]);
                    }
                }
                Item::Edge(e)
            })
            .collect();
        let graph = Graph::from_index_edges(rep.len(), ends.iter().map(|e| (e[0], e[1])).collect())?;
        self.levels.push(Level { graph, ends, rep, vertex_proj, pair_class });
        Ok(())
    }

    /// `π_{n,m}` applied to `item` at level `n`.
    pub fn project(&self, n: usize, item: Item, m: usize) -> Result<Item> {
        if m == 0 || m > n || n > self.top() {
            return Err(Error::LevelOutOfRange { level: if n > self.top() { n } else { m }, top: self.top() });
        }
        let ne1 = self.igs.base().edge_count() as u32;
        let mut cur = item;
        for level in (m + 1..=n).rev() {
            cur = match cur {
                Item::Vertex(v) => self.levels[level - 1].vertex_proj[v as usize],
                Item::Edge(j) => Item::Edge(j / ne1),
            };
        }
        Ok(cur)
    }

    /// `π_{n,m}` of every vertex of level `n`.
    pub fn project_all_vertices(&self, n: usize, m: usize) -> Result<Vec<Item>> {
        let count = self.graph(n)?.vertex_count() as u32;
        (0..count).map(|v| self.project(n, Item::Vertex(v), m)).collect()
    }

    /// Ancestors at level `n` of the level-`m` vertices in `set` (sorted).
    pub fn fiber(&self, n: usize, m: usize, set: &[u32]) -> Result<Vec<u32>> {
        if n == m {
            self.level(n)?;
            let mut s = set.to_vec();
            s.sort_unstable();
            return Ok(s);
        }
        let proj = self.project_all_vertices(n, m)?;
        Ok(proj
            .iter()
            .enumerate()
            .filter(|(_, it)| matches!(it, Item::Vertex(v) if set.contains(v)))
            .map(|(i, _)| i as u32)
            .collect())
    }

    /// The gluing fiber `I^{(m)}` of map `map_id` at level `m`:
    /// ancestors of `φ(I)` for `m > 1`, `φ(I)` itself for `m = 1`.
    pub fn gluing_fiber(&self, map_id: u32, m: usize) -> Result<Vec<u32>> {
        let image = self.igs.map(map_id).to_vec();
        self.fiber(m, 1, &image)
    }

    /// `σ_{e,m}` for `e ∈ E_n`: the vertex injection `V_m → V_{n+m}` and
    /// the edge image `e·E_m` (edge `j` of level `m` goes to `e·|E_1|^m + j`).
    pub fn sigma_embed(&self, n: usize, e: u32, m: usize) -> Result<Embedding> {
        if m == 0 {
            return Err(Error::LevelOutOfRange { level: m, top: self.top() });
        }
        self.level(n + m)?;
        let nv = self.igs.base().vertex_count();
        let ne1 = self.igs.base().edge_count() as u32;
        let target = &self.levels[n + m - 1];
        let vertices = if m == 1 {
            (0..nv as u32).map(|z| target.class_of(z, e, nv)).collect()
        } else {
            let offset = e * ne1.pow(m as u32 - 1);
            self.levels[m - 1].rep.iter().map(|&(z, p)| target.class_of(z, offset + p, nv)).collect()
        };
        let count = ne1.pow(m as u32);
        let edges = (e * count..(e + 1) * count).collect();
        Ok(Embedding { vertices, edges })
    }

    /// `L_*^{-n}` times the path distance between two items at level `n`
    /// (edges count as their endpoint sets).
    pub fn scaled_distance(&self, n: usize, a: Item, b: Item) -> Result<ScaledDistance> {
        let g = self.graph(n)?;
        let l = self.l_star.ok_or(Error::NotUniformScaling)?;
        let set = |it: Item| match it {
            Item::Vertex(v) => vec![v],
            Item::Edge(j) => {
                let (x, y) = g.edge(j);
                vec![x, y]
            }
        };
        let hops = g.set_distance(&set(a), &set(b)).ok_or(Error::Disconnected)?;
        Ok(ScaledDistance { hops, level: n, l_star: l })
    }

    /// Splits a path at level `n + m` from `π^{-1}(A)` to `π^{-1}(B)` into
    /// a coarse path at level `n` and sub-paths inside single tiles.
    pub fn decompose_path(&self, n: usize, m: usize, theta: &Path, a: &[u32], b: &[u32]) -> Result<Decomposition> {
        let fine = self.graph(n + m)?;
        let coarse = self.graph(n)?;
        let checked = Path::new(fine, theta.vertices.clone())?;
        let proj: Vec<Item> = if m == 0 {
            checked.vertices.iter().map(|&v| Item::Vertex(v)).collect()
        } else {
            checked.vertices.iter().map(|&v| self.project(n + m, Item::Vertex(v), n)).collect::<Result<_>>()?
        };
        let start = match proj[0] {
            Item::Vertex(u) if a.contains(&u) => u,
            _ => return Err(Error::InvalidEndpoints("path does not start in the fiber of A".into())),
        };
        match proj[proj.len() - 1] {
            Item::Vertex(u) if b.contains(&u) => {}
            _ => return Err(Error::InvalidEndpoints("path does not end in the fiber of B".into())),
        }
        let mut coarse_path = vec![start];
        let mut pieces = Vec::new();
        let mut tiles = Vec::new();
        let mut cur = 0usize;
        let mut u = start;
        while !b.contains(&u) {
            let (j2, w) = (cur + 1..proj.len())
                .find_map(|i| match proj[i] {
                    Item::Vertex(w) if w != u => Some((i, w)),
                    _ => None,
                })
                .ok_or_else(|| Error::InvalidEndpoints("path never reaches the fiber of B".into()))?;
            let k = (cur..j2).rev().find(|&i| proj[i] == Item::Vertex(u)).expect("cur lies in the fiber of u");
            let tile = coarse
                .edge_between(u, w)
                .ok_or_else(|| Error::InvalidEndpoints("path leaves a tile through a non-adjacent fiber".into()))?;
            pieces.push(Path { vertices: checked.vertices[k..=j2].to_vec() });
            tiles.push(tile);
            coarse_path.push(w);
            cur = j2;
            u = w;
        }
        Ok(Decomposition { coarse: Path { vertices: coarse_path }, pieces, tiles })
    }
}

/// Image of `σ_{e,m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    /// `vertices[x]` is `σ_{e,m}(x)`.
    pub vertices: Vec<u32>,
    /// `e·E_m` as edge indices of level `n + m`.
    pub edges: Vec<u32>,
}

/// `hops · L_*^{-level}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScaledDistance {
    pub hops: u32,
    pub level: usize,
    pub l_star: u32,
}

impl ScaledDistance {
    pub fn value(&self) -> f64 {
        self.hops as f64 / (self.l_star as f64).powi(self.level as i32)
    }
}

/// Output of [`Tower::decompose_path`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub coarse: Path,
    /// `pieces[i]` joins the fibers of `coarse[i]` and `coarse[i+1]`.
    pub pieces: Vec<Path>,
    /// Level-`n` edge whose tile contains `pieces[i]`.
    pub tiles: Vec<u32>,
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}
