//! Dimensions of iterated graph systems and the certificates built around
//! them: the CLP assumption report, Hausdorff, conformal and walk
//! dimensions, removable edges and their sub-systems, finite-level porosity
//! witnesses, modulus ratio evidence, and the combined counterexample report.

use std::borrow::Cow;
use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{max_edge_disjoint_paths, VertexId, UNREACHABLE};
use crate::igs::{check_doubling, check_uniform_scaling, detect_symmetry, symmetry_fixing, Igs};
use crate::modulus::{
    check_conductive_uniformity, gluing_problems, p_capacity_solve, solve_gluing_problems, GluingProblem,
    UniformityReport, DEFAULT_TOL,
};
use crate::tower::{Tower, DEFAULT_EDGE_BUDGET};

/// Exponent grid for conductive uniformity and empirical removability.
pub const CLP_GRID: [f64; 6] = [1.1, 1.25, 1.5, 2.0, 3.0, 4.0];
/// Tolerance on spreads and duality products in uniformity checks.
pub const UNIFORMITY_TOL: f64 = 1e-8;
/// Exponents at which the report evaluates walk dimensions.
pub const WALK_GRID: [f64; 4] = [1.25, 1.5, 2.0, 3.0];
/// Scale bands checked by the report's porosity witness.
pub const POROSITY_BANDS: [usize; 2] = [1, 2];
/// Lower end of the conformal dimension bracket.
pub const BRACKET_LOW: f64 = 1.0 + 1e-6;
/// Initial upper end of the conformal dimension bracket.
pub const BRACKET_HIGH: f64 = 4.0;
const MAX_EXPANSIONS: usize = 16;
const MAX_BISECTIONS: usize = 200;

pub const VERDICT_POSITIVE: &str = "non-attainment counterexample";
pub const VERDICT_NEGATIVE: &str = "no counterexample certified";

pub const CLAUSE_SCALING: &str = "uniform scaling";
pub const CLAUSE_DOUBLING: &str = "doubling";
pub const CLAUSE_UNIFORMITY: &str = "conductive uniformity";
pub const CLAUSE_PATHS: &str = "two edge-disjoint paths";

/// How a property is known to hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Certificate {
    /// From an automorphism exchanging the two gluing maps; valid for all `p`.
    Symmetry,
    /// Checked numerically over an exponent grid only.
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClauseCheck {
    pub holds: bool,
    pub evidence: String,
}

impl ClauseCheck {
    fn new(holds: bool, evidence: impl Into<String>) -> ClauseCheck {
        ClauseCheck { holds, evidence: evidence.into() }
    }
}

/// The four standing assumptions: uniform scaling, doubling, conductive
/// uniformity and two edge-disjoint paths in some `Θ_{v,e}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClpReport {
    pub uniform_scaling: ClauseCheck,
    pub l_star: Option<u32>,
    pub doubling: ClauseCheck,
    pub conductive_uniformity: ClauseCheck,
    pub uniformity_certificate: Option<Certificate>,
    pub uniformity: Option<UniformityReport>,
    pub disjoint_paths: ClauseCheck,
    pub max_disjoint_paths: usize,
    pub all_hold: bool,
}

impl ClpReport {
    fn clauses(&self) -> [(&'static str, &ClauseCheck); 4] {
        [
            (CLAUSE_SCALING, &self.uniform_scaling),
            (CLAUSE_DOUBLING, &self.doubling),
            (CLAUSE_UNIFORMITY, &self.conductive_uniformity),
            (CLAUSE_PATHS, &self.disjoint_paths),
        ]
    }

    /// The first failing clause among the first `count`, as an error.
    pub fn require(&self, count: usize) -> Result<()> {
        match self.clauses().iter().take(count).find(|(_, c)| !c.holds) {
            Some((name, c)) => Err(Error::AssumptionFailure(format!("{name}: {}", c.evidence))),
            None => Ok(()),
        }
    }
}

/// Runs every assumption check; failures are recorded, never raised.
pub fn clp_assumption_report(igs: &Igs) -> ClpReport {
    let l_star = check_uniform_scaling(igs);
    let uniform_scaling = match l_star {
        Some(l) => ClauseCheck::new(true, format!("every gluing pair is at distance L_* = {l}")),
        None => ClauseCheck::new(false, "distances between opposite gluing images differ or are below 2"),
    };
    let dbl = check_doubling(igs);
    let doubling = if dbl.holds {
        ClauseCheck::new(true, "every gluing vertex has degree 1")
    } else {
        let bad: Vec<String> = igs
            .gluing_vertices()
            .into_iter()
            .filter(|&z| igs.base().degree(z) != 1)
            .map(|z| igs.base().id(z).to_string())
            .collect();
        ClauseCheck::new(false, format!("gluing vertices of degree other than 1: {}", bad.join(", ")))
    };
    let symmetric = matches!(detect_symmetry(igs), Ok(Some(_)));
    let (conductive_uniformity, uniformity, uniformity_certificate) = if !dbl.holds {
        (ClauseCheck::new(false, "not evaluated: requires doubling"), None, None)
    } else {
        match check_conductive_uniformity(igs, &CLP_GRID, UNIFORMITY_TOL) {
            Ok(rep) => {
                let cert = if symmetric { Certificate::Symmetry } else { Certificate::Empirical };
                let worst = rep
                    .points
                    .iter()
                    .map(|pt| pt.resistance_spread.max(pt.boundary_spread).max((pt.duality_product - 1.0).abs()))
                    .fold(0.0, f64::max);
                let evidence = if rep.uniform {
                    match cert {
                        Certificate::Symmetry => format!(
                            "exchanging automorphism found; grid {CLP_GRID:?} agrees to {worst:.1e}"
                        ),
                        Certificate::Empirical => format!("empirical over grid {CLP_GRID:?}, worst deviation {worst:.1e}"),
                    }
                } else {
                    let bad: Vec<f64> = rep.points.iter().filter(|pt| !pt.uniform).map(|pt| pt.p).collect();
                    format!("not uniform at p = {bad:?}, worst deviation {worst:.1e}")
                };
                let holds = rep.uniform;
                (ClauseCheck::new(holds, evidence), Some(rep), holds.then_some(cert))
            }
            Err(e) => (ClauseCheck::new(false, format!("solve failed: {e}")), None, None),
        }
    };
    let g = igs.base();
    let max_disjoint_paths = gluing_problems(igs)
        .iter()
        .filter_map(|pr| max_edge_disjoint_paths(g, igs.map(pr.source_map), igs.map(pr.sink_map)).ok())
        .max()
        .unwrap_or(0);
    let disjoint_paths = ClauseCheck::new(
        max_disjoint_paths >= 2,
        format!("at most {max_disjoint_paths} edge-disjoint paths between opposite gluing images"),
    );
    let all_hold =
        uniform_scaling.holds && doubling.holds && conductive_uniformity.holds && disjoint_paths.holds;
    ClpReport {
        uniform_scaling,
        l_star,
        doubling,
        conductive_uniformity,
        uniformity_certificate,
        uniformity,
        disjoint_paths,
        max_disjoint_paths,
        all_hold,
    }
}

/// `log|E_1| / log L_*`.
pub fn hausdorff_dimension(igs: &Igs) -> Result<f64> {
    let l = check_uniform_scaling(igs).ok_or(Error::NotUniformScaling)?;
    if !check_doubling(igs).holds {
        return Err(Error::NotDoubling);
    }
    Ok((igs.base().edge_count() as f64).ln() / (l as f64).ln())
}

fn solver_tol(tol: f64) -> f64 {
    DEFAULT_TOL.min(tol)
}

/// `ℳ_p` from the first gluing problem.
fn base_modulus(igs: &Igs, p: f64, tol: f64) -> Result<f64> {
    let pr = gluing_problems(igs)[0];
    Ok(p_capacity_solve(igs.base(), igs.map(pr.source_map), igs.map(pr.sink_map), p, solver_tol(tol))?.value)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BracketCheck {
    pub delta: f64,
    /// `ℳ_{Q*-δ}`, which must exceed 1.
    pub below: f64,
    /// `ℳ_{Q*+δ}`, which must be below 1.
    pub above: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformalDimension {
    pub q: f64,
    /// `ℳ_{Q*}`.
    pub modulus: f64,
    pub within_tol: bool,
    /// Final bisection bracket.
    pub bracket: [f64; 2],
    /// Upper end after expansion.
    pub upper: f64,
    pub bisections: usize,
    pub bracket_check: BracketCheck,
    pub tol: f64,
}

/// The exponent `Q*` with `ℳ_{Q*} = 1`, by bisection after the assumptions
/// have been checked.
pub fn conformal_dimension(igs: &Igs, tol: f64) -> Result<ConformalDimension> {
    clp_assumption_report(igs).require(4)?;
    conformal_dimension_unchecked(igs, tol)
}

fn conformal_dimension_unchecked(igs: &Igs, tol: f64) -> Result<ConformalDimension> {
    if !(tol > 0.0) {
        return Err(Error::ValidationError(format!("tolerance {tol} must be positive")));
    }
    let modulus = |p: f64| base_modulus(igs, p, tol);
    let mut lo = BRACKET_LOW;
    let mut hi = BRACKET_HIGH;
    let mut expansions = 0;
    while modulus(hi)? >= 1.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            return Err(Error::NonConvergence(format!("modulus stays at least 1 up to p = {hi}")));
        }
    }
    let upper = hi;
    let mut bisections = 0;
    while hi - lo > tol * 1e-2 && bisections < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if modulus(mid)? >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        bisections += 1;
    }
    let q = 0.5 * (lo + hi);
    let value = modulus(q)?;
    let delta = 10.0 * tol;
    let below = if q - delta > 1.0 { modulus(q - delta)? } else { f64::NAN };
    let above = modulus(q + delta)?;
    Ok(ConformalDimension {
        q,
        modulus: value,
        within_tol: (value - 1.0).abs() <= tol,
        bracket: [lo, hi],
        upper,
        bisections,
        bracket_check: BracketCheck { delta, below, above, holds: below > 1.0 && above < 1.0 },
        tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkDimension {
    pub p: f64,
    pub modulus: f64,
    /// `log(|E_1|/ℳ_p) / log L_*`.
    pub value: f64,
    /// The optimal density of every gluing problem is `1/L_*` within tol.
    pub equality: bool,
    /// Largest deviation of an optimal density from `1/L_*`.
    pub density_deviation: f64,
    pub tol: f64,
}

/// The `p`-walk dimension with its equality flag.
pub fn walk_dimension(igs: &Igs, p: f64, tol: f64) -> Result<WalkDimension> {
    let l = check_uniform_scaling(igs)
        .ok_or_else(|| Error::AssumptionFailure(format!("{CLAUSE_SCALING}: L_* is not constant")))?;
    if !check_doubling(igs).holds {
        return Err(Error::AssumptionFailure(format!("{CLAUSE_DOUBLING}: a gluing vertex has degree above 1")));
    }
    let rep = check_conductive_uniformity(igs, &[p], UNIFORMITY_TOL)?;
    if !rep.uniform {
        return Err(Error::AssumptionFailure(format!("{CLAUSE_UNIFORMITY}: fails at p = {p}")));
    }
    walk_from_solutions(igs, l, p, tol)
}

fn walk_from_solutions(igs: &Igs, l: u32, p: f64, tol: f64) -> Result<WalkDimension> {
    let sols = solve_gluing_problems(igs, p, solver_tol(tol))?;
    let modulus = sols[0].report.value;
    let inv = 1.0 / l as f64;
    let density_deviation = sols
        .iter()
        .flat_map(|s| s.report.density.values.iter().map(move |&d| (d - inv).abs()))
        .fold(0.0, f64::max);
    let value = (igs.base().edge_count() as f64 / modulus).ln() / (l as f64).ln();
    Ok(WalkDimension { p, modulus, value, equality: density_deviation <= tol, density_deviation, tol })
}

/// Hausdorff, conformal and walk dimensions together.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionRecord {
    pub hausdorff: f64,
    pub conformal: ConformalDimension,
    pub walk: Vec<WalkDimension>,
    pub tol: f64,
}

pub fn dimension_record(igs: &Igs, walk_grid: &[f64], tol: f64) -> Result<DimensionRecord> {
    let conformal = conformal_dimension(igs, tol)?;
    let hausdorff = hausdorff_dimension(igs)?;
    let walk = walk_grid.iter().map(|&p| walk_dimension(igs, p, tol)).collect::<Result<_>>()?;
    Ok(DimensionRecord { hausdorff, conformal, walk, tol })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemovabilityRecord {
    pub edge: (VertexId, VertexId),
    /// No endpoint is a gluing vertex.
    pub clause1: ClauseCheck,
    /// The sub-system is connected with the same `L_*`.
    pub clause2: ClauseCheck,
    /// The optimal density and flow vanish on the edge.
    pub clause3: ClauseCheck,
    pub certificate: Option<Certificate>,
    pub grid: Vec<f64>,
    /// Largest `|ρ(e*)|` over the grid and the problems of the other edges.
    pub max_density: f64,
    /// Largest `|F(e*)|` over the same solves.
    pub max_flow: f64,
    pub removable: bool,
}

/// Checks the three removability clauses for the edge with the given ids.
pub fn removable_edge_check(igs: &Igs, edge: (VertexId, VertexId), p_grid: &[f64], tol: f64) -> Result<RemovabilityRecord> {
    let g = igs.base();
    let j = g.edge_by_ids(edge.0, edge.1)?;
    let (u, v) = g.edge(j);
    let ids = (g.id(u), g.id(v));
    let gluing = igs.gluing_vertices();
    let on_edge: Vec<String> = [u, v].iter().filter(|x| gluing.contains(x)).map(|&x| g.id(x).to_string()).collect();
    let clause1 = if on_edge.is_empty() {
        ClauseCheck::new(true, "no endpoint is a gluing vertex")
    } else {
        ClauseCheck::new(false, format!("gluing vertex {} on the edge", on_edge.join(", ")))
    };
    let clause2 = match sub_structure(igs, j) {
        Ok((sub, _)) => ClauseCheck::new(
            true,
            format!(
                "sub-system has {} vertices, {} edges, L_* = {}",
                sub.base().vertex_count(),
                sub.base().edge_count(),
                check_uniform_scaling(&sub).unwrap_or(0)
            ),
        ),
        Err(Error::NotRemovableStructure(why)) => ClauseCheck::new(false, why),
        Err(e) => return Err(e),
    };
    let problems: Vec<GluingProblem> = (0..g.edge_count() as u32)
        .filter(|&k| k != j)
        .flat_map(|k| [GluingProblem::of(igs, k, 0), GluingProblem::of(igs, k, 1)])
        .collect();
    let solves: Vec<Result<(f64, f64)>> = p_grid
        .par_iter()
        .map(|&p| {
            let sols = solve_gluing_problems(igs, p, solver_tol(tol))?;
            Ok(sols.iter().filter(|s| problems.contains(&s.problem)).fold((0.0f64, 0.0f64), |(d, f), s| {
                (d.max(s.report.density.values[j as usize].abs()), f.max(s.report.flow.values[j as usize].abs()))
            }))
        })
        .collect();
    let mut max_density = 0.0f64;
    let mut max_flow = 0.0f64;
    let mut solve_error = None;
    for r in solves {
        match r {
            Ok((d, f)) => {
                max_density = max_density.max(d);
                max_flow = max_flow.max(f);
            }
            Err(e) => solve_error = Some(e.to_string()),
        }
    }
    let empirical = solve_error.is_none() && max_density <= tol && max_flow <= tol && !p_grid.is_empty();
    let symmetric = matches!(symmetry_fixing(igs, &[u, v]), Ok(Some(_)));
    let certificate = match (empirical, symmetric) {
        (true, true) => Some(Certificate::Symmetry),
        (true, false) => Some(Certificate::Empirical),
        _ => None,
    };
    let clause3 = match (&solve_error, certificate) {
        (Some(e), _) => ClauseCheck::new(false, format!("solve failed: {e}")),
        (None, Some(Certificate::Symmetry)) => ClauseCheck::new(
            true,
            format!("automorphism exchanging the gluing maps fixes both endpoints; grid max |rho| {max_density:.1e}, |F| {max_flow:.1e}"),
        ),
        (None, Some(Certificate::Empirical)) => ClauseCheck::new(
            true,
            format!("empirical over grid {p_grid:?}: max |rho| {max_density:.1e}, |F| {max_flow:.1e}"),
        ),
        (None, None) => ClauseCheck::new(false, format!("max |rho| {max_density:.3e}, |F| {max_flow:.3e} above {tol:.0e}")),
    };
    let removable = clause1.holds && clause2.holds && clause3.holds;
    Ok(RemovabilityRecord {
        edge: ids,
        clause1,
        clause2,
        clause3,
        certificate,
        grid: p_grid.to_vec(),
        max_density,
        max_flow,
        removable,
    })
}

/// The sub-system without the edge, dropping endpoints of degree 1.
pub fn remove_edge_subigs(igs: &Igs, edge: (VertexId, VertexId)) -> Result<Igs> {
    let j = igs.base().edge_by_ids(edge.0, edge.1)?;
    Ok(sub_structure(igs, j)?.0)
}

/// Sub-system without edge `j` and the kept base vertices.
fn sub_structure(igs: &Igs, j: u32) -> Result<(Igs, Vec<u32>)> {
    let g = igs.base();
    let (u, v) = g.edge(j);
    let name = format!("{{{}, {}}}", g.id(u), g.id(v));
    let gluing = igs.gluing_vertices();
    if gluing.contains(&u) || gluing.contains(&v) {
        return Err(Error::NotRemovableStructure(format!("edge {name} contains a gluing vertex")));
    }
    let keep_vertices: Vec<u32> =
        (0..g.vertex_count() as u32).filter(|&x| !((x == u || x == v) && g.degree(x) == 1)).collect();
    let keep_edges: Vec<u32> = (0..g.edge_count() as u32).filter(|&k| k != j).collect();
    if !connected_without(g, &keep_vertices, j) {
        return Err(Error::NotRemovableStructure(format!("removing {name} disconnects the base graph")));
    }
    let sub = igs
        .restrict(&keep_vertices, &keep_edges)
        .map_err(|e| Error::NotRemovableStructure(format!("removing {name} leaves an invalid system: {e}")))?;
    let before = check_uniform_scaling(igs);
    let after = check_uniform_scaling(&sub);
    if before.is_none() || before != after {
        return Err(Error::NotRemovableStructure(format!(
            "removing {name} changes L_* from {before:?} to {after:?}"
        )));
    }
    Ok((sub, keep_vertices))
}

fn connected_without(g: &crate::graph::Graph, keep: &[u32], skip: u32) -> bool {
    let Some(&start) = keep.first() else { return false };
    let mut allowed = vec![false; g.vertex_count()];
    for &x in keep {
        allowed[x as usize] = true;
    }
    let mut seen = vec![false; g.vertex_count()];
    seen[start as usize] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 1;
    while let Some(x) = queue.pop_front() {
        for &(w, e) in g.neighbors(x) {
            if e != skip && allowed[w as usize] && !seen[w as usize] {
                seen[w as usize] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == keep.len()
}

/// Tower built at least to level `n`, extending a copy if needed.
fn at_least(tower: &Tower, n: usize) -> Result<Cow<'_, Tower>> {
    if tower.top() >= n {
        return Ok(Cow::Borrowed(tower));
    }
    tower.check_budget(n)?;
    let mut t = tower.clone();
    while t.top() < n {
        t.replace_once()?;
    }
    Ok(Cow::Owned(t))
}

/// One tested center of the porosity witness: the points of the embedded
/// sub-space whose level-`band + 1` edge is `center_edge`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PorosityEntry {
    pub band: usize,
    /// Embedded edge `e_{band+1}` at level `band + 1`.
    pub center_edge: u32,
    /// `f_{band+2} = e_{band+1}·E_1 + e*` at level `band + 2`.
    pub witness_edge: u32,
    /// Largest hop distance at level `band + 2` from the tile of the center
    /// edge to an end of the witness edge.
    pub distance: u32,
    /// Hop distance at level `band + 2` from the witness edge to the embedded vertices.
    pub clearance_nominal: u32,
    /// Smallest `k ≥ 2` with `f_{band+k}` sharing no vertex with the
    /// embedded level `band + k`, if one exists within the built levels.
    pub depth: Option<usize>,
    /// An embedded vertex on `f_{band+2}` at level `band + 2`, when there is one.
    pub shared_vertex: Option<u32>,
    pub ball_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PorosityWitness {
    pub removed_edge: Option<(VertexId, VertexId)>,
    pub bands: Vec<usize>,
    pub l_star: u32,
    /// Diameter of the base graph.
    pub c_diam: u32,
    /// Diameter of the sub-system's base graph.
    pub sub_c_diam: u32,
    /// `1 / (4·max(C, Ĉ)·L_*²)`, valid when every witness separates at depth 2.
    pub nominal_constant: f64,
    pub nominal_verified: bool,
    /// Largest separation depth `k` over all centers.
    pub depth: usize,
    /// `1 / (4·max(C, Ĉ)·L_*^k)` for the largest depth `k`.
    pub constant: f64,
    /// `2·max(C, Ĉ)·L_*`: the allowed hop distance at level `band + 2`.
    pub distance_bound: u32,
    pub embedding_checked: bool,
    pub entries: Vec<PorosityEntry>,
    pub verified: bool,
    pub failure: Option<String>,
}

impl PorosityWitness {
    fn failed(bands: &[usize], why: impl Into<String>) -> PorosityWitness {
        PorosityWitness {
            removed_edge: None,
            bands: bands.to_vec(),
            l_star: 0,
            c_diam: 0,
            sub_c_diam: 0,
            nominal_constant: 0.0,
            nominal_verified: false,
            depth: 0,
            constant: 0.0,
            distance_bound: 0,
            embedding_checked: false,
            entries: Vec::new(),
            verified: false,
            failure: Some(why.into()),
        }
    }
}

/// Deepest level the porosity witness inspects above a band.
pub const POROSITY_DEPTH: usize = 3;

/// Embedding of the sub-tower into the tower: per level, the images of
/// sub vertices and sub edges.
struct SubEmbedding {
    vertices: Vec<Vec<u32>>,
    edges: Vec<Vec<u32>>,
}

fn embed_levels(full: &Tower, sub: &Tower, top: usize, vmap: &[u32], emap: &[u32]) -> Result<SubEmbedding> {
    let nv = full.igs().base().vertex_count();
    let ne = full.igs().base().edge_count() as u32;
    let sub_ne = sub.igs().base().edge_count() as u32;
    let mut vertices = vec![vmap.to_vec()];
    let mut edges = vec![emap.to_vec()];
    for k in 2..=top {
        let prev = &edges[k - 2];
        let e_k: Vec<u32> =
            (0..sub_ne.pow(k as u32)).map(|j| prev[(j / sub_ne) as usize] * ne + emap[(j % sub_ne) as usize]).collect();
        let level = full.level(k)?;
        let v_k: Vec<u32> =
            sub.level(k)?.rep.iter().map(|&(z, p)| level.class_of(vmap[z as usize], prev[p as usize], nv)).collect();
        vertices.push(v_k);
        edges.push(e_k);
    }
    Ok(SubEmbedding { vertices, edges })
}

fn embedding_is_faithful(full: &Tower, sub: &Tower, emb: &SubEmbedding) -> Result<bool> {
    for (k, verts) in emb.vertices.iter().enumerate() {
        let fg = full.graph(k + 1)?;
        let mut distinct = verts.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != verts.len() {
            return Ok(false);
        }
        for (jh, &(x, y)) in sub.graph(k + 1)?.edges().iter().enumerate() {
            let (p, q) = (verts[x as usize], verts[y as usize]);
            if fg.edge(emb.edges[k][jh]) != (p.min(q), p.max(q)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Finite-level porosity of the embedded sub-tower. For each embedded edge
/// `e` at level `m+1` (with `m` in `bands`) the witness point descends from
/// `e` through the removed edge, `f_{i+1} = f_i·E_1 + e*`; it lies within
/// `2·max(C, Ĉ)·L_*^{-(m+1)}` of every point of the tile of `e` and is
/// separated from the embedded vertices from the first level `m+k` at
/// which `f_{m+k}` shares no vertex with them.
pub fn porosity_witness(tower: &Tower, sub: &Tower, bands: &[usize]) -> Result<PorosityWitness> {
    let top = bands.iter().copied().max().unwrap_or(0) + POROSITY_DEPTH;
    let full_t = at_least(tower, top)?;
    let sub_t = at_least(sub, top)?;
    let (full_t, sub_t) = (full_t.as_ref(), sub_t.as_ref());
    let g = full_t.igs().base();
    let sg = sub_t.igs().base();
    let mut vmap = Vec::with_capacity(sg.vertex_count());
    for &id in sg.ids() {
        match g.index_of(id) {
            Ok(x) => vmap.push(x),
            Err(_) => return Ok(PorosityWitness::failed(bands, format!("sub vertex {id} is not a base vertex"))),
        }
    }
    let mut emap = Vec::with_capacity(sg.edge_count());
    for &(a, b) in sg.edges() {
        match g.edge_between(vmap[a as usize], vmap[b as usize]) {
            Some(j) => emap.push(j),
            None => {
                return Ok(PorosityWitness::failed(
                    bands,
                    format!("sub edge {{{}, {}}} is not a base edge", sg.id(a), sg.id(b)),
                ))
            }
        }
    }
    let removed: Vec<u32> = (0..g.edge_count() as u32).filter(|j| !emap.contains(j)).collect();
    let star = match removed.as_slice() {
        [] => {
            return Ok(PorosityWitness::failed(
                bands,
                "no edge removed: the embedded set is everything, so no empty ball exists",
            ))
        }
        [j] => *j,
        _ => return Ok(PorosityWitness::failed(bands, format!("{} edges removed, expected one", removed.len()))),
    };
    let (l_full, l_sub) = (check_uniform_scaling(full_t.igs()), check_uniform_scaling(sub_t.igs()));
    let l = match (l_full, l_sub) {
        (Some(a), Some(b)) if a == b => a,
        _ => return Ok(PorosityWitness::failed(bands, format!("L_* differs: {l_full:?} vs {l_sub:?}"))),
    };
    let c_diam = g.diameter().unwrap_or(0);
    let sub_c_diam = sg.diameter().unwrap_or(0);
    let c_max = c_diam.max(sub_c_diam);
    let constant_at = |k: usize| 1.0 / (4.0 * c_max as f64 * (l as f64).powi(k as i32));
    let distance_bound = 2 * c_max * l;
    let (a, b) = g.edge(star);
    let removed_edge = Some((g.id(a), g.id(b)));

    let emb = embed_levels(full_t, sub_t, top, &vmap, &emap)?;
    if !embedding_is_faithful(full_t, sub_t, &emb)? {
        let mut w = PorosityWitness::failed(bands, "sub-tower does not embed level by level");
        w.removed_edge = removed_edge;
        return Ok(w);
    }
    let mut embedded = vec![Vec::new()];
    for k in 1..=top {
        let mut mark = vec![false; full_t.graph(k)?.vertex_count()];
        for &v in &emb.vertices[k - 1] {
            mark[v as usize] = true;
        }
        embedded.push(mark);
    }

    let ne = g.edge_count() as u32;
    let mut entries = Vec::new();
    for &m in bands {
        let near = full_t.graph(m + 2)?;
        let near_clear = near.bfs(&emb.vertices[m + 1]);
        for &center_edge in &emb.edges[m] {
            let tile = full_t.sigma_embed(m + 1, center_edge, 1)?.vertices;
            let witness_edge = center_edge * ne + star;
            let (p, q) = near.edge(witness_edge);
            let dist = near.bfs(&[p, q]);
            let distance = tile.iter().map(|&y| dist[y as usize]).max().unwrap_or(UNREACHABLE);
            let clearance_nominal = near_clear[p as usize].min(near_clear[q as usize]);
            let shared_vertex = [p, q].into_iter().find(|&v| embedded[m + 2][v as usize]);
            let mut f = witness_edge;
            let mut depth = None;
            for k in 2..=POROSITY_DEPTH {
                if k > 2 {
                    f = f * ne + star;
                }
                let (s, t) = full_t.graph(m + k)?.edge(f);
                if !embedded[m + k][s as usize] && !embedded[m + k][t as usize] {
                    depth = Some(k);
                    break;
                }
            }
            let ball_ok = match depth {
                Some(k) => {
                    let c = constant_at(k);
                    let reach = 3.0 * c_max as f64 * l as f64;
                    distance <= distance_bound && (distance as f64) <= (1.0 - c) * reach
                }
                None => false,
            };
            entries.push(PorosityEntry {
                band: m,
                center_edge,
                witness_edge,
                distance,
                clearance_nominal,
                depth,
                shared_vertex,
                ball_ok,
            });
        }
    }
    let verified = !entries.is_empty() && entries.iter().all(|e| e.ball_ok);
    let depth = entries.iter().filter_map(|e| e.depth).max().unwrap_or(0);
    let nominal_verified = verified && depth == 2;
    let failure = (!verified).then(|| match entries.iter().find(|e| !e.ball_ok) {
        Some(e) => format!(
            "center edge {} in band {}: distance {}, no separation within depth {POROSITY_DEPTH}",
            e.center_edge, e.band, e.distance
        ),
        None => "no centers tested".to_string(),
    });
    Ok(PorosityWitness {
        removed_edge,
        bands: bands.to_vec(),
        l_star: l,
        c_diam,
        sub_c_diam,
        nominal_constant: constant_at(2),
        nominal_verified,
        depth,
        constant: if verified { constant_at(depth) } else { 0.0 },
        distance_bound,
        embedding_checked: true,
        entries,
        verified,
        failure,
    })
}

/// A pair of vertex sets at some level, lifted to fibers above it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvidencePair {
    pub label: String,
    pub a: Vec<u32>,
    pub b: Vec<u32>,
}

/// The gluing pair of the first `Θ_{v,e}` problem and an annulus pair at
/// level `n`. The annulus uses the smallest non-gluing vertex `v` having
/// vertices at distance at least 3, against all such vertices.
pub fn default_evidence_pairs(tower: &Tower, n: usize) -> Result<Vec<EvidencePair>> {
    let igs = tower.igs();
    let pr = gluing_problems(igs)[0];
    let mut pairs = vec![EvidencePair {
        label: "theta".into(),
        a: tower.gluing_fiber(pr.source_map, n)?,
        b: tower.gluing_fiber(pr.sink_map, n)?,
    }];
    let g = tower.graph(n)?;
    let mut boundary = vec![false; g.vertex_count()];
    for id in 0..igs.maps().len() as u32 {
        for z in tower.gluing_fiber(id, n)? {
            boundary[z as usize] = true;
        }
    }
    for v in (0..g.vertex_count() as u32).filter(|&v| !boundary[v as usize]) {
        let dist = g.bfs(&[v]);
        let far: Vec<u32> = (0..g.vertex_count() as u32).filter(|&w| dist[w as usize] >= 3).collect();
        if !far.is_empty() {
            pairs.push(EvidencePair { label: format!("annulus at vertex {v}"), a: vec![v], b: far });
            break;
        }
    }
    Ok(pairs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvidenceRow {
    pub label: String,
    pub m: usize,
    pub modulus: f64,
    /// `Mod_p` at level `n+m` divided by `ℳ_p^m`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvidenceBand {
    pub label: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoewnerEvidence {
    pub p: f64,
    pub level: usize,
    pub base_modulus: f64,
    pub pairs: Vec<EvidencePair>,
    pub rows: Vec<EvidenceRow>,
    pub bands: Vec<EvidenceBand>,
}

/// Ratios of lifted pair moduli to powers of `ℳ_p`.
pub fn loewner_evidence(
    tower: &Tower,
    n: usize,
    pairs: &[EvidencePair],
    p: f64,
    m_max: usize,
    tol: f64,
) -> Result<LoewnerEvidence> {
    let igs = tower.igs();
    let rep = check_conductive_uniformity(igs, &[p], UNIFORMITY_TOL)?;
    if !rep.uniform {
        return Err(Error::NotUniform(p));
    }
    let base_modulus = rep.points[0].modulus;
    let t = at_least(tower, n + m_max)?;
    let jobs: Vec<(usize, usize)> = (0..pairs.len()).flat_map(|i| (1..=m_max).map(move |m| (i, m))).collect();
    let rows: Vec<EvidenceRow> = jobs
        .par_iter()
        .map(|&(i, m)| {
            let pair = &pairs[i];
            let a = t.fiber(n + m, n, &pair.a)?;
            let b = t.fiber(n + m, n, &pair.b)?;
            let modulus = p_capacity_solve(t.graph(n + m)?, &a, &b, p, solver_tol(tol))?.value;
            Ok(EvidenceRow { label: pair.label.clone(), m, modulus, ratio: modulus / base_modulus.powi(m as i32) })
        })
        .collect::<Result<_>>()?;
    let bands = pairs
        .iter()
        .map(|pair| {
            let (min, max) = rows
                .iter()
                .filter(|r| r.label == pair.label)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.ratio), hi.max(r.ratio)));
            EvidenceBand { label: pair.label.clone(), min, max }
        })
        .collect();
    Ok(LoewnerEvidence { p, level: n, base_modulus, pairs: pairs.to_vec(), rows, bands })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub assumptions: ClpReport,
    pub hausdorff: Option<f64>,
    pub conformal: Option<ConformalDimension>,
    pub walk: Vec<WalkDimension>,
    pub removable: Vec<RemovabilityRecord>,
    pub certified_edge: Option<(VertexId, VertexId)>,
    pub sub_conformal: Option<f64>,
    pub dimension_gap: Option<f64>,
    pub porosity: Option<PorosityWitness>,
    pub positive: bool,
    pub verdict: String,
    pub failures: Vec<String>,
    pub tol: f64,
}

/// Assumptions, dimensions, a removable-edge scan, the sub-system's
/// conformal dimension and a porosity witness, with the combined verdict.
pub fn counterexample_report(igs: &Igs, tol: f64) -> CounterexampleReport {
    let assumptions = clp_assumption_report(igs);
    let mut failures = Vec::new();
    let hausdorff = match hausdorff_dimension(igs) {
        Ok(h) => Some(h),
        Err(e) => {
            failures.push(format!("Hausdorff dimension: {e}"));
            None
        }
    };
    let conformal = match assumptions.require(4).and_then(|_| conformal_dimension_unchecked(igs, tol)) {
        Ok(c) => Some(c),
        Err(e) => {
            failures.push(format!("conformal dimension: {e}"));
            None
        }
    };
    let mut walk = Vec::new();
    if let (Ok(()), Some(l)) = (assumptions.require(3), assumptions.l_star) {
        for &p in &WALK_GRID {
            match walk_from_solutions(igs, l, p, tol) {
                Ok(w) => walk.push(w),
                Err(e) => failures.push(format!("walk dimension at p = {p}: {e}")),
            }
        }
    }
    let g = igs.base();
    let removable: Vec<RemovabilityRecord> = (0..g.edge_count() as u32)
        .into_par_iter()
        .filter_map(|j| {
            let (u, v) = g.edge(j);
            removable_edge_check(igs, (g.id(u), g.id(v)), &CLP_GRID, tol).ok()
        })
        .collect();
    let mut certified_edge = None;
    let mut sub_conformal = None;
    let mut dimension_gap = None;
    let mut porosity = None;
    if let Some(q) = conformal.as_ref().map(|c| c.q) {
        for rec in removable.iter().filter(|r| r.removable) {
            let sub = match remove_edge_subigs(igs, rec.edge) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("sub-system without {:?}: {e}", rec.edge));
                    continue;
                }
            };
            match conformal_dimension(&sub, tol) {
                Ok(c) => {
                    let gap = (c.q - q).abs();
                    if gap <= 2.0 * tol {
                        certified_edge = Some(rec.edge);
                        sub_conformal = Some(c.q);
                        dimension_gap = Some(gap);
                        porosity = Some(report_porosity(igs, &sub));
                        break;
                    }
                    failures.push(format!("sub-system without {:?} has Q* = {} (gap {gap:.1e})", rec.edge, c.q));
                }
                Err(e) => failures.push(format!("sub-system without {:?}: {e}", rec.edge)),
            }
        }
    }
    if !removable.iter().any(|r| r.removable) {
        failures.push("no removable edge".into());
    }
    if let Some(w) = porosity.as_ref().filter(|w| !w.verified) {
        failures.push(format!("porosity: {}", w.failure.clone().unwrap_or_default()));
    }
    let positive = assumptions.all_hold && certified_edge.is_some();
    if !assumptions.all_hold {
        if let Err(e) = assumptions.require(4) {
            failures.insert(0, e.to_string());
        }
    }
    CounterexampleReport {
        assumptions,
        hausdorff,
        conformal,
        walk,
        removable,
        certified_edge,
        sub_conformal,
        dimension_gap,
        porosity,
        positive,
        verdict: if positive { VERDICT_POSITIVE } else { VERDICT_NEGATIVE }.to_string(),
        failures,
        tol,
    }
}

fn report_porosity(igs: &Igs, sub: &Igs) -> PorosityWitness {
    let top = POROSITY_BANDS.iter().copied().max().unwrap_or(0) + POROSITY_DEPTH;
    let built = Tower::build(igs.clone(), top, DEFAULT_EDGE_BUDGET)
        .and_then(|t| Tower::build(sub.clone(), top, DEFAULT_EDGE_BUDGET).map(|s| (t, s)));
    match built.and_then(|(t, s)| porosity_witness(&t, &s, &POROSITY_BANDS)) {
        Ok(w) => w,
        Err(e) => PorosityWitness::failed(&POROSITY_BANDS, e.to_string()),
    }
}
