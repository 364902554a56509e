//! Discrete p-modulus: p-capacity by energy minimization, optimal densities
//! and unit flows, duality certificates, a brute-force convex solver over
//! explicit path families, conductive uniformity, and the replacement
//! constructions that lift densities and flows up a tower.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, BTreeMap};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use sprs::{CsMat, CsMatView};
use sprs_ldl::{Ldl, LdlNumeric};

use crate::error::{Error, Result};
use crate::graph::{Graph, Path};
use crate::igs::{check_doubling, Igs};
use crate::tower::Tower;

/// Default solver tolerance on the gradient norm.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Largest explicit path family accepted by [`brute_force_modulus`].
pub const MAX_FAMILY: usize = 10_000;

const SMOOTHING: [f64; 6] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12];
const STAGE_ITERATIONS: usize = 10_000;
const POLISH_ITERATIONS: usize = 200;
const CONTRACTION: [f64; 8] = [0.0, 1e-12, 1e-10, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];

/// `q = p / (p - 1)`.
pub fn dual_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Vertex potential with the boundary sets it was solved for.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Potential {
    pub values: Vec<f64>,
    pub a: Vec<u32>,
    pub b: Vec<u32>,
}

/// Nonnegative edge (or vertex) weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Density {
    pub values: Vec<f64>,
}

impl Density {
    /// `ℳ_p(ρ) = Σ ρ^p`.
    pub fn mass(&self, p: f64) -> f64 {
        self.values.iter().map(|r| r.powf(p)).sum()
    }
}

/// Flow on canonical edge orientations: `values[j] = F(lo, hi)` for edge
/// `j = {lo, hi}` with `lo < hi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flow {
    pub values: Vec<f64>,
    pub source: Vec<u32>,
    pub sink: Vec<u32>,
}

impl Flow {
    /// `ℰ_q(F) = Σ |F|^q` over undirected edges.
    pub fn energy(&self, q: f64) -> f64 {
        self.values.iter().map(|f| f.abs().powf(q)).sum()
    }

    /// Net outflow `Σ_y F(x, y)` at every vertex.
    pub fn divergence(&self, g: &Graph) -> Vec<f64> {
        let mut div = vec![0.0; g.vertex_count()];
        for (j, &(lo, hi)) in g.edges().iter().enumerate() {
            div[lo as usize] += self.values[j];
            div[hi as usize] -= self.values[j];
        }
        div
    }

    /// Total flow out of the source set.
    pub fn outflow(&self, g: &Graph) -> f64 {
        let div = self.divergence(g);
        self.source.iter().map(|&a| div[a as usize]).sum()
    }

    /// Largest divergence magnitude off `source ∪ sink`.
    pub fn interior_divergence(&self, g: &Graph) -> f64 {
        let div = self.divergence(g);
        let mut boundary = vec![false; g.vertex_count()];
        for &v in self.source.iter().chain(&self.sink) {
            boundary[v as usize] = true;
        }
        div.iter().zip(&boundary).filter(|(_, &b)| !b).map(|(d, _)| d.abs()).fold(0.0, f64::max)
    }
}

/// Output of [`p_capacity_solve`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub p: f64,
    /// `Mod_p(Θ(A, B)) = Cap_p(A, B)`.
    pub value: f64,
    pub potential: Potential,
    pub density: Density,
    pub flow: Flow,
    pub duality_residual: f64,
    /// Infinity norm of the exact energy gradient at interior vertices.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

/// Potentials carried as unevaluated sums `hi + lo`, so that drops far
/// below the rounding level of the values themselves stay resolvable.
#[derive(Clone, Debug)]
struct Values {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl Values {
    fn zeros(n: usize) -> Values {
        Values { hi: vec![0.0; n], lo: vec![0.0; n] }
    }

    fn from_hi(hi: Vec<f64>) -> Values {
        let lo = vec![0.0; hi.len()];
        Values { hi, lo }
    }

    fn drop(&self, a: u32, b: u32) -> f64 {
        let (a, b) = (a as usize, b as usize);
        (self.hi[a] - self.hi[b]) + (self.lo[a] - self.lo[b])
    }

    fn stepped(&self, step: &[f64], t: f64) -> Values {
        let mut out = Values::zeros(self.hi.len());
        for i in 0..self.hi.len() {
            let (s, e) = two_sum(self.hi[i], t * step[i]);
            let (h, l) = two_sum(s, self.lo[i] + e);
            out.hi[i] = h;
            out.lo[i] = l;
        }
        out
    }

    fn rounded(&self) -> Vec<f64> {
        self.hi.iter().zip(&self.lo).map(|(h, l)| h + l).collect()
    }
}

/// Edge list with fixed and free nodes, the common ground of the smoothed
/// solve and the contracted polish.
struct Network {
    edges: Vec<(u32, u32)>,
    fixed: Vec<Option<f64>>,
    free: Vec<u32>,
    slot: Vec<u32>,
}

/// Sparse pattern of the free-node Hessian with the positions each edge
/// writes to: `[diag a, diag b, (a, b), (b, a)]`.
struct Pattern {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    per_edge: Vec<[usize; 4]>,
    diag: Vec<usize>,
}

const NO_SLOT: u32 = u32::MAX;
const NO_POS: usize = usize::MAX;

impl Network {
    fn new(nodes: usize, edges: Vec<(u32, u32)>, fixed: Vec<Option<f64>>) -> Network {
        debug_assert_eq!(fixed.len(), nodes);
        let free: Vec<u32> = (0..nodes as u32).filter(|&v| fixed[v as usize].is_none()).collect();
        let mut slot = vec![NO_SLOT; nodes];
        for (i, &v) in free.iter().enumerate() {
            slot[v as usize] = i as u32;
        }
        Network { edges, fixed, free, slot }
    }

    fn expand(&self, x: &Values) -> Values {
        let mut out = Values::zeros(self.fixed.len());
        for (v, f) in self.fixed.iter().enumerate() {
            match f {
                Some(val) => out.hi[v] = *val,
                None => {
                    let i = self.slot[v] as usize;
                    out.hi[v] = x.hi[i];
                    out.lo[v] = x.lo[i];
                }
            }
        }
        out
    }

    fn pattern(&self) -> Pattern {
        let n = self.free.len();
        let mut cols: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for &(a, b) in &self.edges {
            let (sa, sb) = (self.slot[a as usize], self.slot[b as usize]);
            if sa != NO_SLOT && sb != NO_SLOT && sa != sb {
                cols[sa as usize].push(sb as usize);
                cols[sb as usize].push(sa as usize);
            }
        }
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        for c in &mut cols {
            c.sort_unstable();
            c.dedup();
            indices.extend_from_slice(c);
            indptr.push(indices.len());
        }
        let pos = |col: usize, row: usize| -> usize {
            let s = &indices[indptr[col]..indptr[col + 1]];
            indptr[col] + s.binary_search(&row).expect("pattern entry")
        };
        let diag: Vec<usize> = (0..n).map(|i| pos(i, i)).collect();
        let per_edge = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (sa, sb) = (self.slot[a as usize], self.slot[b as usize]);
                let da = if sa != NO_SLOT { diag[sa as usize] } else { NO_POS };
                let db = if sb != NO_SLOT { diag[sb as usize] } else { NO_POS };
                if sa != NO_SLOT && sb != NO_SLOT && sa != sb {
                    [da, db, pos(sa as usize, sb as usize), pos(sb as usize, sa as usize)]
                } else {
                    [da, db, NO_POS, NO_POS]
                }
            })
            .collect();
        Pattern { indptr, indices, per_edge, diag }
    }
}

/// Edge energy `φ(d)` with its first two derivatives. `eps = 0` is the
/// exact energy `|d|^p`.
#[derive(Clone, Copy)]
struct Energy {
    p: f64,
    eps: f64,
}

impl Energy {
    fn value(&self, d: f64) -> f64 {
        if self.eps == 0.0 {
            d.abs().powf(self.p)
        } else {
            (d * d + self.eps * self.eps).powf(self.p / 2.0)
        }
    }

    fn first(&self, d: f64) -> f64 {
        if self.eps == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                self.p * d.abs().powf(self.p - 1.0) * d.signum()
            }
        } else {
            self.p * d * (d * d + self.eps * self.eps).powf(self.p / 2.0 - 1.0)
        }
    }

    fn second(&self, d: f64) -> f64 {
        if self.eps == 0.0 {
            self.p * (self.p - 1.0) * d.abs().max(1e-30).powf(self.p - 2.0)
        } else {
            let s = d * d + self.eps * self.eps;
            self.p * s.powf(self.p / 2.0 - 2.0) * ((self.p - 1.0) * d * d + self.eps * self.eps)
        }
    }
}

struct Newton<'a> {
    net: &'a Network,
    pattern: Pattern,
    factor: Option<LdlNumeric<f64, usize>>,
}

impl<'a> Newton<'a> {
    fn new(net: &'a Network) -> Newton<'a> {
        Newton { net, pattern: net.pattern(), factor: None }
    }

    fn total(&self, u: &Values, energy: Energy) -> f64 {
        self.net.edges.iter().map(|&(a, b)| energy.value(u.drop(a, b))).sum()
    }

    fn gradient(&self, u: &Values, energy: Energy) -> Vec<f64> {
        let mut g = vec![0.0; self.net.free.len()];
        for &(a, b) in &self.net.edges {
            let f = energy.first(u.drop(a, b));
            let (sa, sb) = (self.net.slot[a as usize], self.net.slot[b as usize]);
            if sa != NO_SLOT {
                g[sa as usize] += f;
            }
            if sb != NO_SLOT {
                g[sb as usize] -= f;
            }
        }
        g
    }

    /// Solves `H·x = rhs` for the weighted Laplacian `H` with edge weights
    /// `weights`, regularized on the diagonal.
    fn solve(&mut self, weights: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let pat = &self.pattern;
        let mut data = vec![0.0; pat.indices.len()];
        for (w, pos) in weights.iter().zip(&pat.per_edge) {
            for &k in &pos[..2] {
                if k != NO_POS {
                    data[k] += w;
                }
            }
            for &k in &pos[2..] {
                if k != NO_POS {
                    data[k] -= w;
                }
            }
        }
        let scale = pat.diag.iter().map(|&k| data[k]).fold(0.0, f64::max).max(1e-300);
        for &k in &pat.diag {
            data[k] += 1e-13 * scale + 1e-300;
        }
        let n = self.net.free.len();
        if n == 1 {
            return Ok(vec![rhs[0] / data[0]]);
        }
        let mat: CsMat<f64> = CsMat::new_csc((n, n), pat.indptr.clone(), pat.indices.clone(), data);
        let view: CsMatView<f64> = mat.view();
        match &mut self.factor {
            Some(f) => f.update(view).map_err(|e| Error::NonConvergence(format!("factorization failed: {e}")))?,
            None => {
                self.factor = Some(
                    Ldl::new()
                        .numeric(view)
                        .map_err(|e| Error::NonConvergence(format!("factorization failed: {e}")))?,
                )
            }
        }
        let x: Vec<f64> = self.factor.as_ref().expect("factorized").solve(rhs.to_vec());
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonConvergence("linear solve produced non-finite values".into()));
        }
        Ok(x)
    }

    /// Damped Newton on `energy` from `x`; returns the iterate and the
    /// number of steps.
    fn minimize(&mut self, mut x: Values, energy: Energy, tol: f64, cap: usize) -> Result<(Values, usize)> {
        let mut u = self.net.expand(&x);
        let mut f = self.total(&u, energy);
        for it in 0..cap {
            let g = self.gradient(&u, energy);
            let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if gnorm <= tol {
                return Ok((x, it));
            }
            let weights: Vec<f64> =
                self.net.edges.iter().map(|&(a, b)| energy.second(u.drop(a, b))).collect();
            let neg: Vec<f64> = g.iter().map(|v| -v).collect();
            let step = self.solve(&weights, &neg)?;
            let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-20 {
                let trial = x.stepped(&step, t);
                let tu = self.net.expand(&trial);
                let tf = self.total(&tu, energy);
                let sufficient = tf <= f + 1e-4 * t * slope.min(0.0) && tf < f;
                // Below rounding level the energy cannot rank iterates, so
                // the gradient norm decides.
                let flat = (tf - f).abs() <= 1e-13 * f.abs().max(1e-300) && {
                    let tg = self.gradient(&tu, energy);
                    tg.iter().fold(0.0f64, |m, v| m.max(v.abs())) < gnorm
                };
                if sufficient || flat {
                    x = trial;
                    u = tu;
                    f = tf;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return Ok((x, it + 1));
            }
        }
        Ok((x, cap))
    }
}

fn check_endpoints(g: &Graph, a: &[u32], b: &[u32]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidEndpoints("boundary sets must be nonempty".into()));
    }
    let n = g.vertex_count() as u32;
    if let Some(&v) = a.iter().chain(b).find(|&&v| v >= n) {
        return Err(Error::UnknownVertex(v as u64));
    }
    if a.iter().any(|v| b.contains(v)) {
        return Err(Error::InvalidEndpoints("boundary sets must be disjoint".into()));
    }
    Ok(())
}

fn boundary_values(n: usize, a: &[u32], b: &[u32], low: f64, high: f64) -> Vec<Option<f64>> {
    let mut fixed = vec![None; n];
    for &v in a {
        fixed[v as usize] = Some(low);
    }
    for &v in b {
        fixed[v as usize] = Some(high);
    }
    fixed
}

/// Exact `p = 2` capacity by one sparse linear solve, with its potential.
pub fn linear_capacity(g: &Graph, a: &[u32], b: &[u32]) -> Result<(f64, Vec<f64>)> {
    check_endpoints(g, a, b)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let net = Network::new(g.vertex_count(), g.edges().to_vec(), boundary_values(g.vertex_count(), a, b, 0.0, 1.0));
    let u = quadratic_start(&net)?;
    let value = g.edges().iter().map(|&(x, y)| u.drop(x, y).powi(2)).sum();
    Ok((value, u.rounded()))
}

/// Minimizer of the Dirichlet energy: one Newton step from zero.
fn quadratic_start(net: &Network) -> Result<Values> {
    if net.free.is_empty() {
        return Ok(net.expand(&Values::zeros(0)));
    }
    let mut newton = Newton::new(net);
    let x0 = Values::zeros(net.free.len());
    let u0 = net.expand(&x0);
    let quad = Energy { p: 2.0, eps: 0.0 };
    let g = newton.gradient(&u0, quad);
    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
    let weights = vec![2.0; net.edges.len()];
    let x = newton.solve(&weights, &neg)?;
    Ok(net.expand(&Values::from_hi(x)))
}

fn exact_gradient_norm(g: &Graph, fixed: &[Option<f64>], u: &Values, p: f64) -> f64 {
    let energy = Energy { p, eps: 0.0 };
    let mut grad = vec![0.0; g.vertex_count()];
    for &(x, y) in g.edges() {
        let f = energy.first(u.drop(x, y));
        grad[x as usize] += f;
        grad[y as usize] -= f;
    }
    grad.iter().zip(fixed).filter(|(_, f)| f.is_none()).map(|(v, _)| v.abs()).fold(0.0, f64::max)
}

struct Dsu(Vec<u32>);

impl Dsu {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.0[x as usize] != x {
            let up = self.0[self.0[x as usize] as usize];
            self.0[x as usize] = up;
            x = up;
        }
        x
    }
}

/// Contracts edges with drop at most `delta`, runs exact Newton on the
/// contracted network and expands the result.
fn polish(g: &Graph, fixed: &[Option<f64>], u: &Values, p: f64, delta: f64, tol: f64) -> Result<Option<(Values, usize)>> {
    let n = g.vertex_count();
    let mut dsu = Dsu((0..n as u32).collect());
    for &(x, y) in g.edges() {
        if u.drop(x, y).abs() <= delta {
            let (rx, ry) = (dsu.find(x), dsu.find(y));
            if rx != ry {
                dsu.0[rx.max(ry) as usize] = rx.min(ry);
            }
        }
    }
    let mut group = vec![0u32; n];
    let mut ids: BTreeMap<u32, u32> = BTreeMap::new();
    for v in 0..n as u32 {
        let r = dsu.find(v);
        let next = ids.len() as u32;
        group[v as usize] = *ids.entry(r).or_insert(next);
    }
    let count = ids.len();
    let mut gfixed: Vec<Option<f64>> = vec![None; count];
    for v in 0..n {
        if let Some(val) = fixed[v] {
            match gfixed[group[v] as usize] {
                Some(other) if other != val => return Ok(None),
                _ => gfixed[group[v] as usize] = Some(val),
            }
        }
    }
    let edges: Vec<(u32, u32)> = g
        .edges()
        .iter()
        .map(|&(x, y)| (group[x as usize], group[y as usize]))
        .filter(|(a, b)| a != b)
        .collect();
    let mut start = vec![0.0; count];
    let mut members = vec![0usize; count];
    for v in 0..n {
        start[group[v] as usize] += u.hi[v];
        members[group[v] as usize] += 1;
    }
    let net = Network::new(count, edges, gfixed);
    let x0 = Values::from_hi(net.free.iter().map(|&c| start[c as usize] / members[c as usize] as f64).collect());
    let (x, iters) = if net.free.is_empty() {
        (x0, 0)
    } else {
        Newton::new(&net).minimize(x0, Energy { p, eps: 0.0 }, tol * 1e-3, POLISH_ITERATIONS)?
    };
    let gu = net.expand(&x);
    let lift = |part: &[f64]| (0..n).map(|v| part[group[v] as usize]).collect();
    Ok(Some((Values { hi: lift(&gu.hi), lo: lift(&gu.lo) }, iters)))
}

/// Minimizes `Σ |U(x) - U(y)|^p` with `U = 0` on `a` and `U = 1` on `b`.
pub fn p_capacity_solve(g: &Graph, a: &[u32], b: &[u32], p: f64, tol: f64) -> Result<SolveReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::BadExponent(p));
    }
    if !(tol > 0.0) {
        return Err(Error::ValidationError(format!("tolerance {tol} must be positive")));
    }
    check_endpoints(g, a, b)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.vertex_count();
    let fixed = boundary_values(n, a, b, 0.0, 1.0);
    let net = Network::new(n, g.edges().to_vec(), fixed.clone());
    let mut u = quadratic_start(&net)?;
    let mut iterations = 1;
    if p != 2.0 && !net.free.is_empty() {
        let mut newton = Newton::new(&net);
        let pick = |part: &[f64]| net.free.iter().map(|&v| part[v as usize]).collect();
        let mut x = Values { hi: pick(&u.hi), lo: pick(&u.lo) };
        for eps in SMOOTHING {
            let (next, it) = newton.minimize(x, Energy { p, eps }, tol * 1e-3, STAGE_ITERATIONS)?;
            x = next;
            iterations += it;
        }
        u = net.expand(&x);
    }
    let mut best = (exact_gradient_norm(g, &fixed, &u, p), u);
    for delta in CONTRACTION {
        if best.0 <= target(tol, p, &best.1, g) {
            break;
        }
        if let Some((cand, it)) = polish(g, &fixed, &best.1, p, delta, tol)? {
            iterations += it;
            let norm = exact_gradient_norm(g, &fixed, &cand, p);
            if norm < best.0 {
                best = (norm, cand);
            }
        }
    }
    let (gradient_norm, u) = best;
    if gradient_norm <= target(tol, p, &u, g) {
        let drops = g.edges().iter().map(|&(x, y)| u.drop(y, x)).collect();
        return build_report(g, a, b, p, u.rounded(), drops, gradient_norm, iterations, tol);
    }
    if p < 2.0 {
        if let Some(report) = flow_solve(g, a, b, p, tol)? {
            return Ok(report);
        }
    }
    Err(Error::NonConvergence(format!(
        "gradient norm {gradient_norm:.3e} above tolerance {tol:.1e} after {iterations} iterations"
    )))
}

/// Largest cycle space handled by [`flow_solve`].
const FLOW_MAX_CYCLES: usize = 2_000;

/// Dual solve for `p < 2`: minimizes `Σ |F|^q` over unit flows written as a
/// tree flow plus fundamental cycles, with `A` and `B` each collapsed to a
/// node. Drops are recovered as `|F|^{q-1}·sgn F`, which keeps edges whose
/// drop is far below the resolution of the potentials meaningful. Returns
/// `None` when the cycle space is too large.
fn flow_solve(g: &Graph, a: &[u32], b: &[u32], p: f64, tol: f64) -> Result<Option<SolveReport>> {
    let q = dual_exponent(p);
    let n = g.vertex_count();
    let mut node = vec![u32::MAX; n];
    for &v in a {
        node[v as usize] = 0;
    }
    for &v in b {
        node[v as usize] = 1;
    }
    let mut count = 2u32;
    for slot in node.iter_mut() {
        if *slot == u32::MAX {
            *slot = count;
            count += 1;
        }
    }
    let live: Vec<(usize, u32, u32)> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(j, &(x, y))| (j, node[x as usize], node[y as usize]))
        .filter(|&(_, s, t)| s != t)
        .collect();
    let mut adj: Vec<Vec<(u32, usize)>> = vec![Vec::new(); count as usize];
    for (k, &(_, s, t)) in live.iter().enumerate() {
        adj[s as usize].push((t, k));
        adj[t as usize].push((s, k));
    }
    // Breadth-first spanning tree from the collapsed source.
    let mut parent: Vec<Option<(u32, usize)>> = vec![None; count as usize];
    let mut seen = vec![false; count as usize];
    let mut order = vec![0u32];
    seen[0] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &(w, k) in &adj[v as usize] {
            if !seen[w as usize] {
                seen[w as usize] = true;
                parent[w as usize] = Some((v, k));
                order.push(w);
            }
        }
    }
    let mut in_tree = vec![false; live.len()];
    for &(_, k) in parent.iter().flatten() {
        in_tree[k] = true;
    }
    // Signed tree edges carrying one unit from the root to `w`.
    let root_path = |mut w: u32| {
        let mut out = Vec::new();
        while let Some((up, k)) = parent[w as usize] {
            out.push((k, if live[k].1 == up { 1.0 } else { -1.0 }));
            w = up;
        }
        out
    };
    let cycles: Vec<usize> = (0..live.len()).filter(|&k| !in_tree[k]).collect();
    if cycles.len() > FLOW_MAX_CYCLES {
        return Ok(None);
    }
    let mut base = vec![0.0; live.len()];
    for (k, sign) in root_path(1) {
        base[k] += sign;
    }
    let mut incidence: Vec<Vec<(usize, f64)>> = vec![Vec::new(); live.len()];
    for (i, &k) in cycles.iter().enumerate() {
        let (_, s, t) = live[k];
        let mut circ: BTreeMap<usize, f64> = BTreeMap::new();
        circ.insert(k, 1.0);
        for (e, sign) in root_path(s) {
            *circ.entry(e).or_insert(0.0) += sign;
        }
        for (e, sign) in root_path(t) {
            *circ.entry(e).or_insert(0.0) -= sign;
        }
        for (e, c) in circ {
            if c != 0.0 {
                incidence[e].push((i, c));
            }
        }
    }
    let dim = cycles.len();
    let flows = |y: &DVector<f64>| -> Vec<f64> {
        (0..live.len()).map(|e| base[e] + incidence[e].iter().map(|&(i, c)| c * y[i]).sum::<f64>()).collect()
    };
    let energy = |f: &[f64]| f.iter().map(|v| v.abs().powf(q)).sum::<f64>();
    let gradient = |f: &[f64]| {
        let mut gr = DVector::zeros(dim);
        for (e, inc) in incidence.iter().enumerate() {
            let w = q * f[e].abs().powf(q - 1.0) * f[e].signum();
            for &(i, c) in inc {
                gr[i] += c * w;
            }
        }
        gr
    };
    let mut y = DVector::zeros(dim);
    let mut f = flows(&y);
    let mut iterations = 0;
    let inner_tol = 1e-3 * tol;
    while dim > 0 && iterations < STAGE_ITERATIONS {
        let gr = gradient(&f);
        let gnorm = gr.amax();
        let scale = f.iter().map(|v| v.abs().powf(q - 1.0)).fold(0.0, f64::max);
        if gnorm <= inner_tol * q * scale {
            break;
        }
        let mut hess = DMatrix::zeros(dim, dim);
        for (e, inc) in incidence.iter().enumerate() {
            let w = q * (q - 1.0) * f[e].abs().powf(q - 2.0);
            for &(i, ci) in inc {
                for &(j, cj) in inc {
                    hess[(i, j)] += w * ci * cj;
                }
            }
        }
        let step = -regularized_solve(hess, &gr)?;
        let slope = gr.dot(&step);
        let e0 = energy(&f);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-20 {
            let ty = &y + t * &step;
            let tf = flows(&ty);
            let te = energy(&tf);
            let sufficient = te <= e0 + 1e-4 * t * slope.min(0.0) && te < e0;
            let flat = (te - e0).abs() <= 1e-13 * e0 && gradient(&tf).amax() < gnorm;
            if sufficient || flat {
                y = ty;
                f = tf;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    let raw: Vec<f64> = f.iter().map(|v| v.abs().powf(q - 1.0) * v.signum()).collect();
    let mut level = vec![0.0; count as usize];
    for &w in &order[1..] {
        let (up, k) = parent[w as usize].expect("tree edge");
        level[w as usize] = level[up as usize] + if live[k].1 == up { raw[k] } else { -raw[k] };
    }
    let span = level[1];
    if !(span > 0.0) {
        return Ok(None);
    }
    // Potential mismatch around each fundamental cycle, in potential units.
    let gradient_norm = cycles
        .iter()
        .map(|&k| {
            let (_, s, t) = live[k];
            (level[t as usize] - level[s as usize] - raw[k]).abs() / span
        })
        .fold(0.0, f64::max);
    if gradient_norm > tol {
        return Ok(None);
    }
    let mut drops = vec![0.0; g.edge_count()];
    for (k, &(j, _, _)) in live.iter().enumerate() {
        drops[j] = raw[k] / span;
    }
    let potential: Vec<f64> = (0..n)
        .map(|v| match node[v] {
            0 => 0.0,
            1 => 1.0,
            c => level[c as usize] / span,
        })
        .collect();
    build_report(g, a, b, p, potential, drops, gradient_norm, iterations, tol).map(Some)
}

/// Gradient threshold that keeps the flow divergence below `tol` as well.
fn target(tol: f64, p: f64, u: &Values, g: &Graph) -> f64 {
    let value: f64 = g.edges().iter().map(|&(x, y)| u.drop(x, y).abs().powf(p)).sum();
    tol * (p * value).min(1.0)
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    g: &Graph,
    a: &[u32],
    b: &[u32],
    p: f64,
    potential: Vec<f64>,
    drops: Vec<f64>,
    gradient_norm: f64,
    iterations: usize,
    tol: f64,
) -> Result<SolveReport> {
    let value: f64 = drops.iter().map(|d| d.abs().powf(p)).sum();
    let density = Density { values: drops.iter().map(|d| d.abs()).collect() };
    let flow = Flow {
        values: drops.iter().map(|d| d.signum() * d.abs().powf(p - 1.0) / value).collect(),
        source: a.to_vec(),
        sink: b.to_vec(),
    };
    let duality_residual = duality_residual(g, &density, &flow, p, (10.0 * tol).max(1e-12))?;
    Ok(SolveReport {
        p,
        value,
        potential: Potential { values: potential, a: a.to_vec(), b: b.to_vec() },
        density,
        flow,
        duality_residual,
        gradient_norm,
        iterations,
        tolerance: tol,
    })
}

#[derive(PartialEq)]
struct Queued(f64, u32);

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Shortest `ρ`-length of a path from `a` to `b`.
pub fn shortest_weighted_length(g: &Graph, density: &Density, a: &[u32], b: &[u32]) -> f64 {
    let mut dist = vec![f64::INFINITY; g.vertex_count()];
    let mut heap = BinaryHeap::new();
    for &v in a {
        dist[v as usize] = 0.0;
        heap.push(Queued(0.0, v));
    }
    let mut target = vec![false; g.vertex_count()];
    for &v in b {
        target[v as usize] = true;
    }
    while let Some(Queued(d, v)) = heap.pop() {
        if d > dist[v as usize] {
            continue;
        }
        if target[v as usize] {
            return d;
        }
        for &(w, j) in g.neighbors(v) {
            let nd = d + density.values[j as usize];
            if nd < dist[w as usize] {
                dist[w as usize] = nd;
                heap.push(Queued(nd, w));
            }
        }
    }
    f64::INFINITY
}

/// `|ℳ_p(ρ)^{1/p}·ℰ_q(F)^{1/q} − 1|` after checking that `ρ` is admissible
/// for `Θ(source, sink)` and `F` is a unit flow, both up to `slack`.
pub fn duality_residual(g: &Graph, density: &Density, flow: &Flow, p: f64, slack: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::BadExponent(p));
    }
    if density.values.len() != g.edge_count() || flow.values.len() != g.edge_count() {
        return Err(Error::ValidationError("density and flow need one value per edge".into()));
    }
    if density.values.iter().any(|&r| r < 0.0) {
        return Err(Error::NotAdmissible(f64::NAN));
    }
    let length = shortest_weighted_length(g, density, &flow.source, &flow.sink);
    if length < 1.0 - slack {
        return Err(Error::NotAdmissible(length));
    }
    let out = flow.outflow(g);
    if (out - 1.0).abs() > slack {
        return Err(Error::NotUnitFlow(format!("outflow {out}")));
    }
    let div = flow.interior_divergence(g);
    if div > slack {
        return Err(Error::NotUnitFlow(format!("interior divergence {div:.3e}")));
    }
    let q = dual_exponent(p);
    Ok((density.mass(p).powf(1.0 / p) * flow.energy(q).powf(1.0 / q) - 1.0).abs())
}

/// What a density weighs in [`brute_force_modulus`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    Edge,
    Vertex,
}

/// Output of [`brute_force_modulus`]; the density is omitted for `p = 1`,
/// where optimal densities need not be unique.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BruteForce {
    pub value: f64,
    pub density: Option<Vec<f64>>,
    pub paths: usize,
}

/// Minimizes `Σ ρ^p` subject to `L_ρ(θ) ≥ 1` for every listed path by a
/// log-barrier interior-point method with dense Newton steps.
pub fn brute_force_modulus(g: &Graph, paths: &[Path], p: f64, mode: Mode) -> Result<BruteForce> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::BadExponent(p));
    }
    if paths.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if paths.len() > MAX_FAMILY {
        return Err(Error::TooManyPaths(paths.len()));
    }
    let universe = match mode {
        Mode::Edge => g.edge_count(),
        Mode::Vertex => g.vertex_count(),
    };
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(paths.len());
    for path in paths {
        let mut items: Vec<usize> = match mode {
            Mode::Edge => Path::new(g, path.vertices.clone())?.edge_indices(g).iter().map(|&j| j as usize).collect(),
            Mode::Vertex => path.vertices.iter().map(|&v| v as usize).collect(),
        };
        items.sort_unstable();
        items.dedup();
        if items.is_empty() {
            return Err(Error::InvalidEndpoints("a path without edges has no admissible density".into()));
        }
        rows.push(items);
    }
    // Only items on some path can carry weight.
    let mut local = vec![usize::MAX; universe];
    let mut used = Vec::new();
    for row in &rows {
        for &i in row {
            if local[i] == usize::MAX {
                local[i] = used.len();
                used.push(i);
            }
        }
    }
    let rows: Vec<Vec<usize>> = rows.into_iter().map(|r| r.into_iter().map(|i| local[i]).collect()).collect();
    let x = barrier_solve(&rows, used.len(), p)?;
    let value: f64 = x.iter().map(|v| v.powf(p)).sum();
    let density = (p > 1.0).then(|| {
        let mut full = vec![0.0; universe];
        for (k, &i) in used.iter().enumerate() {
            full[i] = x[k];
        }
        full
    });
    Ok(BruteForce { value, density, paths: paths.len() })
}

fn barrier_solve(rows: &[Vec<usize>], k: usize, p: f64) -> Result<Vec<f64>> {
    let m = (rows.len() + k) as f64;
    let objective = |x: &DVector<f64>| x.iter().map(|v| v.powf(p)).sum::<f64>();
    let slacks = |x: &DVector<f64>| -> Vec<f64> { rows.iter().map(|r| r.iter().map(|&i| x[i]).sum::<f64>() - 1.0).collect() };
    let barrier = |x: &DVector<f64>, t: f64| -> f64 {
        if x.iter().any(|&v| v <= 0.0) {
            return f64::INFINITY;
        }
        let s = slacks(x);
        if s.iter().any(|&v| v <= 0.0) {
            return f64::INFINITY;
        }
        t * objective(x) - s.iter().map(|v| v.ln()).sum::<f64>() - x.iter().map(|v| v.ln()).sum::<f64>()
    };
    let mut x = DVector::from_element(k, 2.0);
    let mut t = 1.0;
    for _outer in 0..200 {
        for _inner in 0..200 {
            let s = slacks(&x);
            let mut grad = DVector::zeros(k);
            let mut hess = DMatrix::zeros(k, k);
            for i in 0..k {
                let xi = x[i];
                grad[i] = t * p * xi.powf(p - 1.0) - 1.0 / xi;
                hess[(i, i)] = t * p * (p - 1.0) * xi.powf(p - 2.0) + 1.0 / (xi * xi);
            }
            for (row, &si) in rows.iter().zip(&s) {
                let inv = 1.0 / si;
                for &a in row {
                    grad[a] -= inv;
                    for &b in row {
                        hess[(a, b)] += inv * inv;
                    }
                }
            }
            let step = -regularized_solve(hess, &grad)?;
            let decrement = -grad.dot(&step);
            if decrement <= 1e-14 {
                break;
            }
            let f0 = barrier(&x, t);
            let mut h = 1.0;
            loop {
                let trial = &x + h * &step;
                if barrier(&trial, t) <= f0 - 0.25 * h * decrement {
                    x = trial;
                    break;
                }
                h *= 0.5;
                if h < 1e-20 {
                    break;
                }
            }
            if h < 1e-20 {
                break;
            }
        }
        let f = objective(&x);
        if m / t <= 1e-10 * f.max(1e-300) {
            return Ok(x.iter().copied().collect());
        }
        t *= 8.0;
    }
    Err(Error::NonConvergence("barrier method did not reach the duality-gap target".into()))
}

/// Cholesky solve, retried with a growing diagonal shift when rounding
/// makes the matrix numerically indefinite.
fn regularized_solve(hess: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let scale = hess.diagonal().amax().max(1e-300);
    let mut shift = 0.0;
    for _ in 0..12 {
        let mut h = hess.clone();
        for i in 0..h.nrows() {
            h[(i, i)] += shift;
        }
        if let Some(chol) = nalgebra::Cholesky::new(h) {
            return Ok(chol.solve(rhs));
        }
        shift = if shift == 0.0 { 1e-15 * scale } else { shift * 100.0 };
    }
    Err(Error::NonConvergence("barrier Hessian is not positive definite".into()))
}

/// Vertex-density modulus of `Θ(A, B)` over enumerated simple paths.
pub fn vertex_modulus(g: &Graph, a: &[u32], b: &[u32], p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::BadExponent(p));
    }
    check_endpoints(g, a, b)?;
    let paths = crate::graph::enumerate_simple_paths(g, a, b, MAX_FAMILY)?;
    Ok(brute_force_modulus(g, &paths, p, Mode::Vertex)?.value)
}

/// The `Θ_{v,e}` problem on `G_1`: from the image of `source_map` to that
/// of `sink_map`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GluingProblem {
    pub source_map: u32,
    pub sink_map: u32,
}

impl GluingProblem {
    /// Problem across side `side` of base edge `j`.
    pub fn of(igs: &Igs, j: u32, side: usize) -> GluingProblem {
        GluingProblem { source_map: igs.glue_id(j, side), sink_map: igs.glue_id(j, 1 - side) }
    }
}

/// Distinct `Θ_{v,e}` problems over all `(e, v)` with `e ∈ E_1`, in order.
pub fn gluing_problems(igs: &Igs) -> Vec<GluingProblem> {
    let mut out: Vec<GluingProblem> = Vec::new();
    for j in 0..igs.base().edge_count() as u32 {
        for side in 0..2 {
            let pr = GluingProblem::of(igs, j, side);
            if !out.contains(&pr) {
                out.push(pr);
            }
        }
    }
    out
}

/// Solution of one gluing problem with its boundary flows `F_a`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GluingSolution {
    pub problem: GluingProblem,
    pub report: SolveReport,
    /// `ℰ_q(F_{v,e})`.
    pub resistance: f64,
    /// `F(φ(a), 𝔫(φ(a)))` for each `a ∈ I`.
    pub boundary_flows: Vec<f64>,
}

/// Solves every distinct gluing problem at exponent `p`.
pub fn solve_gluing_problems(igs: &Igs, p: f64, tol: f64) -> Result<Vec<GluingSolution>> {
    let g = igs.base();
    let neighbor = check_doubling(igs).neighbor;
    gluing_problems(igs)
        .into_iter()
        .map(|problem| {
            let a = igs.map(problem.source_map).to_vec();
            let b = igs.map(problem.sink_map).to_vec();
            let report = p_capacity_solve(g, &a, &b, p, tol)?;
            let resistance = report.flow.energy(dual_exponent(p));
            let boundary_flows = a
                .iter()
                .map(|&z| match neighbor[z as usize] {
                    Some(w) => {
                        let j = g.edge_between(z, w).expect("neighbor edge");
                        let f = report.flow.values[j as usize];
                        if z < w {
                            f
                        } else {
                            -f
                        }
                    }
                    None => f64::NAN,
                })
                .collect();
            Ok(GluingSolution { problem, report, resistance, boundary_flows })
        })
        .collect()
}

/// Uniformity data at one exponent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformityPoint {
    pub p: f64,
    /// `ℳ_p`, from the first gluing problem.
    pub modulus: f64,
    pub modulus_spread: f64,
    /// `ℛ_p`, from the first gluing problem.
    pub resistance: f64,
    pub resistance_spread: f64,
    /// `F_a` for each `a ∈ I`, from the first gluing problem.
    pub boundary_flows: Vec<f64>,
    pub boundary_spread: f64,
    /// `ℳ_p^{1/p}·ℛ_p^{1/q}`, which must be 1.
    pub duality_product: f64,
    pub max_duality_residual: f64,
    pub problems: usize,
    pub uniform: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformityReport {
    pub points: Vec<UniformityPoint>,
    pub uniform: bool,
    pub tol: f64,
}

impl UniformityReport {
    /// `ℳ_p` at the grid point `p`.
    pub fn modulus_at(&self, p: f64) -> Option<f64> {
        self.points.iter().find(|pt| pt.p == p).map(|pt| pt.modulus)
    }
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// Uniformity data at one exponent.
pub fn uniformity_point(igs: &Igs, p: f64, tol: f64) -> Result<UniformityPoint> {
    let sols = solve_gluing_problems(igs, p, tol)?;
    let first = &sols[0];
    let q = dual_exponent(p);
    let modulus_spread = spread(sols.iter().map(|s| s.report.value));
    let resistance_spread = spread(sols.iter().map(|s| s.resistance));
    let boundary_spread = (0..first.boundary_flows.len())
        .map(|k| spread(sols.iter().map(|s| s.boundary_flows[k])))
        .fold(0.0, f64::max);
    let duality_product = first.report.value.powf(1.0 / p) * first.resistance.powf(1.0 / q);
    let max_duality_residual = sols.iter().map(|s| s.report.duality_residual).fold(0.0, f64::max);
    let uniform = resistance_spread <= tol && boundary_spread <= tol && (duality_product - 1.0).abs() <= tol;
    Ok(UniformityPoint {
        p,
        modulus: first.report.value,
        modulus_spread,
        resistance: first.resistance,
        resistance_spread,
        boundary_flows: first.boundary_flows.clone(),
        boundary_spread,
        duality_product,
        max_duality_residual,
        problems: sols.len(),
        uniform,
    })
}

/// Conductive uniformity over a grid of exponents. Checking the `Θ_{v,e}`
/// problems of `E_1` covers every level, since edges of `E_n` carry the
/// same label pairs as the base edges they copy.
pub fn check_conductive_uniformity(igs: &Igs, p_grid: &[f64], tol: f64) -> Result<UniformityReport> {
    if !check_doubling(igs).holds {
        return Err(Error::NotDoubling);
    }
    let points: Vec<UniformityPoint> =
        p_grid.par_iter().map(|&p| uniformity_point(igs, p, DEFAULT_TOL.min(tol))).collect::<Result<_>>()?;
    let points: Vec<UniformityPoint> = points
        .into_iter()
        .map(|mut pt| {
            pt.uniform = pt.resistance_spread <= tol
                && pt.boundary_spread <= tol
                && (pt.duality_product - 1.0).abs() <= tol;
            pt
        })
        .collect();
    let uniform = points.iter().all(|pt| pt.uniform);
    Ok(UniformityReport { points, uniform, tol })
}

/// Per-base-edge densities and flows of the gluing problems, oriented from
/// side 0 to side 1.
struct TileData {
    density: Vec<Vec<f64>>,
    flow: Vec<Vec<f64>>,
}

fn tile_data(tower: &Tower, p: f64, tol: f64) -> Result<TileData> {
    let igs = tower.igs();
    let pt = uniformity_point(igs, p, DEFAULT_TOL.min(tol))?;
    if !pt.uniform && !(pt.resistance_spread <= tol && pt.boundary_spread <= tol) {
        return Err(Error::NotUniform(p));
    }
    let sols = solve_gluing_problems(igs, p, DEFAULT_TOL.min(tol))?;
    let by_problem = |pr: GluingProblem| sols.iter().find(|s| s.problem == pr).expect("problem solved");
    let mut density = Vec::new();
    let mut flow = Vec::new();
    for j in 0..igs.base().edge_count() as u32 {
        let s = by_problem(GluingProblem::of(igs, j, 0));
        density.push(s.report.density.values.clone());
        flow.push(s.report.flow.values.clone());
    }
    Ok(TileData { density, flow })
}

/// Lifts a density on `E_n` to `E_{n+m}` by
/// `ρ_{k+1}(e·E_1 + b) = ρ_k(e)·ρ_e(b)`.
pub fn replacement_density(tower: &Tower, n: usize, rho: &Density, p: f64, m: usize, tol: f64) -> Result<Density> {
    if rho.values.len() != tower.graph(n)?.edge_count() {
        return Err(Error::ValidationError("density does not match the level".into()));
    }
    if m == 0 {
        return Ok(rho.clone());
    }
    tower.level(n + m)?;
    let data = tile_data(tower, p, tol)?;
    let ne1 = tower.igs().base().edge_count();
    let mut cur = rho.values.clone();
    for _ in 0..m {
        let mut next = Vec::with_capacity(cur.len() * ne1);
        for (e, &r) in cur.iter().enumerate() {
            let b0 = tower.base_edge(e as u32) as usize;
            next.extend(data.density[b0].iter().map(|d| r * d));
        }
        cur = next;
    }
    Ok(Density { values: cur })
}

/// Lifts a unit flow on `G_n` to `G_{n+m}` by
/// `F_{k+1}([z_1,e],[z_2,e]) = F_k(v,u)·F_{v,e}(z_1,z_2)`, then re-verifies
/// that the result is a unit flow between the lifted sets.
pub fn replacement_flow(tower: &Tower, n: usize, flow: &Flow, p: f64, m: usize, tol: f64) -> Result<Flow> {
    let g = tower.graph(n)?;
    if flow.values.len() != g.edge_count() {
        return Err(Error::ValidationError("flow does not match the level".into()));
    }
    if m == 0 {
        return Ok(flow.clone());
    }
    tower.level(n + m)?;
    let data = tile_data(tower, p, tol)?;
    let mut cur = flow.values.clone();
    for k in n..n + m {
        let coarse = tower.level(k)?;
        let fine = tower.level(k + 1)?;
        let base = tower.igs().base();
        let mut next = Vec::with_capacity(fine.graph.edge_count());
        for (e, &f) in cur.iter().enumerate() {
            let ends = coarse.ends[e];
            let along = if ends[0] < ends[1] { f } else { -f };
            let b0 = tower.base_edge(e as u32) as usize;
            for (b, &fb) in data.flow[b0].iter().enumerate() {
                let j = next.len();
                let fe = fine.ends[j];
                let (z1, z2) = base.edge(b as u32);
                debug_assert!(z1 < z2);
                let oriented = along * fb;
                next.push(if fe[0] < fe[1] { oriented } else { -oriented });
            }
        }
        cur = next;
    }
    let source = tower.fiber(n + m, n, &flow.source)?;
    let sink = tower.fiber(n + m, n, &flow.sink)?;
    let lifted = Flow { values: cur, source, sink };
    let fine = tower.graph(n + m)?;
    let out = lifted.outflow(fine);
    let div = lifted.interior_divergence(fine);
    if (out - 1.0).abs() > tol.max(1e-9) || div > tol.max(1e-9) {
        return Err(Error::NotUnitFlow(format!("lifted outflow {out}, interior divergence {div:.3e}")));
    }
    Ok(lifted)
}

/// Direct solve of the gluing-fiber problem of edge `e ∈ E_n` on `G_m`,
/// compared with `ℳ_p^m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelCheck {
    pub level: usize,
    pub p: f64,
    pub direct: f64,
    pub predicted: f64,
    pub relative_error: f64,
    pub within_tol: bool,
}

pub fn level_modulus_check(tower: &Tower, n: usize, e: u32, p: f64, m: usize, tol: f64) -> Result<LevelCheck> {
    if e as usize >= tower.graph(n)?.edge_count() {
        return Err(Error::UnknownEdge(n as u64, e as u64));
    }
    tower.check_budget(m)?;
    let g = tower.graph(m)?;
    let igs = tower.igs();
    let b0 = tower.base_edge(e);
    let a = tower.gluing_fiber(igs.glue_id(b0, 0), m)?;
    let b = tower.gluing_fiber(igs.glue_id(b0, 1), m)?;
    let direct = p_capacity_solve(g, &a, &b, p, DEFAULT_TOL)?.value;
    let g1 = igs.base();
    let base = p_capacity_solve(g1, igs.map(igs.glue_id(b0, 0)), igs.map(igs.glue_id(b0, 1)), p, DEFAULT_TOL)?.value;
    let predicted = base.powi(m as i32);
    let relative_error = (direct - predicted).abs() / predicted;
    Ok(LevelCheck { level: m, p, direct, predicted, relative_error, within_tol: relative_error <= tol })
}
