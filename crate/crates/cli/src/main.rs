use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use igs_core::analysis::{
    clp_assumption_report, conformal_dimension, counterexample_report, default_evidence_pairs, loewner_evidence,
    porosity_witness, remove_edge_subigs, removable_edge_check, walk_dimension, CLP_GRID, POROSITY_BANDS,
};
use igs_core::checks::structural_suite;
use igs_core::graph::VertexId;
use igs_core::igs::{check_doubling, check_uniform_scaling, detect_symmetry};
use igs_core::io::{bundled_source, export_graph, parse_spec, serialize_spec, ExportFormat, IgsSpec};
use igs_core::modulus::{check_conductive_uniformity, p_capacity_solve, DEFAULT_TOL};
use igs_core::tower::{Tower, DEFAULT_EDGE_BUDGET};
use igs_core::Error;

const SCHEMA: &str = "igs-report/1";

#[derive(Parser, Debug)]
#[command(name = "igs", version, about = "Iterated graph systems: towers, p-modulus and dimension certificates")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Largest number of edges any tower level may have.
    #[arg(long, global = true, default_value_t = DEFAULT_EDGE_BUDGET)]
    budget_edges: usize,
    /// Leave timings out of the report, making output byte-identical across runs.
    #[arg(long, global = true)]
    no_timings: bool,
    /// Write the output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a spec.
    Validate { spec: String },
    /// Build the tower and summarize each level.
    Build {
        spec: String,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Also run the structural property suite.
        #[arg(long)]
        checks: bool,
    },
    /// Print one level as DOT or an edge list.
    Export {
        spec: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value = "dot")]
        format: ExportFormat,
    },
    /// p-modulus between two vertex sets of the base graph, lifted to a level.
    Modulus {
        spec: String,
        #[arg(long)]
        p: f64,
        /// Comma-separated vertex ids.
        #[arg(long, value_delimiter = ',', required = true)]
        from: Vec<VertexId>,
        #[arg(long, value_delimiter = ',', required = true)]
        to: Vec<VertexId>,
        #[arg(long, default_value_t = 1)]
        level: usize,
    },
    /// Conductive uniformity over a grid of exponents.
    Uniformity {
        spec: String,
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<f64>>,
    },
    /// Conformal dimension `Q*`.
    Confdim { spec: String },
    /// p-walk dimensions.
    Walkdim {
        spec: String,
        /// Comma-separated exponents.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
    },
    /// Removability of one edge, or of every edge.
    Removable {
        spec: String,
        #[arg(long, value_parser = parse_edge)]
        edge: Option<(VertexId, VertexId)>,
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<f64>>,
    },
    /// The sub-system without an edge, as a spec.
    Subigs {
        spec: String,
        #[arg(long, value_parser = parse_edge)]
        edge: (VertexId, VertexId),
    },
    /// Porosity witness of the sub-system without a removable edge.
    Porosity {
        spec: String,
        /// Comma-separated scale bands.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        /// Removed edge; defaults to the first removable edge.
        #[arg(long, value_parser = parse_edge)]
        edge: Option<(VertexId, VertexId)>,
    },
    /// Ratios of lifted pair moduli to powers of `ℳ_p`.
    Evidence {
        spec: String,
        /// Exponent; defaults to `Q*`.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 2)]
        m_max: usize,
        #[arg(long, default_value_t = 1)]
        level: usize,
    },
    /// Full counterexample report.
    Report { spec: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Build { .. } => "build",
            Command::Export { .. } => "export",
            Command::Modulus { .. } => "modulus",
            Command::Uniformity { .. } => "uniformity",
            Command::Confdim { .. } => "confdim",
            Command::Walkdim { .. } => "walkdim",
            Command::Removable { .. } => "removable",
            Command::Subigs { .. } => "subigs",
            Command::Porosity { .. } => "porosity",
            Command::Evidence { .. } => "evidence",
            Command::Report { .. } => "report",
        }
    }

    fn spec(&self) -> &str {
        match self {
            Command::Validate { spec }
            | Command::Build { spec, .. }
            | Command::Export { spec, .. }
            | Command::Modulus { spec, .. }
            | Command::Uniformity { spec, .. }
            | Command::Confdim { spec }
            | Command::Walkdim { spec, .. }
            | Command::Removable { spec, .. }
            | Command::Subigs { spec, .. }
            | Command::Porosity { spec, .. }
            | Command::Evidence { spec, .. }
            | Command::Report { spec } => spec,
        }
    }
}

fn split(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

fn parse_edge(s: &str) -> Result<(VertexId, VertexId), String> {
    let ids: Vec<VertexId> = split(s).map(|t| t.parse().map_err(|_| format!("bad vertex id {t:?}"))).collect::<Result<_, _>>()?;
    match ids.as_slice() {
        &[u, v] => Ok((u, v)),
        _ => Err(format!("expected an edge U,V, got {s:?}")),
    }
}

/// Failure of a command: usage errors exit with 2, computation failures with 1.
enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Compute(e)
    }
}

/// Output of a successful command.
enum Output {
    Report { results: Value, certificates: Value },
    Text(String),
}

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("serializable report")
}

fn load(spec: &str) -> Result<(IgsSpec, String), Failure> {
    let path = PathBuf::from(spec);
    let (text, origin) = if path.is_file() {
        let text = std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("cannot read {spec}: {e}")))?;
        (text, spec.to_string())
    } else if let Some(text) = bundled_source(spec) {
        let stem = spec.strip_suffix(".igs").unwrap_or(spec);
        (text.to_string(), format!("bundled:{stem}"))
    } else {
        return Err(Failure::Usage(format!("no spec file or bundled example named {spec}")));
    };
    Ok((parse_spec(&text)?, origin))
}

fn build(spec: &IgsSpec, levels: usize, budget: usize) -> Result<Tower, Error> {
    Tower::build(spec.igs.clone(), levels.max(1), budget)
}

fn first_removable(spec: &IgsSpec, tol: f64) -> Result<(VertexId, VertexId), Failure> {
    let g = spec.igs.base();
    for j in 0..g.edge_count() as u32 {
        let (u, v) = g.edge(j);
        let rec = removable_edge_check(&spec.igs, (g.id(u), g.id(v)), &CLP_GRID, tol)?;
        if rec.removable {
            return Ok(rec.edge);
        }
    }
    Err(Failure::Compute(Error::NotRemovableStructure("no removable edge".into())))
}

fn run(cmd: &Command, spec: &IgsSpec, g: &Global) -> Result<Output, Failure> {
    let igs = &spec.igs;
    let tol = g.tol;
    let out = match cmd {
        Command::Validate { .. } => {
            let base = igs.base();
            let results = json!({
                "name": spec.name,
                "valid": true,
                "vertices": base.vertex_count(),
                "edges": base.edge_count(),
                "gluing_set": igs.gluing_set(),
                "maps": igs.maps().len(),
                "oriented": igs.two_map_pair().is_some(),
                "l_star": check_uniform_scaling(igs),
                "doubling": check_doubling(igs).holds,
            });
            let symmetry = detect_symmetry(igs).ok().flatten().map(|eta| eta.iter().map(|&v| base.id(v)).collect::<Vec<_>>());
            Output::Report { results, certificates: json!({ "symmetry": symmetry }) }
        }
        Command::Build { levels, checks, .. } => {
            let t = build(spec, *levels, g.budget_edges)?;
            let summary: Vec<Value> = (1..=t.top())
                .map(|n| {
                    let gr = t.graph(n).expect("built level");
                    json!({
                        "level": n,
                        "vertices": gr.vertex_count(),
                        "edges": gr.edge_count(),
                        "max_degree": gr.max_degree(),
                        "diameter": gr.diameter(),
                    })
                })
                .collect();
            let suite = if *checks { Some(structural_suite(&t)?) } else { None };
            let passed = suite.as_ref().map(|s| s.iter().all(|c| c.passed));
            if passed == Some(false) {
                let failed: Vec<String> =
                    suite.iter().flatten().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect();
                return Err(Failure::Compute(Error::ValidationError(failed.join("; "))));
            }
            Output::Report { results: json!({ "levels": summary }), certificates: json!({ "checks": suite }) }
        }
        Command::Export { level, format, .. } => {
            let t = build(spec, *level, g.budget_edges)?;
            Output::Text(export_graph(&t, *level, *format)?)
        }
        Command::Modulus { p, from, to, level, .. } => {
            let base = igs.base();
            let a = base.indices_of(from)?;
            let b = base.indices_of(to)?;
            let t = build(spec, *level, g.budget_edges)?;
            let (fa, fb) = (t.fiber(*level, 1, &a)?, t.fiber(*level, 1, &b)?);
            let rep = p_capacity_solve(t.graph(*level)?, &fa, &fb, *p, tol)?;
            let certificates = json!({
                "duality_residual": rep.duality_residual,
                "gradient_norm": rep.gradient_norm,
            });
            Output::Report { results: to_json(&rep), certificates }
        }
        Command::Uniformity { p_grid, .. } => {
            let grid = p_grid.clone().unwrap_or_else(|| CLP_GRID.to_vec());
            let rep = check_conductive_uniformity(igs, &grid, tol.max(igs_core::analysis::UNIFORMITY_TOL))?;
            let certificates = json!({ "uniform": rep.uniform, "certificate": if rep.uniform { "empirical" } else { "none" } });
            Output::Report { results: to_json(&rep), certificates }
        }
        Command::Confdim { .. } => {
            let q = conformal_dimension(igs, tol)?;
            let certificates = json!({ "bracket_check": q.bracket_check, "within_tol": q.within_tol });
            Output::Report { results: to_json(&q), certificates }
        }
        Command::Walkdim { p, .. } => {
            let ps = if p.is_empty() { vec![2.0] } else { p.clone() };
            let walks = ps.iter().map(|&p| walk_dimension(igs, p, tol)).collect::<Result<Vec<_>, _>>()?;
            let flags: Vec<bool> = walks.iter().map(|w| w.equality).collect();
            Output::Report { results: to_json(&walks), certificates: json!({ "equality": flags }) }
        }
        Command::Removable { edge, p_grid, .. } => {
            let grid = p_grid.clone().unwrap_or_else(|| CLP_GRID.to_vec());
            let base = igs.base();
            let edges: Vec<(VertexId, VertexId)> = match edge {
                Some(e) => vec![*e],
                None => base.edges().iter().map(|&(u, v)| (base.id(u), base.id(v))).collect(),
            };
            let recs = edges.iter().map(|&e| removable_edge_check(igs, e, &grid, tol)).collect::<Result<Vec<_>, _>>()?;
            let certificates: Vec<Value> =
                recs.iter().map(|r| json!({ "edge": r.edge, "removable": r.removable, "certificate": r.certificate })).collect();
            Output::Report { results: to_json(&recs), certificates: json!(certificates) }
        }
        Command::Subigs { edge, .. } => {
            let sub = remove_edge_subigs(igs, *edge)?;
            let sub_spec = IgsSpec { name: format!("{}_without_{}_{}", spec.name, edge.0, edge.1), igs: sub };
            let results = json!({
                "removed_edge": edge,
                "vertices": sub_spec.igs.base().vertex_count(),
                "edges": sub_spec.igs.base().edge_count(),
                "l_star": check_uniform_scaling(&sub_spec.igs),
                "spec": serialize_spec(&sub_spec),
            });
            Output::Report { results, certificates: json!({}) }
        }
        Command::Porosity { levels, edge, .. } => {
            let bands = levels.clone().unwrap_or_else(|| POROSITY_BANDS.to_vec());
            let edge = match edge {
                Some(e) => *e,
                None => first_removable(spec, tol)?,
            };
            let sub = remove_edge_subigs(igs, edge)?;
            let t = Tower::with_budget(igs.clone(), g.budget_edges);
            let s = Tower::with_budget(sub, g.budget_edges);
            let w = porosity_witness(&t, &s, &bands)?;
            let certificates = json!({
                "verified": w.verified,
                "constant": w.constant,
                "nominal_constant": w.nominal_constant,
                "nominal_verified": w.nominal_verified,
                "depth": w.depth,
            });
            if !w.verified {
                return Err(Failure::Compute(Error::ValidationError(format!(
                    "porosity not verified: {}",
                    w.failure.unwrap_or_default()
                ))));
            }
            Output::Report { results: to_json(&w), certificates }
        }
        Command::Evidence { p, m_max, level, .. } => {
            let p = match p {
                Some(p) => *p,
                None => conformal_dimension(igs, tol)?.q,
            };
            let t = build(spec, *level, g.budget_edges)?;
            let pairs = default_evidence_pairs(&t, *level)?;
            let ev = loewner_evidence(&t, *level, &pairs, p, *m_max, tol)?;
            Output::Report { results: to_json(&ev), certificates: json!({ "bands": ev.bands }) }
        }
        Command::Report { .. } => {
            let rep = counterexample_report(igs, tol);
            let certificates = json!({
                "verdict": rep.verdict,
                "positive": rep.positive,
                "assumptions": clp_assumption_report(igs).all_hold,
                "uniformity_certificate": rep.assumptions.uniformity_certificate,
                "removable": rep.removable.iter().filter(|r| r.removable).map(|r| json!({ "edge": r.edge, "certificate": r.certificate })).collect::<Vec<_>>(),
                "porosity_verified": rep.porosity.as_ref().map(|w| w.verified),
            });
            Output::Report { results: to_json(&rep), certificates }
        }
    };
    Ok(out)
}

fn inputs(cmd: &Command, origin: &str, name: &str) -> Value {
    let mut args = serde_json::Map::new();
    let arg = |args: &mut serde_json::Map<String, Value>, k: &str, v: Value| {
        args.insert(k.to_string(), v);
    };
    match cmd {
        Command::Validate { .. } | Command::Confdim { .. } | Command::Report { .. } => {}
        Command::Build { levels, checks, .. } => {
            arg(&mut args, "levels", json!(levels));
            arg(&mut args, "checks", json!(checks));
        }
        Command::Export { level, format, .. } => {
            arg(&mut args, "level", json!(level));
            arg(&mut args, "format", json!(format!("{format:?}").to_lowercase()));
        }
        Command::Modulus { p, from, to, level, .. } => {
            arg(&mut args, "p", json!(p));
            arg(&mut args, "from", json!(from));
            arg(&mut args, "to", json!(to));
            arg(&mut args, "level", json!(level));
        }
        Command::Uniformity { p_grid, .. } => arg(&mut args, "p_grid", json!(p_grid.clone().unwrap_or_else(|| CLP_GRID.to_vec()))),
        Command::Walkdim { p, .. } => arg(&mut args, "p", json!(p)),
        Command::Removable { edge, p_grid, .. } => {
            arg(&mut args, "edge", json!(edge));
            arg(&mut args, "p_grid", json!(p_grid.clone().unwrap_or_else(|| CLP_GRID.to_vec())));
        }
        Command::Subigs { edge, .. } => arg(&mut args, "edge", json!(edge)),
        Command::Porosity { levels, edge, .. } => {
            arg(&mut args, "levels", json!(levels.clone().unwrap_or_else(|| POROSITY_BANDS.to_vec())));
            arg(&mut args, "edge", json!(edge));
        }
        Command::Evidence { p, m_max, level, .. } => {
            arg(&mut args, "p", json!(p));
            arg(&mut args, "m_max", json!(m_max));
            arg(&mut args, "level", json!(level));
        }
    }
    json!({ "spec": origin, "name": name, "args": Value::Object(args) })
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn document(cmd: &Command, g: &Global, inputs: Value, body: Value, started: Instant) -> String {
    let mut doc = json!({
        "schema": SCHEMA,
        "command": cmd.name(),
        "inputs": inputs,
        "tolerances": { "tol": g.tol, "budget_edges": g.budget_edges },
    });
    let map = doc.as_object_mut().expect("object");
    if let Value::Object(extra) = body {
        map.extend(extra);
    }
    if !g.no_timings {
        map.insert("timings".into(), json!({ "seconds": started.elapsed().as_secs_f64() }));
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable report");
    text.push('\n');
    text
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let cmd = &cli.command;
    let loaded = load(cmd.spec());
    let (result, input) = match loaded {
        Ok((spec, origin)) => (run(cmd, &spec, &cli.global), inputs(cmd, &origin, &spec.name)),
        Err(f) => (Err(f), inputs(cmd, cmd.spec(), "")),
    };
    let (text, code) = match result {
        Ok(Output::Text(text)) => (text, ExitCode::SUCCESS),
        Ok(Output::Report { results, certificates }) => (
            document(cmd, &cli.global, input, json!({ "results": results, "certificates": certificates }), started),
            ExitCode::SUCCESS,
        ),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            let body = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            (document(cmd, &cli.global, input, body, started), ExitCode::from(1))
        }
    };
    if let Err(msg) = emit(&text, &cli.global.out) {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    code
}
