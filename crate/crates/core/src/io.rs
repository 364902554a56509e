//! IGS spec files (TOML), the bundled example library, graph export in the
//! edge-list and DOT formats, and edge-list parsing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph, VertexId};
use crate::igs::{orient_with_order, Igs};
use crate::tower::{Item, Tower};

/// A parsed spec file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IgsSpec {
    pub name: String,
    pub igs: Igs,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    name: Option<String>,
    graph: GraphSection,
    gluing: GluingSection,
    #[serde(default)]
    glue: Vec<GlueEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphSection {
    vertices: Vec<Spanned<VertexId>>,
    edges: Vec<Spanned<(VertexId, VertexId)>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GluingSection {
    set: Vec<Spanned<String>>,
    orientation: Option<Spanned<String>>,
    order: Option<Spanned<Vec<VertexId>>>,
    phi_minus: Option<Spanned<Vec<VertexId>>>,
    phi_plus: Option<Spanned<Vec<VertexId>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GlueEntry {
    vertex: Spanned<VertexId>,
    edge: Spanned<(VertexId, VertexId)>,
    map: Spanned<Vec<VertexId>>,
}

/// Line and column (1-based) of a byte offset.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

fn parse_error(text: &str, span: Range<usize>, message: impl Into<String>) -> Error {
    let (line, column) = position(text, span.start);
    Error::ParseError { line, column, message: message.into() }
}

/// Parses a spec file into a validated IGS.
pub fn parse_spec(text: &str) -> Result<IgsSpec> {
    let file: SpecFile = toml::from_str(text).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        parse_error(text, span, e.message().to_string())
    })?;

    let mut ids: Vec<VertexId> = Vec::new();
    for v in &file.graph.vertices {
        if ids.contains(v.get_ref()) {
            return Err(parse_error(text, v.span(), format!("duplicate vertex {}", v.get_ref())));
        }
        ids.push(*v.get_ref());
    }
    let mut pairs = Vec::new();
    for e in &file.graph.edges {
        let (a, b) = *e.get_ref();
        let key = (a.min(b), a.max(b));
        if a == b {
            return Err(parse_error(text, e.span(), format!("loop edge at vertex {a}")));
        }
        if pairs.contains(&key) {
            return Err(parse_error(text, e.span(), format!("duplicate edge [{a}, {b}]")));
        }
        for v in [a, b] {
            if !ids.contains(&v) {
                return Err(parse_error(text, e.span(), format!("edge uses undeclared vertex {v}")));
            }
        }
        pairs.push(key);
    }
    let base = build_graph(&ids, &pairs)?;
    let set: Vec<String> = file.gluing.set.iter().map(|s| s.get_ref().clone()).collect();
    let indices = |list: &Spanned<Vec<VertexId>>| -> Result<Vec<u32>> {
        list.get_ref()
            .iter()
            .map(|&v| base.index_of(v).map_err(|_| parse_error(text, list.span(), format!("unknown vertex {v}"))))
            .collect()
    };

    let igs = match (&file.gluing.orientation, file.glue.is_empty()) {
        (Some(kind), true) => {
            if kind.get_ref() != "vertex-order" {
                return Err(parse_error(
                    text,
                    kind.span(),
                    format!("unknown orientation \"{}\" (expected \"vertex-order\")", kind.get_ref()),
                ));
            }
            let missing = |what: &str| parse_error(text, kind.span(), format!("oriented gluing needs `{what}`"));
            let minus = indices(file.gluing.phi_minus.as_ref().ok_or_else(|| missing("phi_minus"))?)?;
            let plus = indices(file.gluing.phi_plus.as_ref().ok_or_else(|| missing("phi_plus"))?)?;
            let order = match &file.gluing.order {
                Some(o) => indices(o)?,
                None => (0..base.vertex_count() as u32).collect(),
            };
            orient_with_order(base, set, minus, plus, &order)
        }
        (None, false) => {
            let mut table = Vec::new();
            for entry in &file.glue {
                let v = base
                    .index_of(*entry.vertex.get_ref())
                    .map_err(|_| parse_error(text, entry.vertex.span(), "unknown vertex"))?;
                let (a, b) = *entry.edge.get_ref();
                let j = base
                    .edge_by_ids(a, b)
                    .map_err(|_| parse_error(text, entry.edge.span(), format!("unknown edge [{a}, {b}]")))?;
                table.push((v, j, indices(&entry.map)?));
            }
            Igs::from_table(base, set, &table)
        }
        (Some(kind), false) => {
            return Err(parse_error(text, kind.span(), "use either `orientation` or [[glue]] tables, not both"))
        }
        (None, true) => {
            return Err(Error::ParseError {
                line: 1,
                column: 1,
                message: "gluing data missing: give `orientation` or [[glue]] tables".into(),
            })
        }
    }
    .map_err(|e| match e {
        Error::InvalidIgs(v) => Error::ValidationError(v.join("; ")),
        other => Error::ValidationError(other.to_string()),
    })?;
    Ok(IgsSpec { name: file.name.unwrap_or_default(), igs })
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn id_list(g: &Graph, vs: &[u32]) -> String {
    let items: Vec<String> = vs.iter().map(|&v| g.id(v).to_string()).collect();
    format!("[{}]", items.join(", "))
}

/// Writes a spec file that [`parse_spec`] maps back to the same IGS.
pub fn serialize_spec(spec: &IgsSpec) -> String {
    let igs = &spec.igs;
    let g = igs.base();
    let mut out = String::new();
    writeln!(out, "name = {}", quoted(&spec.name)).unwrap();
    writeln!(out, "\n[graph]").unwrap();
    let all: Vec<u32> = (0..g.vertex_count() as u32).collect();
    writeln!(out, "vertices = {}", id_list(g, &all)).unwrap();
    let edges: Vec<String> = g.edges().iter().map(|&(a, b)| format!("[{}, {}]", g.id(a), g.id(b))).collect();
    writeln!(out, "edges = [{}]", edges.join(", ")).unwrap();
    writeln!(out, "\n[gluing]").unwrap();
    let set: Vec<String> = igs.gluing_set().iter().map(|s| quoted(s)).collect();
    writeln!(out, "set = [{}]", set.join(", ")).unwrap();
    match igs.orientation() {
        Some(o) => {
            writeln!(out, "orientation = \"vertex-order\"").unwrap();
            if o.order.as_slice() != g.ids() {
                let items: Vec<String> = o.order.iter().map(|v| v.to_string()).collect();
                writeln!(out, "order = [{}]", items.join(", ")).unwrap();
            }
            writeln!(out, "phi_minus = {}", id_list(g, igs.map(o.minus))).unwrap();
            writeln!(out, "phi_plus = {}", id_list(g, igs.map(o.plus))).unwrap();
        }
        None => {
            for (j, &(lo, hi)) in g.edges().iter().enumerate() {
                for (s, v) in [lo, hi].into_iter().enumerate() {
                    writeln!(out, "\n[[glue]]").unwrap();
                    writeln!(out, "vertex = {}", g.id(v)).unwrap();
                    writeln!(out, "edge = [{}, {}]", g.id(lo), g.id(hi)).unwrap();
                    writeln!(out, "map = {}", id_list(g, igs.glue_map(j as u32, s))).unwrap();
                }
            }
        }
    }
    out
}

const BUNDLED: &[(&str, &str)] = &[
    ("laakso_diamond", include_str!("../specs/laakso_diamond.igs")),
    ("laakso_space", include_str!("../specs/laakso_space.igs")),
    ("laakso_n2_l4", include_str!("../specs/laakso_n2_l4.igs")),
    ("counterexample", include_str!("../specs/counterexample.igs")),
    ("nonsym_n3_l4", include_str!("../specs/nonsym_n3_l4.igs")),
    ("nonsym_n3_l4_removable", include_str!("../specs/nonsym_n3_l4_removable.igs")),
    ("probably_loewner", include_str!("../specs/probably_loewner.igs")),
    ("smallest_counterexample", include_str!("../specs/smallest_counterexample.igs")),
];

/// Names of the bundled examples.
pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// Source text of a bundled example; accepts an optional `.igs` suffix.
pub fn bundled_source(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".igs").unwrap_or(name);
    BUNDLED.iter().find(|(n, _)| *n == stem).map(|(_, s)| *s)
}

/// Parsed bundled example.
pub fn bundled(name: &str) -> Result<IgsSpec> {
    let text = bundled_source(name).ok_or_else(|| Error::ValidationError(format!("no bundled example named {name}")))?;
    parse_spec(text)
}

/// Export formats for [`export_graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    EdgeList,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "edgelist" => Ok(ExportFormat::EdgeList),
            other => Err(Error::ValidationError(format!("unknown export format {other}"))),
        }
    }
}

/// Level-`n` graph as text. Vertex labels are identifiers at level 1 and
/// indices above.
pub fn export_graph(tower: &Tower, n: usize, format: ExportFormat) -> Result<String> {
    let g = tower.graph(n)?;
    Ok(match format {
        ExportFormat::EdgeList => {
            let mut out = String::new();
            for &(a, b) in g.edges() {
                writeln!(out, "{} {}", g.id(a), g.id(b)).unwrap();
            }
            out
        }
        ExportFormat::Dot => export_dot(tower, n)?,
    })
}

const PALETTE: &[&str] = &["#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628"];

fn export_dot(tower: &Tower, n: usize) -> Result<String> {
    let g = tower.graph(n)?;
    let igs = tower.igs();
    let membership = igs.image_membership();
    let roots: Vec<Item> = if n == 1 {
        (0..g.vertex_count() as u32).map(Item::Vertex).collect()
    } else {
        tower.project_all_vertices(n, 1)?
    };
    let mut out = String::new();
    writeln!(out, "graph level_{n} {{").unwrap();
    writeln!(out, "  node [shape=circle, style=filled, fillcolor=white, fontsize=10];").unwrap();
    for v in 0..g.vertex_count() as u32 {
        let color = match roots[v as usize] {
            Item::Vertex(z) => membership.iter().position(|row| row[z as usize]).map(|k| PALETTE[k % PALETTE.len()]),
            Item::Edge(_) => None,
        };
        match color {
            Some(c) => writeln!(out, "  v{} [label=\"{}\", fillcolor=\"{}\"];", v, g.id(v), c).unwrap(),
            None => writeln!(out, "  v{} [label=\"{}\"];", v, g.id(v)).unwrap(),
        }
    }
    if n == 1 {
        for &(a, b) in g.edges() {
            writeln!(out, "  v{a} -- v{b};").unwrap();
        }
    } else {
        let ne1 = igs.base().edge_count();
        let mut groups: BTreeMap<usize, Vec<(u32, u32)>> = BTreeMap::new();
        for (j, &e) in g.edges().iter().enumerate() {
            groups.entry(j / ne1).or_default().push(e);
        }
        for (parent, edges) in groups {
            writeln!(out, "  subgraph cluster_{parent} {{").unwrap();
            writeln!(out, "    label=\"parent {parent}\";").unwrap();
            for (a, b) in edges {
                writeln!(out, "    v{a} -- v{b};").unwrap();
            }
            writeln!(out, "  }}").unwrap();
        }
    }
    writeln!(out, "}}").unwrap();
    Ok(out)
}

/// Lines `j p` mapping each level-`n` edge to its parent edge at level `n - 1`.
pub fn export_fibers(tower: &Tower, n: usize) -> Result<String> {
    let g = tower.graph(n)?;
    if n == 1 {
        return Err(Error::LevelOutOfRange { level: 0, top: tower.top() });
    }
    let ne1 = tower.igs().base().edge_count();
    let mut out = String::from("# edge parent\n");
    for j in 0..g.edge_count() {
        writeln!(out, "{} {}", j, j / ne1).unwrap();
    }
    Ok(out)
}

/// Parses the edge-list format: one `u v` pair per line, `#` comments.
/// The vertex set is the set of endpoints.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let col = raw.len() - raw.trim_start().len() + 1;
        if fields.len() != 2 {
            return Err(Error::ParseError { line: i + 1, column: col, message: "expected two vertex ids".into() });
        }
        let mut ends = [0u64; 2];
        for (k, f) in fields.iter().enumerate() {
            ends[k] = f.parse().map_err(|_| Error::ParseError {
                line: i + 1,
                column: raw.find(f).unwrap_or(0) + 1,
                message: format!("invalid vertex id {f}"),
            })?;
        }
        let key = (ends[0].min(ends[1]), ends[0].max(ends[1]));
        if ends[0] == ends[1] || pairs.contains(&key) {
            return Err(Error::ParseError {
                line: i + 1,
                column: col,
                message: if ends[0] == ends[1] { "loop edge".into() } else { "duplicate edge".into() },
            });
        }
        pairs.push(key);
    }
    let mut ids: Vec<VertexId> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    ids.sort_unstable();
    ids.dedup();
    build_graph(&ids, &pairs)
}
