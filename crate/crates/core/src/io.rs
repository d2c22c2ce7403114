//! Graph files and JSON helpers.
//!
//! The JSON graph format is a single object:
//!
//! ```json
//! {"family":"butterfly","r":1,"num_vertices":4,"edges":[[0,2],[0,3],[1,2],[1,3]],
//!  "labels":[{"id":0,"level":0,"row":"0"}, ...]}
//! ```
//!
//! `r` is present for butterflies, `n` for cycles and paths, and `labels`
//! only for butterflies. Edges are `[u, v]` with `u < v` in sorted order.
//! Output is compact with a fixed key order so files are byte-stable.

use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_butterfly, build_cycle, build_path, ButterflyLabel, Family, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    Dot,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    family: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    n: Option<usize>,
    num_vertices: usize,
    edges: Vec<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    labels: Option<Vec<LabelDoc>>,
}

#[derive(Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelDoc {
    id: usize,
    level: usize,
    row: String,
}

pub fn export_graph(g: &Graph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Json => to_canonical_json(&graph_doc(g)),
        GraphFormat::Dot => export_dot(g),
    }
}

fn graph_doc(g: &Graph) -> GraphDoc {
    let (r, n) = match g.family() {
        Family::Butterfly { r } => (Some(r), None),
        Family::Cycle { n } | Family::Path { n } => (None, Some(n)),
        Family::Custom => (None, None),
    };
    let labels = r.map(|r| {
        (0..g.num_vertices())
            .map(|id| {
                let label = g.label_of(id).expect("butterfly vertex has a label");
                LabelDoc {
                    id,
                    level: label.level,
                    row: label.row_string(r),
                }
            })
            .collect()
    });
    GraphDoc {
        family: g.family().name().to_string(),
        r,
        n,
        num_vertices: g.num_vertices(),
        edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
        labels,
    }
}

fn export_dot(g: &Graph) -> String {
    let name = |v: usize| match g.family() {
        Family::Butterfly { r } => {
            let label = g.label_of(v).expect("butterfly vertex has a label");
            format!("L{}_{}", label.level, label.row_string(r))
        }
        _ => v.to_string(),
    };
    let mut out = String::new();
    writeln!(out, "graph \"{}\" {{", g.reference()).unwrap();
    for v in 0..g.num_vertices() {
        writeln!(out, "  {};", name(v)).unwrap();
    }
    for &(u, v) in g.edges() {
        writeln!(out, "  {} -- {};", name(u), name(v)).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Parses a JSON graph. Generator families are rebuilt and must match the
/// stored edges and labels exactly.
pub fn import_graph(text: &str) -> Result<Graph> {
    let doc: GraphDoc = from_json(text)?;
    for &[u, v] in &doc.edges {
        if u >= v {
            return Err(Error::InvalidParameter(format!(
                "edge [{u}, {v}] must have u < v"
            )));
        }
    }
    let need = |field: Option<usize>, name: &str| {
        field.ok_or_else(|| {
            Error::InvalidParameter(format!("family `{}` needs `{name}`", doc.family))
        })
    };
    let expected = match doc.family.as_str() {
        "butterfly" => Some(build_butterfly(need(doc.r, "r")?)?),
        "cycle" => Some(build_cycle(need(doc.n, "n")?)?),
        "path" => Some(build_path(need(doc.n, "n")?)?),
        "custom" => None,
        other => return Err(Error::UnsupportedFamily(other.to_string())),
    };
    let g = Graph::from_edges(
        doc.num_vertices,
        doc.edges.iter().map(|&[u, v]| (u, v)),
        Family::Custom,
    )?;
    let Some(expected) = expected else {
        if doc.r.is_some() || doc.n.is_some() || doc.labels.is_some() {
            return Err(Error::InvalidParameter(
                "custom graphs carry no `r`, `n` or `labels`".into(),
            ));
        }
        return Ok(g);
    };
    if g.num_vertices() != expected.num_vertices() || g.edges() != expected.edges() {
        return Err(Error::InvalidParameter(format!(
            "edges do not match the {} generator",
            doc.family
        )));
    }
    if let Family::Butterfly { r } = expected.family() {
        if let Some(labels) = &doc.labels {
            check_labels(&expected, r, labels)?;
        }
    } else if doc.labels.is_some() {
        return Err(Error::InvalidParameter(
            "labels are only defined for butterflies".into(),
        ));
    }
    Ok(expected)
}

fn check_labels(g: &Graph, r: usize, labels: &[LabelDoc]) -> Result<()> {
    if labels.len() != g.num_vertices() {
        return Err(Error::InvalidParameter(format!(
            "{} labels for {} vertices",
            labels.len(),
            g.num_vertices()
        )));
    }
    for doc in labels {
        if doc.row.len() != r {
            return Err(Error::InvalidParameter(format!(
                "row `{}` of vertex {} is not {r} bits",
                doc.row, doc.id
            )));
        }
        let label = ButterflyLabel::from_bits(doc.level, &doc.row)?;
        if g.id_of(label)? != doc.id {
            return Err(Error::InvalidParameter(format!(
                "label ({}, {}) does not belong to vertex {}",
                doc.level, doc.row, doc.id
            )));
        }
    }
    Ok(())
}

/// Compact JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string(value).expect("in-memory values serialize");
    text.push('\n');
    text
}

/// Deserializes JSON, mapping syntax and shape errors to [`Error::Parse`].
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}
