//! Text formats for graphs, representations, quivers, projector families and
//! vertex-indexed value maps. The documents are JSON; floating point numbers
//! are emitted in scientific notation with 17 significant digits, so writing
//! and re-reading is bit-exact.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::bridges::{ProjectorFamily, Quiver};
use crate::graph::{Graph, VertexId};
use crate::linalg::{CMat, C64};
use crate::rep::{CharVector, DimVector, Representation};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid json at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid document: {0}")]
    Invalid(String),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Serializes a JSON value with deterministic key order and floats printed
/// as 17-significant-digit scientific notation.
pub fn to_text(value: &Value) -> String {
    let mut out = String::new();
    emit(value, 0, &mut out);
    out.push('\n');
    out
}

fn emit(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                emit(item, indent, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let pad = "  ".repeat(indent + 1);
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push_str(",\n");
                }
                out.push_str(&pad);
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push_str(": ");
                emit(item, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}

/// Seventeen significant digits: one before the point, sixteen after.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_to_string(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Read {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_string(path: &Path, content: &str) -> Result<(), FormatError> {
    std::fs::write(path, content).map_err(|source| FormatError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn parse(text: &str) -> Result<Value, FormatError> {
    Ok(serde_json::from_str(text)?)
}

fn as_object<'v>(value: &'v Value, what: &str) -> Result<&'v Map<String, Value>, FormatError> {
    value
        .as_object()
        .ok_or_else(|| FormatError::Invalid(format!("{what} must be an object")))
}

fn field<'v>(map: &'v Map<String, Value>, name: &str) -> Result<&'v Value, FormatError> {
    map.get(name)
        .ok_or_else(|| FormatError::Invalid(format!("missing field `{name}`")))
}

fn string_list(value: &Value, what: &str) -> Result<Vec<String>, FormatError> {
    value
        .as_array()
        .ok_or_else(|| FormatError::Invalid(format!("{what} must be a list")))?
        .iter()
        .map(|item| {
            item.as_str()
                .map(str::to_string)
                .ok_or_else(|| FormatError::Invalid(format!("{what} entries must be strings")))
        })
        .collect()
}

fn pair_list(value: &Value, what: &str) -> Result<Vec<(String, String)>, FormatError> {
    value
        .as_array()
        .ok_or_else(|| FormatError::Invalid(format!("{what} must be a list")))?
        .iter()
        .map(|item| {
            let pair = item
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| {
                    FormatError::Invalid(format!("{what} entries must be 2-element lists"))
                })?;
            match (pair[0].as_str(), pair[1].as_str()) {
                (Some(a), Some(b)) => Ok((a.to_string(), b.to_string())),
                _ => Err(FormatError::Invalid(format!(
                    "{what} entries must contain strings"
                ))),
            }
        })
        .collect()
}

// ---- graphs ----

pub fn graph_to_value(graph: &Graph) -> Value {
    let edges: Vec<Value> = graph
        .edge_endpoints()
        .iter()
        .map(|&(a, b)| json!([graph.vertex_id(a), graph.vertex_id(b)]))
        .collect();
    let mut map = Map::new();
    map.insert("vertices".into(), json!(graph.vertex_ids()));
    map.insert("edges".into(), Value::Array(edges));
    if graph.is_verification_only() {
        map.insert("verification_only".into(), json!(true));
    }
    Value::Object(map)
}

pub fn graph_from_value(value: &Value) -> Result<Graph, FormatError> {
    let map = as_object(value, "graph")?;
    let vertices = string_list(field(map, "vertices")?, "vertices")?;
    let edges = pair_list(field(map, "edges")?, "edges")?;
    let verification_only = map
        .get("verification_only")
        .and_then(Value::as_bool)
        .unwrap_or(false);
    let graph = if verification_only {
        Graph::verification_only(vertices, &edges)
    } else {
        Graph::new(vertices, &edges)
    };
    graph.map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn graph_from_str(text: &str) -> Result<Graph, FormatError> {
    graph_from_value(&parse(text)?)
}

pub fn graph_to_string(graph: &Graph) -> String {
    to_text(&graph_to_value(graph))
}

// ---- matrices ----

pub fn matrix_to_value(m: &CMat) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            let cols: Vec<Value> = (0..m.ncols())
                .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                .collect();
            Value::Array(cols)
        })
        .collect();
    Value::Array(rows)
}

fn matrix_from_value(value: &Value, rows: usize, cols: usize, what: &str) -> Result<CMat, FormatError> {
    let row_values = value
        .as_array()
        .ok_or_else(|| FormatError::Invalid(format!("{what}: matrix must be a list of rows")))?;
    if row_values.len() != rows {
        return Err(FormatError::Invalid(format!(
            "{what}: expected {rows} rows, got {}",
            row_values.len()
        )));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, row) in row_values.iter().enumerate() {
        let entries = row
            .as_array()
            .ok_or_else(|| FormatError::Invalid(format!("{what}: row {i} must be a list")))?;
        if entries.len() != cols {
            return Err(FormatError::Invalid(format!(
                "{what}: row {i} expected {cols} entries, got {}",
                entries.len()
            )));
        }
        for (j, entry) in entries.iter().enumerate() {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| {
                    FormatError::Invalid(format!(
                        "{what}: entry ({i},{j}) must be a [re, im] pair"
                    ))
                })?;
            let re = pair[0].as_f64().ok_or_else(|| {
                FormatError::Invalid(format!("{what}: entry ({i},{j}) re must be a number"))
            })?;
            let im = pair[1].as_f64().ok_or_else(|| {
                FormatError::Invalid(format!("{what}: entry ({i},{j}) im must be a number"))
            })?;
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

// ---- representations ----

pub fn rep_to_value(rep: &Representation) -> Value {
    let graph = rep.graph();
    let mut dims = Map::new();
    for (v, d) in rep.dims().iter() {
        dims.insert(v.clone(), json!(d));
    }
    let mut edges = Map::new();
    for (e, &(a, b)) in graph.edge_endpoints().iter().enumerate() {
        let key = format!("{}|{}", graph.vertex_id(a), graph.vertex_id(b));
        edges.insert(key, matrix_to_value(rep.edge_op(e)));
    }
    json!({
        "graph": graph_to_value(graph),
        "dims": Value::Object(dims),
        "edges": Value::Object(edges),
    })
}

pub fn rep_from_value(value: &Value) -> Result<Representation, FormatError> {
    let map = as_object(value, "representation")?;
    let graph = graph_from_value(field(map, "graph")?)?;
    let dims_map = as_object(field(map, "dims")?, "dims")?;
    let mut dims_entries: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (v, d) in dims_map {
        let d = d
            .as_u64()
            .ok_or_else(|| FormatError::Invalid(format!("dims[{v}] must be a nonnegative integer")))?;
        dims_entries.insert(v.clone(), d as usize);
    }
    let dims = DimVector::new(&graph, dims_entries)
        .map_err(|e| FormatError::Invalid(e.to_string()))?;
    let edges_map = as_object(field(map, "edges")?, "edges")?;
    let mut ops = Vec::with_capacity(graph.edge_count());
    for &(a, b) in graph.edge_endpoints() {
        let (ida, idb) = (graph.vertex_id(a), graph.vertex_id(b));
        let key = format!("{ida}|{idb}");
        let entry = edges_map
            .get(&key)
            .ok_or_else(|| FormatError::Invalid(format!("missing edge matrix `{key}`")))?;
        ops.push(matrix_from_value(
            entry,
            dims.get(ida),
            dims.get(idb),
            &key,
        )?);
    }
    Representation::new(graph, dims, ops).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn rep_from_str(text: &str) -> Result<Representation, FormatError> {
    rep_from_value(&parse(text)?)
}

pub fn rep_to_string(rep: &Representation) -> String {
    to_text(&rep_to_value(rep))
}

// ---- quivers ----

pub fn quiver_to_value(quiver: &Quiver) -> Value {
    json!({
        "vertices": quiver.graph().vertex_ids(),
        "arrows": quiver
            .arrows()
            .iter()
            .map(|(t, h)| json!([t, h]))
            .collect::<Vec<Value>>(),
    })
}

pub fn quiver_from_value(value: &Value) -> Result<Quiver, FormatError> {
    let map = as_object(value, "quiver")?;
    let vertices = string_list(field(map, "vertices")?, "vertices")?;
    let arrows = pair_list(field(map, "arrows")?, "arrows")?;
    Quiver::new(vertices, arrows).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn quiver_from_str(text: &str) -> Result<Quiver, FormatError> {
    quiver_from_value(&parse(text)?)
}

// ---- projector families ----

pub fn projectors_to_value(family: &ProjectorFamily) -> Value {
    json!({
        "ambient_dim": family.ambient_dim,
        "projectors": family
            .projectors
            .iter()
            .map(matrix_to_value)
            .collect::<Vec<Value>>(),
    })
}

pub fn projectors_from_value(value: &Value) -> Result<ProjectorFamily, FormatError> {
    let map = as_object(value, "projector family")?;
    let ambient = field(map, "ambient_dim")?
        .as_u64()
        .ok_or_else(|| FormatError::Invalid("ambient_dim must be a nonnegative integer".into()))?
        as usize;
    let list = field(map, "projectors")?
        .as_array()
        .ok_or_else(|| FormatError::Invalid("projectors must be a list".into()))?;
    let projectors = list
        .iter()
        .enumerate()
        .map(|(i, m)| matrix_from_value(m, ambient, ambient, &format!("projector {i}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProjectorFamily {
        ambient_dim: ambient,
        projectors,
    })
}

pub fn projectors_from_str(text: &str) -> Result<ProjectorFamily, FormatError> {
    projectors_from_value(&parse(text)?)
}

pub fn projectors_to_string(family: &ProjectorFamily) -> String {
    to_text(&projectors_to_value(family))
}

// ---- vertex-value maps ----

pub fn char_map_from_str(text: &str) -> Result<CharVector, FormatError> {
    let value = parse(text)?;
    let map = as_object(&value, "character map")?;
    let mut out = CharVector::new();
    for (v, x) in map {
        let x = x
            .as_f64()
            .ok_or_else(|| FormatError::Invalid(format!("value at `{v}` must be a number")))?;
        out.insert(v.clone(), x);
    }
    Ok(out)
}

pub fn dim_map_from_str(text: &str, graph: &Graph) -> Result<DimVector, FormatError> {
    let value = parse(text)?;
    let map = as_object(&value, "dimension map")?;
    let mut entries: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (v, d) in map {
        let d = d
            .as_u64()
            .ok_or_else(|| FormatError::Invalid(format!("dims[{v}] must be a nonnegative integer")))?;
        entries.insert(v.clone(), d as usize);
    }
    // Missing vertices default to zero.
    for v in graph.vertex_ids() {
        entries.entry(v.clone()).or_insert(0);
    }
    DimVector::new(graph, entries).map_err(|e| FormatError::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::linalg::creal;

    #[test]
    fn graph_round_trip() {
        let g = families::e_n(7).unwrap();
        let text = graph_to_string(&g);
        let back = graph_from_str(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rep_round_trip_is_bit_exact() {
        let g = families::star(3).unwrap();
        let dims = DimVector::from_ints(&g, &[2, 1, 1, 1]).unwrap();
        let ops = (0..3)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 3.0 + 0.1;
                let mut column = CMat::zeros(2, 1);
                column[(0, 0)] = C64::new(theta.cos(), 1.0 / 3.0);
                column[(1, 0)] = C64::new(theta.sin(), -2.0 / 7.0);
                column
            })
            .collect();
        let rep = Representation::new(g, dims, ops).unwrap();
        let text = rep_to_string(&rep);
        let back = rep_from_str(&text).unwrap();
        assert_eq!(back, rep);
        // And writing again yields the identical byte string.
        assert_eq!(rep_to_string(&back), text);
    }

    #[test]
    fn zero_dim_edges_serialize() {
        let g = families::a_n(2).unwrap();
        let rep = Representation::simplest(g, "1").unwrap();
        let text = rep_to_string(&rep);
        let back = rep_from_str(&text).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn projector_round_trip() {
        let family = ProjectorFamily {
            ambient_dim: 2,
            projectors: vec![CMat::identity(2, 2), CMat::from_element(2, 2, creal(0.5))],
        };
        let text = projectors_to_string(&family);
        let back = projectors_from_str(&text).unwrap();
        assert_eq!(back, family);
    }

    #[test]
    fn parse_error_carries_position() {
        let err = graph_from_str("{ \"vertices\": [").unwrap_err();
        assert!(matches!(err, FormatError::Parse { .. }));
    }

    #[test]
    fn missing_field_is_reported() {
        let err = graph_from_str("{ \"vertices\": [\"a\"] }").unwrap_err();
        match err {
            FormatError::Invalid(msg) => assert!(msg.contains("edges")),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
