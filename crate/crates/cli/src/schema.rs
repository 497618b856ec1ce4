//! Framework JSON files.
//!
//! ```json
//! { "dim": 2, "vertices": [[0, 0], [1, 0], [0, 1]], "edges": [[0, 1], [1, 2], [2, 0]],
//!   "free_edge": 0, "rest_lengths": [1, 1.4142135623730951, 1],
//!   "pins": [{"vertex": 0, "axis": 0, "value": 0}, ...] }
//! ```
//!
//! `rest_lengths` is optional on input (measured from the vertices when
//! absent) and always written on output. Result files produced by `search`
//! embed a framework under the `"framework"` key and are accepted wherever a
//! framework is.

use std::path::Path;

use anyhow::{bail, Context, Result};
use framesaddle::framework::{Configuration, Edge, Pin, Topology};
use framesaddle::Framework64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinJson {
    pub vertex: usize,
    pub axis: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameworkJson {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub edges: Vec<[usize; 2]>,
    pub free_edge: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rest_lengths: Option<Vec<f64>>,
    #[serde(default)]
    pub pins: Vec<PinJson>,
}

impl FrameworkJson {
    pub fn from_framework(fw: &Framework64) -> Self {
        let topo = fw.topology();
        Self {
            dim: fw.dim(),
            vertices: fw.config().vertices(),
            edges: topo.edges().iter().map(|e| [e.a, e.b]).collect(),
            free_edge: topo.free_edge(),
            rest_lengths: Some(fw.rest_lengths().to_vec()),
            pins: fw
                .pins()
                .iter()
                .map(|p| PinJson {
                    vertex: p.vertex,
                    axis: p.axis,
                    value: p.value,
                })
                .collect(),
        }
    }

    pub fn to_framework(&self) -> Result<Framework64> {
        if self.dim == 0 {
            bail!("field `dim`: must be at least 1");
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.len() != self.dim {
                bail!(
                    "field `vertices[{i}]`: {} coordinates, expected dim = {}",
                    v.len(),
                    self.dim
                );
            }
        }
        let topo = Topology::new(
            self.vertices.len(),
            self.edges.iter().map(|&[a, b]| Edge::new(a, b)).collect(),
            self.free_edge,
        )?;
        let config = Configuration::from_vertices(self.dim, &self.vertices)?;
        let pins = self
            .pins
            .iter()
            .map(|p| Pin::new(p.vertex, p.axis, p.value))
            .collect();
        Ok(Framework64::new(
            topo,
            config,
            self.rest_lengths.clone(),
            pins,
        )?)
    }
}

/// Parses framework JSON text, or a result document wrapping one.
pub fn parse_framework(text: &str) -> Result<Framework64> {
    let value: serde_json::Value = serde_json::from_str(text).context("malformed JSON")?;
    let doc: FrameworkJson = match value.get("framework") {
        Some(inner) => FrameworkJson::deserialize(inner).context("field `framework`")?,
        // parse the raw text again so that diagnostics carry line numbers
        None => serde_json::from_str(text).context("framework schema")?,
    };
    doc.to_framework()
}

pub fn load_framework(path: &Path) -> Result<Framework64> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_framework(&text).with_context(|| format!("in {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use framesaddle::fixtures;

    #[test]
    fn round_trip_is_exact() {
        for name in fixtures::NAMES {
            let fw: Framework64 = fixtures::by_name(name).unwrap().unwrap();
            let text = serde_json::to_string(&FrameworkJson::from_framework(&fw)).unwrap();
            let back = parse_framework(&text).unwrap();
            assert_eq!(back, fw, "{name}");
            let again = serde_json::to_string(&FrameworkJson::from_framework(&back)).unwrap();
            assert_eq!(again, text);
        }
    }

    #[test]
    fn rest_lengths_default_to_measured() {
        let text = r#"{"dim": 2, "vertices": [[0,0],[3,0],[0,4]], "edges": [[0,1],[1,2],[2,0]],
            "free_edge": 1, "pins": [{"vertex":0,"axis":0,"value":0},{"vertex":0,"axis":1,"value":0},
            {"vertex":1,"axis":1,"value":0}]}"#;
        let fw = parse_framework(text).unwrap();
        assert_eq!(fw.rest_lengths(), &[3.0, 5.0, 4.0]);
    }

    #[test]
    fn wrapped_frameworks_are_accepted() {
        let fw: Framework64 = fixtures::four_bar_default().unwrap();
        let doc = serde_json::json!({ "converged": true, "framework": FrameworkJson::from_framework(&fw) });
        assert_eq!(parse_framework(&doc.to_string()).unwrap(), fw);
    }

    #[test]
    fn schema_errors_name_the_problem() {
        let err = parse_framework("{\"dim\": 2,\n \"vertices\": []}").unwrap_err();
        let msg = format!("{err:#}");
        assert!(
            msg.contains("missing field") && msg.contains("line"),
            "{msg}"
        );

        let err = parse_framework(
            r#"{"dim": 2, "vertices": [[0,0],[1]], "edges": [[0,1]], "free_edge": 0}"#,
        )
        .unwrap_err();
        assert!(format!("{err:#}").contains("vertices[1]"));

        assert!(parse_framework("{not json").is_err());
        let unknown = r#"{"dim": 2, "vertices": [[0,0],[1,0]], "edges": [[0,1]], "free_edge": 0, "colour": 1}"#;
        assert!(format!("{:#}", parse_framework(unknown).unwrap_err()).contains("colour"));
    }
}
