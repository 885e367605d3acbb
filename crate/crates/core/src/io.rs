//! JSON graph documents.
//!
//! ```json
//! {"core": {"L": [[2, -1], [-1, 3]]},
//!  "channels": [{"attach": 0, "K0": 2, "a": [2.5], "b": [0.5, 0.7]}],
//!  "B": [0],
//!  "u0": [1.0, [0.0, 0.5]]}
//! ```
//!
//! `a` lists `a(1), …` and `b` lists `b(0), …`; entries omitted before `K0`
//! take the stabilized values `a = 2`, `b = 1`. `K0` defaults to the longer
//! of the two lists. `B` and `u0` are optional inputs for the `dimension` and
//! `evolve` commands. Complex entries are written as `[re, im]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{symmetrize, ChannelSpec, FiniteGraph, VertexSet, WebGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreDoc {
    #[serde(rename = "L")]
    pub l: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDoc {
    pub attach: usize,
    #[serde(rename = "K0", default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<usize>,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexEntry> for Complex64 {
    fn from(e: ComplexEntry) -> Self {
        match e {
            ComplexEntry::Real(x) => Complex64::from(x),
            ComplexEntry::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for ComplexEntry {
    fn from(z: Complex64) -> Self {
        ComplexEntry::Pair([z.re, z.im])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub core: CoreDoc,
    #[serde(default)]
    pub channels: Vec<ChannelDoc>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<Vec<ComplexEntry>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    /// Replace `L` by `(L + Lᵀ)/2` instead of rejecting asymmetric input.
    pub symmetrize: bool,
}

/// Parsed document with validated graph objects.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedGraph {
    pub document: GraphDocument,
    pub web: WebGraph,
}

impl ParsedGraph {
    pub fn core(&self) -> &FiniteGraph {
        self.web.core()
    }

    pub fn seed(&self) -> Option<VertexSet> {
        self.document.seed.as_ref().map(|s| s.iter().copied().collect())
    }

    pub fn u0(&self) -> Option<DVector<Complex64>> {
        self.document
            .u0
            .as_ref()
            .map(|v| DVector::from_iterator(v.len(), v.iter().map(|&e| e.into())))
    }
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

pub fn parse_document(text: &str) -> Result<GraphDocument> {
    serde_json::from_str(text).map_err(|e| {
        let location = format!("line {} column {}", e.line(), e.column());
        let message = e.to_string();
        let message = message.strip_suffix(&format!(" at {location}")).unwrap_or(&message).to_string();
        parse_error(location, message)
    })
}

impl ChannelDoc {
    /// Channel with omitted tails filled by the stabilized values.
    pub fn to_spec(&self, index: usize) -> Result<ChannelSpec> {
        let k0 = self.k0.unwrap_or(self.a.len().max(self.b.len()));
        if self.a.len() > k0 || self.b.len() > k0 {
            return Err(parse_error(
                format!("channels[{index}]"),
                format!("K0 = {k0} but a has {} and b has {} entries", self.a.len(), self.b.len()),
            ));
        }
        let mut a = self.a.clone();
        a.resize(k0, 2.0);
        let mut b = self.b.clone();
        b.resize(k0, 1.0);
        let spec = ChannelSpec {
            attach: self.attach,
            k0,
            b,
            a,
        };
        spec.validate(index)?;
        Ok(spec)
    }
}

impl GraphDocument {
    pub fn to_web(&self, options: ParseOptions) -> Result<WebGraph> {
        let n = self.core.l.len();
        if let Some((i, row)) = self.core.l.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(parse_error(
                format!("core.L[{i}]"),
                format!("row has {} entries, expected {n}", row.len()),
            ));
        }
        let mut m = DMatrix::from_fn(n, n, |i, j| self.core.l[i][j]);
        if options.symmetrize {
            m = symmetrize(&m);
        }
        let core = FiniteGraph::new(m)?;
        let channels = self
            .channels
            .iter()
            .enumerate()
            .map(|(i, c)| c.to_spec(i))
            .collect::<Result<Vec<_>>>()?;
        WebGraph::new(core, channels)
    }

    pub fn from_web(web: &WebGraph) -> Self {
        let m = web.core().matrix();
        Self {
            core: CoreDoc {
                l: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
            },
            channels: web
                .channels()
                .iter()
                .map(|c| ChannelDoc {
                    attach: c.attach,
                    k0: Some(c.k0),
                    a: c.a.clone(),
                    b: c.b.clone(),
                })
                .collect(),
            seed: None,
            u0: None,
        }
    }
}

pub fn parse_graph(text: &str, options: ParseOptions) -> Result<ParsedGraph> {
    let document = parse_document(text)?;
    let web = document.to_web(options)?;
    if let Some(seed) = &document.seed {
        web.core().check_vertices(seed)?;
    }
    Ok(ParsedGraph { document, web })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_core_names_key() {
        let err = parse_graph(r#"{"channels": []}"#, ParseOptions::default()).unwrap_err();
        match err {
            Error::Parse { message, location } => {
                assert!(message.contains("core"), "{message}");
                assert!(location.starts_with("line 1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = parse_document("{\n\"core\": {\"L\": [[1,]]}\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location.starts_with("line 2")));
    }

    #[test]
    fn tails_are_padded() {
        let p = parse_graph(
            r#"{"core": {"L": [[2]]}, "channels": [{"attach": 0, "K0": 3, "a": [2.5], "b": [0.5]}]}"#,
            ParseOptions::default(),
        )
        .unwrap();
        let ch = &p.web.channels()[0];
        assert_eq!(ch.k0, 3);
        assert_eq!(ch.a, vec![2.5, 2.0, 2.0]);
        assert_eq!(ch.b, vec![0.5, 1.0, 1.0]);
    }

    #[test]
    fn asymmetric_needs_flag() {
        let text = r#"{"core": {"L": [[0, 1], [2, 0]]}}"#;
        assert!(matches!(
            parse_graph(text, ParseOptions::default()),
            Err(Error::NonSymmetric { .. })
        ));
        let p = parse_graph(text, ParseOptions { symmetrize: true }).unwrap();
        assert_eq!(p.core().weight(0, 1), 1.5);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = parse_graph(r#"{"core": {"L": [[1, 0], [0]]}}"#, ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location == "core.L[1]"));
    }

    #[test]
    fn seed_and_state() {
        let p = parse_graph(
            r#"{"core": {"L": [[1, 0], [0, 2]]}, "B": [1], "u0": [1.0, [0.0, 2.0]]}"#,
            ParseOptions::default(),
        )
        .unwrap();
        assert_eq!(p.seed().unwrap().into_iter().collect::<Vec<_>>(), vec![1]);
        assert_eq!(p.u0().unwrap()[1], Complex64::new(0.0, 2.0));
        assert!(parse_graph(r#"{"core": {"L": [[1]]}, "B": [3]}"#, ParseOptions::default()).is_err());
    }

    #[test]
    fn round_trip() {
        let web = crate::fixtures::small_web();
        let text = serde_json::to_string(&GraphDocument::from_web(&web)).unwrap();
        assert_eq!(parse_graph(&text, ParseOptions::default()).unwrap().web, web);
    }
}
