//! JSON graph documents.
//!
//! ```json
//! {
//!   "vertices": [{"id": "v0", "role": "inert"}, {"id": "c", "role": "active"},
//!                {"id": "a", "role": "exit"}],
//!   "edges": [{"from": "v0", "to": "c", "length": 1.0},
//!             {"from": "c", "to": "a", "length": 1.0, "radius": 2.0}],
//!   "weights": [{"vertex": "c", "edge": ["v0", "c"], "p": 0.5},
//!               {"vertex": "c", "edge": 1, "p": 0.5}],
//!   "dimension": 3,
//!   "injection": {"vertex": "v0"}
//! }
//! ```
//!
//! Edges are referenced either by index into `edges` or by their endpoint
//! pair; a pair is an error when parallel edges make it ambiguous. An edge
//! injection `{"edge": ["a", "b"], "offset": y}` measures `y` from `a`.
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, HalfEdge, MetricGraph, PointOnGraph, Role};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<WeightDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injection: Option<InjectionDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: String,
    pub role: Role,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeRef {
    Index(usize),
    Ends([String; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightDoc {
    pub vertex: String,
    pub edge: EdgeRef,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InjectionDoc {
    Vertex(VertexInjection),
    Edge(EdgeInjection),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexInjection {
    pub vertex: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeInjection {
    pub edge: EdgeRef,
    pub offset: f64,
}

/// A graph with its weights and optional injection point.
#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    pub graph: MetricGraph<T>,
    pub weights: EdgeWeights<T>,
    /// Weights given explicitly in the document.
    pub explicit_weights: Vec<(HalfEdge, T)>,
    pub injection: Option<PointOnGraph<T>>,
}

impl<T: Real> Network<T> {
    /// The injection point, or an input error if the document has none.
    pub fn start(&self) -> Result<PointOnGraph<T>> {
        self.injection
            .ok_or_else(|| Error::Document("document has no injection point".into()))
    }
}

impl GraphDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialise")
    }

    /// Builds the graph. Cross-references are resolved here; graph
    /// invariants are left to [`MetricGraph::validate`].
    pub fn to_network<T: Real>(&self) -> Result<Network<T>> {
        let mut g = MetricGraph::new();
        if let Some(d) = self.dimension {
            if d == 0 {
                return Err(Error::Document("dimension must be positive".into()));
            }
            g = g.with_dimension(d);
        }
        for v in &self.vertices {
            g.add_vertex(v.id.clone(), v.role);
        }
        let lookup = |g: &MetricGraph<T>, id: &str, what: &str| {
            g.find(id)
                .ok_or_else(|| Error::Document(format!("{what} refers to unknown vertex '{id}'")))
        };
        for (i, e) in self.edges.iter().enumerate() {
            let what = format!("edge #{i}");
            let from = lookup(&g, &e.from, &what)?;
            let to = lookup(&g, &e.to, &what)?;
            g.add_edge_with_radius(from, to, T::lit(e.length), T::lit(e.radius.unwrap_or(1.0)));
        }

        let mut explicit = Vec::with_capacity(self.weights.len());
        for w in &self.weights {
            let v = lookup(&g, &w.vertex, "weight")?;
            let edge = self.resolve_edge(&g, &w.edge)?;
            let e = g.edge(edge);
            let forward = if e.from == v {
                true
            } else if e.to == v {
                false
            } else {
                return Err(Error::Document(format!(
                    "weight at '{}' names edge #{edge}, which does not touch it",
                    w.vertex
                )));
            };
            explicit.push((HalfEdge { edge, forward }, T::lit(w.p)));
        }
        let weights = if explicit.is_empty() {
            EdgeWeights::derive(&g)
        } else {
            EdgeWeights::with_overrides(&g, &explicit)
                .map_err(|e| Error::Document(e.to_string()))?
        };

        let injection = match &self.injection {
            None => None,
            Some(InjectionDoc::Vertex(v)) => {
                Some(PointOnGraph::Vertex(lookup(&g, &v.vertex, "injection")?))
            }
            Some(InjectionDoc::Edge(x)) => {
                let edge = self.resolve_edge(&g, &x.edge)?;
                let e = g.edge(edge);
                let mut offset = T::lit(x.offset);
                if let EdgeRef::Ends([a, _]) = &x.edge {
                    if g.vertex(e.from).id != *a {
                        offset = e.length - offset;
                    }
                }
                let p = PointOnGraph::Edge { edge, offset };
                g.check_point(p)
                    .map_err(|e| Error::Document(e.to_string()))?;
                Some(p)
            }
        };
        Ok(Network {
            graph: g,
            weights,
            explicit_weights: explicit,
            injection,
        })
    }

    fn resolve_edge<T: Real>(&self, g: &MetricGraph<T>, r: &EdgeRef) -> Result<usize> {
        match r {
            EdgeRef::Index(i) if *i < g.num_edges() => Ok(*i),
            EdgeRef::Index(i) => Err(Error::Document(format!("no edge #{i}"))),
            EdgeRef::Ends([a, b]) => {
                let matches: Vec<usize> = (0..g.num_edges())
                    .filter(|&i| {
                        let e = g.edge(i);
                        let (x, y) = (&g.vertex(e.from).id, &g.vertex(e.to).id);
                        (x == a && y == b) || (x == b && y == a)
                    })
                    .collect();
                match matches.as_slice() {
                    [i] => Ok(*i),
                    [] => Err(Error::Document(format!("no edge between '{a}' and '{b}'"))),
                    _ => Err(Error::Document(format!(
                        "edges between '{a}' and '{b}' are parallel; refer to one by index"
                    ))),
                }
            }
        }
    }

    /// Re-emits a network. Weights are written only where they were explicit.
    pub fn from_network<T: Real>(net: &Network<T>) -> Self {
        let g = &net.graph;
        let id = |v: usize| g.vertex(v).id.clone();
        GraphDocument {
            vertices: g
                .vertices()
                .iter()
                .map(|v| VertexDoc {
                    id: v.id.clone(),
                    role: v.role,
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeDoc {
                    from: id(e.from),
                    to: id(e.to),
                    length: e.length.as_f64(),
                    radius: (e.radius != T::one()).then(|| e.radius.as_f64()),
                })
                .collect(),
            weights: net
                .explicit_weights
                .iter()
                .map(|&(h, p)| WeightDoc {
                    vertex: id(h.source(g)),
                    edge: EdgeRef::Index(h.edge),
                    p: p.as_f64(),
                })
                .collect(),
            dimension: (g.dimension() != MetricGraph::<T>::DEFAULT_DIMENSION)
                .then(|| g.dimension()),
            injection: net.injection.map(|x| match x {
                PointOnGraph::Vertex(v) => InjectionDoc::Vertex(VertexInjection { vertex: id(v) }),
                PointOnGraph::Edge { edge, offset } => InjectionDoc::Edge(EdgeInjection {
                    edge: EdgeRef::Index(edge),
                    offset: offset.as_f64(),
                }),
            }),
        }
    }
}

/// Reads and parses a document from disk.
pub fn load<T: Real>(path: &std::path::Path) -> Result<Network<T>> {
    let text = std::fs::read_to_string(path)?;
    GraphDocument::from_json(&text)?.to_network()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE_SITE: &str = r#"{
        "vertices": [{"id": "v0", "role": "inert"}, {"id": "c", "role": "active"}, {"id": "a", "role": "exit"}],
        "edges": [{"from": "v0", "to": "c", "length": 1.0}, {"from": "c", "to": "a", "length": 1.0}],
        "injection": {"vertex": "v0"}
    }"#;

    #[test]
    fn parses_vertex_injection() {
        let net: Network<f64> = GraphDocument::from_json(SINGLE_SITE)
            .unwrap()
            .to_network()
            .unwrap();
        assert_eq!(net.graph.num_vertices(), 3);
        assert_eq!(net.start().unwrap(), PointOnGraph::Vertex(0));
        assert!(net.graph.validate().is_empty());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = SINGLE_SITE.replace("\"injection\"", "\"kappa\": 1, \"injection\"");
        assert!(matches!(
            GraphDocument::from_json(&text),
            Err(Error::Document(_))
        ));
        let text = SINGLE_SITE.replace("\"length\": 1.0}", "\"length\": 1.0, \"colour\": 2}");
        assert!(GraphDocument::from_json(&text).is_err());
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = GraphDocument::from_json("{\n  \"vertices\": [,]\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn edge_injection_offset_follows_named_orientation() {
        let text = SINGLE_SITE.replace(
            r#"{"vertex": "v0"}"#,
            r#"{"edge": ["a", "c"], "offset": 0.25}"#,
        );
        let net: Network<f64> = GraphDocument::from_json(&text)
            .unwrap()
            .to_network()
            .unwrap();
        assert_eq!(
            net.injection,
            Some(PointOnGraph::Edge {
                edge: 1,
                offset: 0.75
            })
        );
    }

    #[test]
    fn unknown_vertex_is_reported() {
        let text = SINGLE_SITE.replace(r#""to": "a""#, r#""to": "zz""#);
        let err = GraphDocument::from_json(&text)
            .unwrap()
            .to_network::<f64>()
            .unwrap_err();
        assert!(err.to_string().contains("'zz'"));
    }

    #[test]
    fn explicit_weights_round_trip() {
        let text = SINGLE_SITE.replace(
            "\"injection\"",
            r#""weights": [{"vertex": "c", "edge": ["c", "v0"], "p": 0.25}, {"vertex": "c", "edge": 1, "p": 0.75}], "dimension": 2, "injection""#,
        );
        let net: Network<f64> = GraphDocument::from_json(&text)
            .unwrap()
            .to_network()
            .unwrap();
        let h = net.graph.half_edges_from(1)[0];
        assert_eq!(net.weights.get(h), 0.25);
        let again: Network<f64> =
            GraphDocument::from_json(&GraphDocument::from_network(&net).to_json())
                .unwrap()
                .to_network()
                .unwrap();
        assert_eq!(again, net);
    }

    #[test]
    fn parallel_edges_need_an_index() {
        let text = SINGLE_SITE
            .replace(
                r#"{"from": "c", "to": "a", "length": 1.0}"#,
                r#"{"from": "c", "to": "v0", "length": 2.0}, {"from": "c", "to": "a", "length": 1.0}"#,
            )
            .replace(r#"{"vertex": "v0"}"#, r#"{"edge": ["v0", "c"], "offset": 0.5}"#);
        let err = GraphDocument::from_json(&text)
            .unwrap()
            .to_network::<f64>()
            .unwrap_err();
        assert!(err.to_string().contains("parallel"));
    }
}
