//! Metric graphs: vertices with roles, undirected edges with lengths and
//! relative radii, half-edges, exit-direction weights and edge surgery.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance on the row sums of [`EdgeWeights`].
pub const WEIGHT_ROW_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Inert,
    /// Reactive site.
    Active,
    /// Absorbing outlet; must have degree 1.
    Exit,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Inert => "inert",
            Role::Active => "active",
            Role::Exit => "exit",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub role: Role,
}

/// Undirected edge between two vertex indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge<T> {
    pub from: usize,
    pub to: usize,
    pub length: T,
    /// Relative tube radius; only enters through the derived weights.
    pub radius: T,
}

impl<T: Real> Edge<T> {
    /// The endpoint opposite to `v`. Assumes `v` is an endpoint.
    pub fn other(&self, v: usize) -> usize {
        if self.from == v {
            self.to
        } else {
            self.from
        }
    }
}

/// An oriented copy of an edge. `forward` means `from -> to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HalfEdge {
    pub edge: usize,
    pub forward: bool,
}

impl HalfEdge {
    pub fn inverse(self) -> Self {
        HalfEdge {
            edge: self.edge,
            forward: !self.forward,
        }
    }

    pub fn source<T: Real>(self, g: &MetricGraph<T>) -> usize {
        let e = &g.edges[self.edge];
        if self.forward {
            e.from
        } else {
            e.to
        }
    }

    pub fn target<T: Real>(self, g: &MetricGraph<T>) -> usize {
        self.inverse().source(g)
    }
}

/// A point of the graph: a vertex, or an interior point of an edge at
/// `offset` from the edge's `from` endpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PointOnGraph<T> {
    Vertex(usize),
    Edge { edge: usize, offset: T },
}

/// A broken graph invariant, naming the offending entity.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    DuplicateId(String),
    DanglingEndpoint { edge: usize, endpoint: usize },
    NonPositiveLength { edge: usize, length: f64 },
    NonPositiveRadius { edge: usize, radius: f64 },
    SelfLoop { edge: usize, vertex: String },
    ExitDegree { vertex: String, degree: usize },
    NoExit,
    NoPathToExit { vertex: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "vertex id '{id}' is used more than once"),
            Violation::DanglingEndpoint { edge, endpoint } => {
                write!(f, "edge #{edge} refers to missing vertex #{endpoint}")
            }
            Violation::NonPositiveLength { edge, length } => {
                write!(f, "edge #{edge} has non-positive length {length}")
            }
            Violation::NonPositiveRadius { edge, radius } => {
                write!(f, "edge #{edge} has non-positive radius {radius}")
            }
            Violation::SelfLoop { edge, vertex } => {
                write!(f, "edge #{edge} is a self-loop at '{vertex}'")
            }
            Violation::ExitDegree { vertex, degree } => {
                write!(f, "exit vertex '{vertex}' has degree {degree}, expected 1")
            }
            Violation::NoExit => f.write_str("graph has no exit vertex"),
            Violation::NoPathToExit { vertex } => {
                write!(f, "vertex '{vertex}' has no path to an exit vertex")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph<T> {
    vertices: Vec<Vertex>,
    edges: Vec<Edge<T>>,
    dimension: u32,
    incidence: Vec<Vec<HalfEdge>>,
}

impl<T: Real> Default for MetricGraph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> MetricGraph<T> {
    pub const DEFAULT_DIMENSION: u32 = 3;

    pub fn new() -> Self {
        MetricGraph {
            vertices: Vec::new(),
            edges: Vec::new(),
            dimension: Self::DEFAULT_DIMENSION,
            incidence: Vec::new(),
        }
    }

    /// Ambient dimension `d`; radii enter the weights as `r^(d-1)`.
    pub fn with_dimension(mut self, d: u32) -> Self {
        self.dimension = d;
        self
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn add_vertex(&mut self, id: impl Into<String>, role: Role) -> usize {
        self.vertices.push(Vertex {
            id: id.into(),
            role,
        });
        self.incidence.push(Vec::new());
        self.vertices.len() - 1
    }

    /// Adds an edge of unit radius.
    pub fn add_edge(&mut self, from: usize, to: usize, length: T) -> usize {
        self.add_edge_with_radius(from, to, length, T::one())
    }

    pub fn add_edge_with_radius(&mut self, from: usize, to: usize, length: T, radius: T) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge {
            from,
            to,
            length,
            radius,
        });
        if from < self.vertices.len() {
            self.incidence[from].push(HalfEdge {
                edge: id,
                forward: true,
            });
        }
        if to < self.vertices.len() && to != from {
            self.incidence[to].push(HalfEdge {
                edge: id,
                forward: false,
            });
        }
        id
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn edge(&self, e: usize) -> &Edge<T> {
        &self.edges[e]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn role(&self, v: usize) -> Role {
        self.vertices[v].role
    }

    pub fn find(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    /// Half-edges with source `v`.
    pub fn half_edges_from(&self, v: usize) -> &[HalfEdge] {
        &self.incidence[v]
    }

    /// Active vertices in index order. This is the ordering used for every
    /// Green matrix and per-site rate vector.
    pub fn active(&self) -> Vec<usize> {
        self.with_role(Role::Active)
    }

    pub fn exits(&self) -> Vec<usize> {
        self.with_role(Role::Exit)
    }

    fn with_role(&self, role: Role) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertices[v].role == role)
            .collect()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for v in &self.vertices {
            if !seen.insert(v.id.as_str()) {
                out.push(Violation::DuplicateId(v.id.clone()));
            }
        }
        let n = self.vertices.len();
        let mut edges_ok = true;
        for (i, e) in self.edges.iter().enumerate() {
            for endpoint in [e.from, e.to] {
                if endpoint >= n {
                    out.push(Violation::DanglingEndpoint { edge: i, endpoint });
                    edges_ok = false;
                }
            }
            if !(e.length > T::zero()) || !e.length.is_finite() {
                out.push(Violation::NonPositiveLength {
                    edge: i,
                    length: e.length.as_f64(),
                });
            }
            if !(e.radius > T::zero()) || !e.radius.is_finite() {
                out.push(Violation::NonPositiveRadius {
                    edge: i,
                    radius: e.radius.as_f64(),
                });
            }
            if e.from == e.to && e.from < n {
                out.push(Violation::SelfLoop {
                    edge: i,
                    vertex: self.vertices[e.from].id.clone(),
                });
            }
        }
        for (v, vert) in self.vertices.iter().enumerate() {
            if vert.role == Role::Exit && self.degree(v) != 1 {
                out.push(Violation::ExitDegree {
                    vertex: vert.id.clone(),
                    degree: self.degree(v),
                });
            }
        }
        let exits = self.exits();
        if exits.is_empty() {
            out.push(Violation::NoExit);
        } else if edges_ok {
            let mut reached = vec![false; n];
            let mut queue: VecDeque<usize> = exits.into_iter().collect();
            for &v in &queue {
                reached[v] = true;
            }
            while let Some(v) = queue.pop_front() {
                for h in &self.incidence[v] {
                    let w = h.target(self);
                    if !reached[w] {
                        reached[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            for (v, ok) in reached.into_iter().enumerate() {
                if !ok {
                    out.push(Violation::NoPathToExit {
                        vertex: self.vertices[v].id.clone(),
                    });
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGraph(v))
        }
    }

    pub fn check_point(&self, x: PointOnGraph<T>) -> Result<()> {
        match x {
            PointOnGraph::Vertex(v) if v < self.num_vertices() => Ok(()),
            PointOnGraph::Vertex(v) => Err(Error::precondition(format!("no vertex #{v}"))),
            PointOnGraph::Edge { edge, offset } => {
                let e = self
                    .edges
                    .get(edge)
                    .ok_or_else(|| Error::precondition(format!("no edge #{edge}")))?;
                if offset > T::zero() && offset < e.length {
                    Ok(())
                } else {
                    Err(Error::precondition(format!(
                        "offset {offset} is not strictly inside edge #{edge} of length {}",
                        e.length
                    )))
                }
            }
        }
    }

    fn fresh_id(&self, base: String) -> String {
        if self.find(&base).is_none() {
            return base;
        }
        (1..)
            .map(|k| format!("{base}#{k}"))
            .find(|id| self.find(id).is_none())
            .expect("unbounded search")
    }
}

/// Splits the edge containing `x` by a new degree-2 inert vertex at `x`.
///
/// Edge `e = (a, b)` keeps its index and becomes `(a, new)` of length `y`;
/// an appended edge `(new, b)` takes the remaining `l_e - y`. Both inherit the
/// radius. A vertex point returns an unchanged copy.
pub fn split_at<T: Real>(
    g: &MetricGraph<T>,
    x: PointOnGraph<T>,
) -> Result<(MetricGraph<T>, usize)> {
    g.check_point(x)?;
    match x {
        PointOnGraph::Vertex(v) => Ok((g.clone(), v)),
        PointOnGraph::Edge { edge, offset } => {
            let old = g.edges[edge].clone();
            let name = g.fresh_id(format!(
                "{}~{}@{}",
                g.vertices[old.from].id, g.vertices[old.to].id, offset
            ));
            let mut out = g.clone();
            let mid = out.add_vertex(name, Role::Inert);
            let tail = out.edges.len();
            out.edges[edge].to = mid;
            out.edges[edge].length = offset;
            out.edges.push(Edge {
                from: mid,
                to: old.to,
                length: old.length - offset,
                radius: old.radius,
            });
            for h in out.incidence[old.to].iter_mut() {
                if h.edge == edge {
                    *h = HalfEdge {
                        edge: tail,
                        forward: false,
                    };
                }
            }
            out.incidence[mid] = vec![
                HalfEdge {
                    edge,
                    forward: false,
                },
                HalfEdge {
                    edge: tail,
                    forward: true,
                },
            ];
            Ok((out, mid))
        }
    }
}

/// Exit-direction weights `p_v(e)`, one per half-edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeWeights<T> {
    // [weight at edge.from, weight at edge.to]
    at_end: Vec<[T; 2]>,
}

impl<T: Real> EdgeWeights<T> {
    /// Weight of `h` at its source vertex.
    pub fn get(&self, h: HalfEdge) -> T {
        self.at_end[h.edge][if h.forward { 0 } else { 1 }]
    }

    fn set(&mut self, h: HalfEdge, p: T) {
        self.at_end[h.edge][if h.forward { 0 } else { 1 }] = p;
    }

    pub fn row_sum(&self, g: &MetricGraph<T>, v: usize) -> T {
        g.half_edges_from(v).iter().map(|&h| self.get(h)).sum()
    }

    /// Radius-derived weights: `p_v(e) = r_e^(d-1) / sum over e' at v of r_e'^(d-1)`.
    pub fn derive(g: &MetricGraph<T>) -> Self {
        let exponent = g.dimension().saturating_sub(1) as i32;
        let mut w = EdgeWeights {
            at_end: vec![[T::zero(); 2]; g.num_edges()],
        };
        for v in 0..g.num_vertices() {
            let hs = g.half_edges_from(v);
            let total: T = hs
                .iter()
                .map(|h| g.edge(h.edge).radius.powi(exponent))
                .sum();
            for &h in hs {
                w.set(h, g.edge(h.edge).radius.powi(exponent) / total);
            }
        }
        w
    }

    /// `p_v(e) = 1/deg(v)` everywhere.
    pub fn uniform(g: &MetricGraph<T>) -> Self {
        let mut w = EdgeWeights {
            at_end: vec![[T::zero(); 2]; g.num_edges()],
        };
        for v in 0..g.num_vertices() {
            let hs = g.half_edges_from(v);
            let p = T::one() / T::from_usize(hs.len()).expect("degree");
            for &h in hs {
                w.set(h, p);
            }
        }
        w
    }

    /// Radius-derived weights with explicit per-half-edge values taking
    /// precedence. A vertex with any override must list all of its half-edges;
    /// its row must sum to one within `1e-9` and is renormalised.
    pub fn with_overrides(g: &MetricGraph<T>, overrides: &[(HalfEdge, T)]) -> Result<Self> {
        let mut w = Self::derive(g);
        let mut by_vertex: HashMap<usize, HashMap<HalfEdge, T>> = HashMap::new();
        for &(h, p) in overrides {
            if h.edge >= g.num_edges() {
                return Err(Error::precondition(format!(
                    "weight for missing edge #{}",
                    h.edge
                )));
            }
            if !(p > T::zero() && p <= T::one()) {
                return Err(Error::precondition(format!(
                    "weight {p} on edge #{} is outside (0, 1]",
                    h.edge
                )));
            }
            let v = h.source(g);
            if by_vertex.entry(v).or_default().insert(h, p).is_some() {
                return Err(Error::precondition(format!(
                    "duplicate weight for edge #{} at '{}'",
                    h.edge,
                    g.vertex(v).id
                )));
            }
        }
        let mut vs: Vec<_> = by_vertex.into_iter().collect();
        vs.sort_by_key(|(v, _)| *v);
        for (v, row) in vs {
            let hs = g.half_edges_from(v);
            if row.len() != hs.len() {
                return Err(Error::precondition(format!(
                    "explicit weights at '{}' cover {} of {} incident edges",
                    g.vertex(v).id,
                    row.len(),
                    hs.len()
                )));
            }
            let total: T = hs.iter().map(|h| row[h]).sum();
            if (total - T::one()).abs() > T::lit(1e-9) {
                return Err(Error::precondition(format!(
                    "explicit weights at '{}' sum to {total}, expected 1",
                    g.vertex(v).id
                )));
            }
            for &h in hs {
                w.set(h, row[&h] / total);
            }
        }
        Ok(w)
    }

    /// True when every weight equals `1/deg` of its source within `tol`.
    pub fn is_uniform(&self, g: &MetricGraph<T>, tol: T) -> bool {
        (0..g.num_vertices()).all(|v| {
            let hs = g.half_edges_from(v);
            let p = T::one() / T::from_usize(hs.len().max(1)).expect("degree");
            hs.iter().all(|&h| (self.get(h) - p).abs() <= tol)
        })
    }

    /// Every explicitly stored half-edge weight, for re-emission.
    pub fn entries<'a>(
        &'a self,
        g: &'a MetricGraph<T>,
    ) -> impl Iterator<Item = (HalfEdge, T)> + 'a {
        (0..g.num_vertices())
            .flat_map(move |v| g.half_edges_from(v).iter().map(move |&h| (h, self.get(h))))
    }
}

/// Weights for a free-standing graph: radius-derived.
pub fn derive_weights<T: Real>(g: &MetricGraph<T>) -> EdgeWeights<T> {
    EdgeWeights::derive(g)
}

/// [`split_at`] carrying the weights along. The new vertex gets equal
/// weights on its two (equal-radius) halves; all other weights are kept.
pub fn split_weighted<T: Real>(
    g: &MetricGraph<T>,
    w: &EdgeWeights<T>,
    x: PointOnGraph<T>,
) -> Result<(MetricGraph<T>, EdgeWeights<T>, usize)> {
    let (out, v) = split_at(g, x)?;
    let mut w2 = w.clone();
    if let PointOnGraph::Edge { edge, .. } = x {
        let half = T::lit(0.5);
        let far = w.at_end[edge][1];
        w2.at_end[edge][1] = half;
        w2.at_end.push([half, far]);
    }
    Ok((out, w2, v))
}
