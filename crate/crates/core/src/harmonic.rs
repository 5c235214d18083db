//! Hitting splits and Green matrices from edge-affine harmonic problems.
//!
//! A function that is harmonic on every open edge is affine there, so every
//! problem in this module reduces to unknown vertex values. At a vertex `v`
//! the one-sided derivative along half-edge `e` is
//! `(F(t(e)) - F(v)) / l_e`, and the weighted flux
//! `rho_v(F) = sum_e p_v(e) (D_e F)(v)` is the coefficient of the local time
//! at `v` in the Ito-Tanaka decomposition of `F(X_t)`.

use crate::algebra::{DenseMatrix, Lu};
use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, MetricGraph, PointOnGraph};
use crate::scalar::Real;

/// Vertex values of an edge-affine function.
#[derive(Clone, Debug, PartialEq)]
pub struct NodePotential<T> {
    pub values: Vec<T>,
}

impl<T: Real> NodePotential<T> {
    pub fn new(values: Vec<T>) -> Self {
        NodePotential { values }
    }

    /// Value at a point, interpolating linearly inside edges.
    pub fn at(&self, g: &MetricGraph<T>, x: PointOnGraph<T>) -> T {
        match x {
            PointOnGraph::Vertex(v) => self.values[v],
            PointOnGraph::Edge { edge, offset } => {
                let e = g.edge(edge);
                let t = offset / e.length;
                self.values[e.from] * (T::one() - t) + self.values[e.to] * t
            }
        }
    }
}

/// `rho_v(F)`: weighted sum of outward slopes of `F` at `v`.
pub fn vertex_flux<T: Real>(
    f: &NodePotential<T>,
    g: &MetricGraph<T>,
    w: &EdgeWeights<T>,
    v: usize,
) -> T {
    g.half_edges_from(v)
        .iter()
        .map(|&h| w.get(h) * (f.values[h.target(g)] - f.values[v]) / g.edge(h.edge).length)
        .sum()
}

/// Linear system for edge-affine functions with prescribed values on a
/// boundary set and prescribed flux everywhere else. Factored once; each
/// right-hand side is a vector over vertices holding the boundary value or
/// the target flux.
struct AffineProblem<T> {
    lu: Lu<T>,
}

impl<T: Real> AffineProblem<T> {
    fn new(g: &MetricGraph<T>, w: &EdgeWeights<T>, fixed: &[bool]) -> Result<Self> {
        let n = g.num_vertices();
        let mut a = DenseMatrix::zeros(n);
        for v in 0..n {
            if fixed[v] {
                a[(v, v)] = T::one();
                continue;
            }
            for &h in g.half_edges_from(v) {
                let c = w.get(h) / g.edge(h.edge).length;
                a[(v, h.target(g))] += c;
                a[(v, v)] -= c;
            }
        }
        Ok(AffineProblem {
            lu: Lu::factor(&a)?,
        })
    }

    fn solve(&self, rhs: &[T]) -> NodePotential<T> {
        NodePotential::new(self.lu.solve(rhs))
    }
}

/// Where a walk from `x` first meets the active set, if at all.
#[derive(Clone, Debug, PartialEq)]
pub struct HittingSplit<T> {
    /// Probability of reaching an active vertex before an exit.
    pub alpha_inf: T,
    /// Conditional first-hit distribution over active vertices, in
    /// [`MetricGraph::active`] order. All zeros when `alpha_inf == 0`.
    pub p: Vec<T>,
}

pub fn hitting_split<T: Real>(
    g: &MetricGraph<T>,
    w: &EdgeWeights<T>,
    x: PointOnGraph<T>,
) -> Result<HittingSplit<T>> {
    g.ensure_valid()?;
    g.check_point(x)?;
    let active = g.active();
    if active.is_empty() {
        return Ok(HittingSplit {
            alpha_inf: T::zero(),
            p: Vec::new(),
        });
    }
    let fixed: Vec<bool> = g
        .vertices()
        .iter()
        .map(|v| v.role != crate::graph::Role::Inert)
        .collect();
    let problem = AffineProblem::new(g, w, &fixed)?;
    let mut hits = Vec::with_capacity(active.len());
    for &c in &active {
        let mut rhs = vec![T::zero(); g.num_vertices()];
        rhs[c] = T::one();
        hits.push(problem.solve(&rhs).at(g, x).max(T::zero()));
    }
    let total: T = hits.iter().copied().sum();
    let alpha_inf = total.min(T::one());
    let p = if total > T::zero() {
        hits.iter().map(|&u| u / total).collect()
    } else {
        vec![T::zero(); hits.len()]
    };
    Ok(HittingSplit { alpha_inf, p })
}

/// `G_ij` = expected local time at `c_j` accumulated before exit by a walk
/// started at `c_i`.
///
/// With uniform weights `G_ij / deg(c_j)` is symmetric; `G` itself is
/// symmetric only when the active vertices share one degree.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenMatrix<T> {
    /// Vertex index of each row/column.
    pub active: Vec<usize>,
    pub matrix: DenseMatrix<T>,
}

impl<T: Real> GreenMatrix<T> {
    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.matrix[(i, j)]
    }

    pub fn max_asymmetry(&self) -> T {
        let m = &self.matrix;
        let mut worst = T::zero();
        for i in 0..self.dim() {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Green matrix over the active vertices.
///
/// Column `j` comes from the affine `F` vanishing on exits with zero flux
/// everywhere except `rho_{c_j}(F) = -1`; optional stopping then gives
/// `G_ij = F(c_i)`.
pub fn green_matrix<T: Real>(g: &MetricGraph<T>, w: &EdgeWeights<T>) -> Result<GreenMatrix<T>> {
    g.ensure_valid()?;
    let active = g.active();
    if active.is_empty() {
        return Err(Error::precondition(
            "green matrix needs at least one active vertex",
        ));
    }
    let fixed: Vec<bool> = g
        .vertices()
        .iter()
        .map(|v| v.role == crate::graph::Role::Exit)
        .collect();
    let problem = AffineProblem::new(g, w, &fixed)?;
    let c = active.len();
    let mut matrix = DenseMatrix::zeros(c);
    for (j, &cj) in active.iter().enumerate() {
        let mut rhs = vec![T::zero(); g.num_vertices()];
        rhs[cj] = -T::one();
        let f = problem.solve(&rhs);
        for (i, &ci) in active.iter().enumerate() {
            matrix[(i, j)] = f.values[ci];
        }
    }
    Ok(GreenMatrix { active, matrix })
}

/// Mean local time at the single active vertex `c`, starting from `c`.
pub fn mean_local_time<T: Real>(g: &MetricGraph<T>, w: &EdgeWeights<T>, c: usize) -> Result<T> {
    let active = g.active();
    if active != [c] {
        return Err(Error::precondition(format!(
            "mean local time needs vertex #{c} to be the only active vertex (found {})",
            active.len()
        )));
    }
    Ok(green_matrix(g, w)?.get(0, 0))
}
