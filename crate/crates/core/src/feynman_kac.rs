//! Survival probabilities as a discrete boundary problem on the vertices.
//!
//! With killing only at vertices the survival function is affine on every
//! edge, so it is fixed by its vertex values. These satisfy
//! `sum_e p_v(e) (F(t(e)) - F(v)) / l_e = kappa_v F(v)` at every non-exit
//! vertex and `F = 1` at exits. Inert vertices have `kappa_v = 0`; a leaf
//! then simply copies its neighbour's value.

use crate::algebra::{solve_linear, DenseMatrix};
use crate::error::Result;
use crate::graph::{EdgeWeights, MetricGraph, PointOnGraph, Role};
use crate::kac::KappaSpec;
use crate::scalar::Real;

/// Vertex values of the survival function; affine along edges.
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalField<T> {
    pub values: Vec<T>,
}

impl<T: Real> SurvivalField<T> {
    pub fn at_vertex(&self, v: usize) -> T {
        self.values[v]
    }
}

pub fn solve_survival<T: Real>(
    g: &MetricGraph<T>,
    w: &EdgeWeights<T>,
    ks: &KappaSpec<T>,
) -> Result<SurvivalField<T>> {
    g.ensure_valid()?;
    let active = g.active();
    let rates = ks.rates(active.len())?;
    let mut kappa = vec![T::zero(); g.num_vertices()];
    for (&c, &k) in active.iter().zip(&rates) {
        kappa[c] = k;
    }

    // unknowns are 1 - F, which vanish identically when nothing reacts
    let n = g.num_vertices();
    let mut a = DenseMatrix::zeros(n);
    let mut b = vec![T::zero(); n];
    for v in 0..n {
        if g.role(v) == Role::Exit {
            a[(v, v)] = T::one();
        } else if kappa[v].is_infinite() {
            a[(v, v)] = T::one();
            b[v] = T::one();
        } else {
            let mut diag = kappa[v];
            for &h in g.half_edges_from(v) {
                let c = w.get(h) / g.edge(h.edge).length;
                a[(v, h.target(g))] += c;
                diag += c;
            }
            a[(v, v)] -= diag;
            b[v] = -kappa[v];
        }
    }
    let values = solve_linear(&a, &b)?
        .into_iter()
        .map(|x| T::one() - x.max(T::zero()).min(T::one()))
        .collect();
    Ok(SurvivalField { values })
}

/// Value of the field at `x`, by linear interpolation along its edge.
pub fn evaluate_at<T: Real>(f: &SurvivalField<T>, g: &MetricGraph<T>, x: PointOnGraph<T>) -> T {
    match x {
        PointOnGraph::Vertex(v) => f.values[v],
        PointOnGraph::Edge { edge, offset } => {
            let e = g.edge(edge);
            let t = offset / e.length;
            f.values[e.from] + (f.values[e.to] - f.values[e.from]) * t
        }
    }
}
