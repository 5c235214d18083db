//! Finite-width reaction zones and their collapse onto point sites.
//!
//! Each active vertex carries a killing rate `k / h` on the star
//! `B(v, h delta)`: a segment of length `h delta` on every incident edge.
//! The survival function then solves `D u'' = r u` edge by edge, which is
//! affine where `r = 0` and a `cosh`/`sinh` combination in `mu y`,
//! `mu = sqrt(k / (h D))`, inside zones. Vertices carry the conservative
//! condition `sum_e p_v(e) (D_e u)(v) = 0`; exits hold `u = 1`.
//!
//! As `h -> 0` the solution converges to the point-site model with
//! `kappa = k delta / D`.

use std::io::Write;

use crate::algebra::{solve_linear, DenseMatrix};
use crate::error::{Error, Result};
use crate::feynman_kac::solve_survival;
use crate::graph::{EdgeWeights, MetricGraph, PointOnGraph, Role};
use crate::kac::KappaSpec;
use crate::report::sig;
use crate::scalar::Real;

/// Tolerance on the matching-condition residuals of a solve.
pub const MATCHING_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActiveZoneSpec<T> {
    /// Rate constant (1/time).
    pub k: T,
    /// Zone radius scale (length).
    pub delta: T,
    /// Diffusion coefficient (length^2/time).
    pub diffusion: T,
    /// Dimensionless zone scale.
    pub h: T,
}

impl<T: Real> ActiveZoneSpec<T> {
    /// Point-site rate the zones collapse to.
    pub fn kappa(&self) -> T {
        self.k * self.delta / self.diffusion
    }

    pub fn mu(&self) -> T {
        (self.k / (self.h * self.diffusion)).sqrt()
    }

    pub fn zone_length(&self) -> T {
        self.h * self.delta
    }

    pub fn with_h(self, h: T) -> Self {
        ActiveZoneSpec { h, ..self }
    }

    pub fn check(&self, g: &MetricGraph<T>) -> Result<()> {
        if !(self.k >= T::zero() && self.k.is_finite()) {
            return Err(Error::precondition(format!(
                "rate constant k = {} must be finite and nonnegative",
                self.k
            )));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("diffusion", self.diffusion),
            ("h", self.h),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::precondition(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        let z = self.zone_length();
        for (i, e) in g.edges().iter().enumerate() {
            let touches = g.role(e.from) == Role::Active || g.role(e.to) == Role::Active;
            if touches && !(z + z < e.length) {
                return Err(Error::precondition(format!(
                    "zone length {z} is not below half of edge #{i} (length {})",
                    e.length
                )));
            }
        }
        Ok(())
    }
}

/// `u(s) = a cosh(mu s) + b sinh(mu s) / mu` on a segment with local
/// coordinate `s` in `[0, len]`. `mu = 0` is the affine case `a + b s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<T> {
    /// Offset of the segment start from the edge's `from` vertex.
    pub start: T,
    pub len: T,
    pub mu: T,
    pub a: T,
    pub b: T,
}

impl<T: Real> Segment<T> {
    fn basis(&self, s: T) -> [T; 2] {
        if self.mu == T::zero() {
            [T::one(), s]
        } else {
            let x = self.mu * s;
            [x.cosh(), x.sinh() / self.mu]
        }
    }

    fn basis_slope(&self, s: T) -> [T; 2] {
        if self.mu == T::zero() {
            [T::zero(), T::one()]
        } else {
            let x = self.mu * s;
            [self.mu * x.sinh(), x.cosh()]
        }
    }

    pub fn value(&self, s: T) -> T {
        let [p, q] = self.basis(s);
        self.a * p + self.b * q
    }

    pub fn slope(&self, s: T) -> T {
        let [p, q] = self.basis_slope(s);
        self.a * p + self.b * q
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseSolution<T> {
    /// Segments of each edge, ordered from its `from` vertex.
    pub edges: Vec<Vec<Segment<T>>>,
    /// Largest absolute residual over all matching conditions.
    pub residual: T,
}

impl<T: Real> PiecewiseSolution<T> {
    pub fn on_edge(&self, edge: usize, y: T) -> T {
        let segs = &self.edges[edge];
        let seg = segs
            .iter()
            .find(|s| y <= s.start + s.len)
            .unwrap_or_else(|| segs.last().expect("edge has segments"));
        seg.value(y - seg.start)
    }

    pub fn at(&self, g: &MetricGraph<T>, x: PointOnGraph<T>) -> T {
        match x {
            PointOnGraph::Edge { edge, offset } => self.on_edge(edge, offset),
            PointOnGraph::Vertex(v) => {
                let h = g.half_edges_from(v)[0];
                let segs = &self.edges[h.edge];
                if h.forward {
                    segs[0].value(T::zero())
                } else {
                    let s = segs.last().expect("edge has segments");
                    s.value(s.len)
                }
            }
        }
    }
}

fn edge_segments<T: Real>(g: &MetricGraph<T>, zone: &ActiveZoneSpec<T>) -> Vec<Vec<Segment<T>>> {
    let z = zone.zone_length();
    let mu = zone.mu();
    let blank = |start: T, len: T, mu: T| Segment {
        start,
        len,
        mu,
        a: T::zero(),
        b: T::zero(),
    };
    g.edges()
        .iter()
        .map(|e| {
            let head = g.role(e.from) == Role::Active;
            let tail = g.role(e.to) == Role::Active;
            let mut segs = Vec::with_capacity(3);
            let mut start = T::zero();
            if head {
                segs.push(blank(T::zero(), z, mu));
                start = z;
            }
            let end = if tail { e.length - z } else { e.length };
            segs.push(blank(start, end - start, T::zero()));
            if tail {
                segs.push(blank(end, z, mu));
            }
            segs
        })
        .collect()
}

/// One linear condition: `sum coeff * unknown = rhs`.
type Row<T> = (Vec<(usize, T)>, T);

/// Coefficients of the two unknowns of one segment.
type Pair<T> = [(usize, T); 2];

fn assemble<T: Real>(
    g: &MetricGraph<T>,
    w: &EdgeWeights<T>,
    segs: &[Vec<Segment<T>>],
) -> (Vec<Row<T>>, usize) {
    let mut offset = Vec::with_capacity(segs.len());
    let mut count = 0;
    for s in segs {
        offset.push(count);
        count += s.len();
    }
    let col = |e: usize, k: usize| 2 * (offset[e] + k);
    let mut rows: Vec<Row<T>> = Vec::new();

    // smooth interfaces inside edges
    for (e, s) in segs.iter().enumerate() {
        for k in 0..s.len() - 1 {
            let (left, right) = (&s[k], &s[k + 1]);
            let [lp, lq] = left.basis(left.len);
            let [rp, rq] = right.basis(T::zero());
            rows.push((
                vec![
                    (col(e, k), lp),
                    (col(e, k) + 1, lq),
                    (col(e, k + 1), -rp),
                    (col(e, k + 1) + 1, -rq),
                ],
                T::zero(),
            ));
            let [lp, lq] = left.basis_slope(left.len);
            let [rp, rq] = right.basis_slope(T::zero());
            rows.push((
                vec![
                    (col(e, k), lp),
                    (col(e, k) + 1, lq),
                    (col(e, k + 1), -rp),
                    (col(e, k + 1) + 1, -rq),
                ],
                T::zero(),
            ));
        }
    }

    // value and outward slope of each half-edge at its source
    let end_terms = |h: crate::graph::HalfEdge| -> (Pair<T>, Pair<T>) {
        let s = &segs[h.edge];
        if h.forward {
            let [p, q] = s[0].basis(T::zero());
            let [dp, dq] = s[0].basis_slope(T::zero());
            let c = col(h.edge, 0);
            ([(c, p), (c + 1, q)], [(c, dp), (c + 1, dq)])
        } else {
            let k = s.len() - 1;
            let [p, q] = s[k].basis(s[k].len);
            let [dp, dq] = s[k].basis_slope(s[k].len);
            let c = col(h.edge, k);
            ([(c, p), (c + 1, q)], [(c, -dp), (c + 1, -dq)])
        }
    };

    for v in 0..g.num_vertices() {
        let hs = g.half_edges_from(v);
        let first = end_terms(hs[0]).0;
        if g.role(v) == Role::Exit {
            rows.push((first.to_vec(), T::one()));
            continue;
        }
        for &h in &hs[1..] {
            let (val, _) = end_terms(h);
            let mut r = first.to_vec();
            r.extend(val.iter().map(|&(c, x)| (c, -x)));
            rows.push((r, T::zero()));
        }
        let mut flux = Vec::new();
        for &h in hs {
            let p = w.get(h);
            flux.extend(end_terms(h).1.iter().map(|&(c, x)| (c, p * x)));
        }
        rows.push((flux, T::zero()));
    }
    (rows, 2 * count)
}

/// Survival function with finite-width zones around the active vertices.
pub fn solve_diffuse<T: Real>(
    g: &MetricGraph<T>,
    w: &EdgeWeights<T>,
    zone: &ActiveZoneSpec<T>,
) -> Result<PiecewiseSolution<T>> {
    g.ensure_valid()?;
    zone.check(g)?;
    let mut segs = edge_segments(g, zone);
    let (rows, n) = assemble(g, w, &segs);
    debug_assert_eq!(rows.len(), n);
    let mut a = DenseMatrix::zeros(n);
    let mut b = vec![T::zero(); n];
    for (i, (terms, rhs)) in rows.iter().enumerate() {
        for &(j, x) in terms {
            a[(i, j)] += x;
        }
        b[i] = *rhs;
    }
    let x = solve_linear(&a, &b)?;
    let mut k = 0;
    for s in segs.iter_mut().flatten() {
        s.a = x[k];
        s.b = x[k + 1];
        k += 2;
    }
    let residual = rows
        .iter()
        .map(|(terms, rhs)| (terms.iter().map(|&(j, c)| c * x[j]).sum::<T>() - *rhs).abs())
        .fold(T::zero(), T::max);
    Ok(PiecewiseSolution {
        edges: segs,
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollapseRow<T> {
    pub h: T,
    pub psi_h: T,
    pub psi_limit: T,
    pub abs_err: T,
}

/// Survival at `x` for each zone scale in `h_list` (strictly decreasing),
/// against the point-site limit with `kappa = k delta / D`.
pub fn collapse_study<T: Real>(
    g: &MetricGraph<T>,
    w: &EdgeWeights<T>,
    zone: &ActiveZoneSpec<T>,
    h_list: &[T],
    x: PointOnGraph<T>,
) -> Result<Vec<CollapseRow<T>>> {
    if h_list.is_empty() {
        return Err(Error::precondition("empty list of zone scales"));
    }
    if h_list.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(Error::precondition(
            "zone scales must be strictly decreasing",
        ));
    }
    g.check_point(x)?;
    let limit_field = solve_survival(g, w, &KappaSpec::Uniform(zone.kappa()))?;
    let psi_limit = crate::feynman_kac::evaluate_at(&limit_field, g, x);
    h_list
        .iter()
        .map(|&h| {
            let sol = solve_diffuse(g, w, &zone.with_h(h))?;
            let psi_h = sol.at(g, x);
            Ok(CollapseRow {
                h,
                psi_h,
                psi_limit,
                abs_err: (psi_h - psi_limit).abs(),
            })
        })
        .collect()
}

/// Writes the study as CSV with columns `h,psi_h,psi_limit,abs_err`.
pub fn write_collapse_csv<T: Real, W: Write>(rows: &[CollapseRow<T>], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["h", "psi_h", "psi_limit", "abs_err"])?;
    for r in rows {
        wtr.write_record([sig(r.h), sig(r.psi_h), sig(r.psi_limit), sig(r.abs_err)])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::derive_weights;

    fn interval(l: f64) -> MetricGraph<f64> {
        let mut g = MetricGraph::new();
        let c = g.add_vertex("c", Role::Active);
        let a = g.add_vertex("a", Role::Exit);
        g.add_edge(c, a, l);
        g
    }

    fn closed_form(zone: &ActiveZoneSpec<f64>, l: f64) -> f64 {
        let mu = zone.mu();
        let y = zone.zone_length();
        1.0 / ((mu * y).cosh() + mu * (mu * y).sinh() * (l - y))
    }

    #[test]
    fn interval_matches_hand_solution() {
        let g = interval(2.0);
        let w = derive_weights(&g);
        for h in [0.3, 0.05, 1e-3] {
            let zone = ActiveZoneSpec {
                k: 1.7,
                delta: 0.8,
                diffusion: 0.6,
                h,
            };
            let sol = solve_diffuse(&g, &w, &zone).unwrap();
            let psi = sol.at(&g, PointOnGraph::Vertex(0));
            assert!((psi - closed_form(&zone, 2.0)).abs() < 1e-12, "h={h}");
            assert!(sol.residual < MATCHING_TOL);
        }
    }

    #[test]
    fn no_killing_survives() {
        let g = interval(1.0);
        let w = derive_weights(&g);
        let zone = ActiveZoneSpec {
            k: 0.0,
            delta: 1.0,
            diffusion: 1.0,
            h: 0.1,
        };
        let sol = solve_diffuse(&g, &w, &zone).unwrap();
        for y in [0.0, 0.05, 0.5, 1.0] {
            assert!((sol.on_edge(0, y) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn solution_is_smooth_across_zone_boundary() {
        let g = interval(1.0);
        let w = derive_weights(&g);
        let zone = ActiveZoneSpec {
            k: 3.0,
            delta: 1.0,
            diffusion: 1.0,
            h: 0.2,
        };
        let sol = solve_diffuse(&g, &w, &zone).unwrap();
        let segs = &sol.edges[0];
        assert_eq!(segs.len(), 2);
        assert!((segs[0].value(segs[0].len) - segs[1].value(0.0)).abs() < 1e-12);
        assert!((segs[0].slope(segs[0].len) - segs[1].slope(0.0)).abs() < 1e-12);
        assert!(segs[0].slope(0.0).abs() < 1e-12);
    }

    #[test]
    fn zones_must_fit() {
        let g = interval(1.0);
        let w = derive_weights(&g);
        let zone = ActiveZoneSpec {
            k: 1.0,
            delta: 1.0,
            diffusion: 1.0,
            h: 0.5,
        };
        assert!(matches!(
            solve_diffuse(&g, &w, &zone),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn single_row_study() {
        let g = interval(1.0);
        let w = derive_weights(&g);
        let zone = ActiveZoneSpec {
            k: 1.0,
            delta: 1.0,
            diffusion: 1.0,
            h: 0.1,
        };
        let rows = collapse_study(&g, &w, &zone, &[0.01], PointOnGraph::Vertex(0)).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].psi_limit - 0.5).abs() < 1e-14);
        assert!(collapse_study(&g, &w, &zone, &[0.01, 0.1], PointOnGraph::Vertex(0)).is_err());
        let mut buf = Vec::new();
        write_collapse_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("h,psi_h,psi_limit,abs_err\n0.01,"));
    }
}
