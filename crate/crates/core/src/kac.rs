//! Survival and conversion probabilities from the Green matrix and the
//! hitting split, including the rational dependence on the rate `kappa`.
//!
//! Rates follow the weighted vertex condition
//! `sum_e p_v(e) (D_e u)(v) = kappa u(v)` at active vertices. On a chain of
//! interior degree-2 sites this is the unweighted Kirchhoff condition with
//! rate `2 kappa`; [`chain_alpha_recursive`] is written in the unweighted
//! form, so `chain_alpha_recursive(l, 2k) == conversion(chain, k)`.

use crate::algebra::{det_poly, row_subtracted, solve_linear, Polynomial, RationalForm};
use crate::error::{Error, Result};
use crate::graph::{EdgeWeights, MetricGraph, PointOnGraph, Role};
use crate::harmonic::{green_matrix, hitting_split, GreenMatrix};
use crate::scalar::Real;

/// Reaction strength at the active vertices, in inverse length units.
/// `+inf` means instant absorption.
#[derive(Clone, Debug, PartialEq)]
pub enum KappaSpec<T> {
    Uniform(T),
    /// One rate per active vertex, in [`MetricGraph::active`] order.
    PerSite(Vec<T>),
}

impl<T: Real> KappaSpec<T> {
    /// Per-site rates for `c` active vertices.
    pub fn rates(&self, c: usize) -> Result<Vec<T>> {
        let rates = match self {
            KappaSpec::Uniform(k) => vec![*k; c],
            KappaSpec::PerSite(ks) if ks.len() == c => ks.clone(),
            KappaSpec::PerSite(ks) => {
                return Err(Error::precondition(format!(
                    "{} rates given for {c} active vertices",
                    ks.len()
                )))
            }
        };
        if let Some(bad) = rates.iter().find(|k| !(**k >= T::zero())) {
            return Err(Error::precondition(format!(
                "rate {bad} is not a nonnegative number"
            )));
        }
        Ok(rates)
    }
}

fn finite_rates<T: Real>(ks: &KappaSpec<T>, c: usize) -> Result<Vec<T>> {
    let rates = ks.rates(c)?;
    if rates.iter().any(|k| k.is_infinite()) {
        return Err(Error::precondition("infinite rate in a finite-rate solve"));
    }
    Ok(rates)
}

/// `psi` on the active vertices: the solution of `(I + G M) psi = 1`.
pub fn survival_on_active<T: Real>(green: &GreenMatrix<T>, ks: &KappaSpec<T>) -> Result<Vec<T>> {
    let rates = finite_rates(ks, green.dim())?;
    let a = green.matrix.identity_plus_scaled_columns(&rates);
    solve_linear(&a, &vec![T::one(); green.dim()])
}

/// `psi(c_j) = det(I + G^(j) M) / det(I + G M)`.
pub fn survival_det<T: Real>(green: &GreenMatrix<T>, ks: &KappaSpec<T>, j: usize) -> Result<T> {
    let rates = finite_rates(ks, green.dim())?;
    let gj = row_subtracted(&green.matrix, j)?;
    let num = gj.identity_plus_scaled_columns(&rates).determinant();
    let den = green
        .matrix
        .identity_plus_scaled_columns(&rates)
        .determinant();
    Ok(num / den)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SiteTerm<T> {
    pub vertex: usize,
    /// Probability that the first active vertex hit is this one.
    pub first_hit: T,
    /// Survival probability starting from this vertex.
    pub survival: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConversionResult<T> {
    /// Conversion probability.
    pub alpha: T,
    /// Survival probability, `1 - alpha`.
    pub psi: T,
    pub alpha_inf: T,
    pub breakdown: Vec<SiteTerm<T>>,
}

/// Conversion probability starting from `x`:
/// `alpha = alpha_inf sum_j p_j (1 - psi(c_j))`.
///
/// Uniform finite rates use the determinant ratios; per-site rates solve the
/// linear system. An everywhere-infinite rate returns `alpha_inf`. Mixing
/// infinite and finite per-site rates is rejected.
pub fn conversion<T: Real>(
    g: &MetricGraph<T>,
    w: &EdgeWeights<T>,
    x: PointOnGraph<T>,
    ks: &KappaSpec<T>,
) -> Result<ConversionResult<T>> {
    let split = hitting_split(g, w, x)?;
    let active = g.active();
    let rates = ks.rates(active.len())?;
    if active.is_empty() {
        return Ok(ConversionResult {
            alpha: T::zero(),
            psi: T::one(),
            alpha_inf: T::zero(),
            breakdown: Vec::new(),
        });
    }
    let infinite = rates.iter().filter(|k| k.is_infinite()).count();
    let survival: Vec<T> = if infinite == rates.len() {
        vec![T::zero(); rates.len()]
    } else if infinite > 0 {
        return Err(Error::precondition(
            "mixed finite and infinite per-site rates",
        ));
    } else {
        let green = green_matrix(g, w)?;
        match ks {
            KappaSpec::Uniform(_) => (0..active.len())
                .map(|j| survival_det(&green, ks, j))
                .collect::<Result<_>>()?,
            KappaSpec::PerSite(_) => survival_on_active(&green, ks)?,
        }
    };
    let breakdown: Vec<SiteTerm<T>> = active
        .iter()
        .zip(&split.p)
        .zip(&survival)
        .map(|((&vertex, &first_hit), &survival)| SiteTerm {
            vertex,
            first_hit,
            survival,
        })
        .collect();
    let reacted: T = breakdown
        .iter()
        .map(|t| t.first_hit * (T::one() - t.survival))
        .sum();
    let alpha = if infinite == rates.len() {
        split.alpha_inf
    } else {
        (split.alpha_inf * reacted)
            .max(T::zero())
            .min(split.alpha_inf)
    };
    Ok(ConversionResult {
        alpha,
        psi: T::one() - alpha,
        alpha_inf: split.alpha_inf,
        breakdown,
    })
}

/// `alpha(kappa)` as a ratio of polynomials of degree at most the number of
/// active vertices, for a uniform rate.
pub fn rational_form<T: Real>(
    g: &MetricGraph<T>,
    w: &EdgeWeights<T>,
    x: PointOnGraph<T>,
) -> Result<RationalForm<T>> {
    let split = hitting_split(g, w, x)?;
    if g.active().is_empty() {
        return RationalForm::normalized(Polynomial::zero(), Polynomial::one());
    }
    let green = green_matrix(g, w)?;
    let den = det_poly(&green.matrix);
    let mut bracket = den.clone();
    for (j, &p) in split.p.iter().enumerate() {
        if p != T::zero() {
            let pj = det_poly(&row_subtracted(&green.matrix, j)?).scale(p);
            bracket = &bracket - &pj;
        }
    }
    let mut coeffs = bracket.scale(split.alpha_inf).coeffs().to_vec();
    if let Some(c0) = coeffs.first_mut() {
        *c0 = T::zero();
    }
    RationalForm::normalized(Polynomial::new(coeffs), den)
}

/// Conversion on a chain by the product recursion
/// `g_1 = 1`, `g_{j+1} = g_j + l_{j+1} (g_1 + ... + g_j) kappa`,
/// `alpha = (g_{m+1} - 1) / g_{m+1}`, where `lengths = [l_1, ..., l_{m+1}]`.
///
/// Uses the unweighted Kirchhoff rate; see the module docs for the mapping.
pub fn chain_alpha_recursive<T: Real>(lengths: &[T], kappa: T) -> Result<T> {
    if lengths.len() < 2 {
        return Err(Error::precondition(
            "a chain needs at least one active site",
        ));
    }
    if lengths.iter().any(|l| !(*l > T::zero())) {
        return Err(Error::precondition("chain lengths must be positive"));
    }
    if kappa.is_infinite() {
        return Ok(T::one());
    }
    let mut gs = vec![T::one()];
    let mut partial = T::one();
    for &l in &lengths[1..] {
        let next = *gs.last().expect("nonempty") + l * partial * kappa;
        gs.push(next);
        partial += next;
    }
    let last = *gs.last().expect("nonempty");
    Ok((last - T::one()) / last)
}

/// Entrance vertex, `m` active sites and an exit on a line.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec<T> {
    /// `[l_1, ..., l_{m+1}]`: entrance to first site, between sites, last
    /// site to exit.
    pub lengths: Vec<T>,
}

impl<T: Real> ChainSpec<T> {
    pub fn new(lengths: Vec<T>) -> Self {
        ChainSpec { lengths }
    }

    /// Chain with sites at the given positions on `[0, total]`.
    pub fn from_positions(positions: &[T], total: T) -> Result<Self> {
        let mut lengths = Vec::with_capacity(positions.len() + 1);
        let mut prev = T::zero();
        for &x in positions.iter().chain(std::iter::once(&total)) {
            lengths.push(x - prev);
            prev = x;
        }
        if lengths.iter().any(|l| !(*l > T::zero())) {
            return Err(Error::precondition(
                "site positions must be strictly increasing inside (0, total)",
            ));
        }
        Ok(ChainSpec { lengths })
    }

    pub fn sites(&self) -> usize {
        self.lengths.len().saturating_sub(1)
    }

    /// The graph; the entrance is vertex 0 and sites are vertices `1..=m`.
    pub fn graph(&self) -> MetricGraph<T> {
        let mut g = MetricGraph::new();
        let mut prev = g.add_vertex("v0", Role::Inert);
        let m = self.sites();
        for (k, &l) in self.lengths.iter().enumerate() {
            let next = if k < m {
                g.add_vertex(format!("c{}", k + 1), Role::Active)
            } else {
                g.add_vertex("a", Role::Exit)
            };
            g.add_edge(prev, next, l);
            prev = next;
        }
        g
    }

    pub fn rational_form(&self) -> Result<RationalForm<T>> {
        let g = self.graph();
        rational_form(&g, &EdgeWeights::uniform(&g), PointOnGraph::Vertex(0))
    }
}

/// Coefficient of `kappa^m` in the denominator of the chain's rational form;
/// governs `alpha` at large rate.
pub fn placement_leading_coeff<T: Real>(chain: &ChainSpec<T>) -> Result<T> {
    Ok(chain.rational_form()?.denominator.coeff(chain.sites()))
}

/// `d alpha / d kappa` at zero for the chain; governs `alpha` at small rate.
pub fn placement_small_kappa_slope<T: Real>(chain: &ChainSpec<T>) -> Result<T> {
    Ok(chain.rational_form()?.slope_at_zero())
}

/// One placement of two sites on a chain of fixed total length.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacementRow<T> {
    pub x1: T,
    pub x2: T,
    pub leading_coeff: T,
    pub small_kappa_slope: T,
}

/// Scans every pair of grid positions `x1 < x2` from
/// `{k total / (points + 1) : k = 1..=points}`.
pub fn placement_scan_two_sites<T: Real>(total: T, points: usize) -> Result<Vec<PlacementRow<T>>> {
    let step = total / T::from_usize(points + 1).expect("points");
    let grid: Vec<T> = (1..=points)
        .map(|k| step * T::from_usize(k).expect("k"))
        .collect();
    let mut rows = Vec::new();
    for i in 0..points {
        for j in i + 1..points {
            let chain = ChainSpec::from_positions(&[grid[i], grid[j]], total)?;
            let form = chain.rational_form()?;
            rows.push(PlacementRow {
                x1: grid[i],
                x2: grid[j],
                leading_coeff: form.denominator.coeff(2),
                small_kappa_slope: form.slope_at_zero(),
            });
        }
    }
    Ok(rows)
}
