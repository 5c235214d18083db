//! Conversion probabilities for first-order reactions at point-like active
//! sites on metric graphs.
//!
//! A particle diffuses on a graph of segments until it leaves through an
//! exit vertex; each active vertex kills it at rate `kappa` per unit of local
//! time. This crate computes the conversion probability `alpha` (and the
//! survival probability `psi = 1 - alpha`) four ways:
//!
//! * [`kac`]: Green matrix and first-hit split, with `alpha` as an explicit
//!   rational function of `kappa`;
//! * [`feynman_kac`]: a direct linear system in the vertex values;
//! * [`diffuse`]: finite reaction zones of width `h delta`, converging to the
//!   point-site model as `h -> 0`;
//! * [`mc`]: an unbiased Monte Carlo estimate on the embedded grid chain.
//!
//! Numerics are generic over [`Real`] (`f32` or `f64`); the `*F64` aliases
//! below name the double-precision instances.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod diffuse;
pub mod document;
pub mod error;
pub mod feynman_kac;
pub mod fixtures;
pub mod graph;
pub mod harmonic;
pub mod kac;
pub mod mc;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use graph::{
    derive_weights, split_at, split_weighted, EdgeWeights, HalfEdge, MetricGraph, PointOnGraph,
    Role,
};
pub use kac::KappaSpec;
pub use scalar::Real;

pub type MetricGraphF64 = graph::MetricGraph<f64>;
pub type EdgeWeightsF64 = graph::EdgeWeights<f64>;
pub type PointF64 = graph::PointOnGraph<f64>;
pub type KappaF64 = kac::KappaSpec<f64>;
pub type GreenMatrixF64 = harmonic::GreenMatrix<f64>;
pub type HittingSplitF64 = harmonic::HittingSplit<f64>;
pub type RationalFormF64 = algebra::RationalForm<f64>;
pub type ConversionF64 = kac::ConversionResult<f64>;
pub type SurvivalFieldF64 = feynman_kac::SurvivalField<f64>;
pub type NetworkF64 = document::Network<f64>;
pub type SimEstimateF64 = mc::SimEstimate<f64>;

pub type MetricGraphF32 = graph::MetricGraph<f32>;
pub type EdgeWeightsF32 = graph::EdgeWeights<f32>;
pub type KappaF32 = kac::KappaSpec<f32>;
