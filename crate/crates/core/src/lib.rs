//! Variable Bregman stochastic coordinate descent (VBSCD) for composite
//! objectives `F = f + sum_i g_i`, where `f` is smooth (possibly nonconvex)
//! and each block regularizer `g_i` is semi-convex and separable.
//!
//! The crate is split along the pipeline:
//!
//! * [`model`]: problem instances, smooth losses, block partitions and
//!   regularizers with exact subdifferential intervals.
//! * [`bregman`]: diagonal quadratic Bregman generators and step schedules.
//! * [`prox`]: scalar proximal kernels and the coordinate / full Bregman
//!   proximal maps plus the proximal envelope.
//! * [`solver`]: the randomized block iteration and its trajectories.
//! * [`diagnostics`]: numeric certification of the expectation identities,
//!   decrease inequalities, error-bound constants and convergence rates.
//! * [`harness`]: experiment configuration, Monte-Carlo replications,
//!   CSV persistence and the command line surface.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bregman;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod model;
pub mod prox;
pub mod solver;

pub use error::{Error, Result};

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
