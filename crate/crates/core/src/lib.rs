//! Curvature engine for Finsler metrics of the form `F = alpha * phi(beta / alpha)`
//! where `beta` is a Killing form of constant length.
//!
//! The crate computes sprays, Riemann and Ricci curvature by two independent
//! routes (generic jet differentiation of `F^2`, and closed formulas in terms
//! of covariant derivatives of `beta`), solves the ODE family that makes such
//! metrics Einstein, and realizes the construction explicitly on Berger
//! spheres.

// index loops follow the tensor notation; `!(x > 0.0)` also rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod jet;
pub mod linalg;
pub mod metric;
pub mod ode;
pub mod quadrature;
pub mod riemannian;
pub mod rk;
pub mod s3;
pub mod sampling;
pub mod spray;
pub mod taylor;

pub use error::{Error, Result};
pub use jet::{DomainError, Jet2, Scalar};
pub use metric::{ABMetric, ChartGeometry, PhiJet, PhiSpec, TangentSample};
pub use s3::BergerSphere;
