//! Magnetic Hamiltonian dynamics on constant-curvature Kähler manifolds.
//!
//! The crate covers the whole pipeline from geometry to the spectral
//! collapse model:
//!
//! - [`geometry`]: Fubini–Study type metrics on `CPᵐ`, `CHᵐ`, flat space
//!   and products of 2-D space forms, with connection, curvature and
//!   geodesics in the origin chart.
//! - [`magnetic`]: the Einstein–Kähler field `F = κ·Ric + λ·g` and its potential.
//! - [`flow`]: RK4 integration of the reduced Hamiltonian system with
//!   conservation monitoring.
//! - [`closed_form`]: exact trajectories and regime classification.
//! - [`cqm`]: independent hyperbolic modes with mass-dependent curvature
//!   and the resulting collapse report.
//! - [`observables`]: expectation values, Born probabilities and
//!   parallel transport of observables.
//! - [`sweep`]: bifurcation sweeps over the curvature parameter.
//!
//! Batch workloads go through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and runs sequentially otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod closed_form;
pub mod cqm;
pub mod error;
pub mod exec;
pub mod fd;
pub mod flow;
pub mod geometry;
pub mod magnetic;
pub mod observables;
pub mod sweep;
pub mod validate;

pub use num_complex::Complex64 as C64;

pub type CVector = nalgebra::DVector<C64>;
pub type CMatrix = nalgebra::DMatrix<C64>;

pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{ChartPoint, ManifoldSpec};
pub use magnetic::MagneticSpec;
