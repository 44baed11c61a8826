//! Numerical-moment stabilized central finite differences for stationary
//! reaction-convection-diffusion and Hamilton-Jacobi equations on uniform
//! tensor-product grids in one and two dimensions.
//!
//! Module overview:
//! - [`grid`]: grids, multi-indices, node classification, ghost nodes.
//! - [`operators`]: difference stencils and their sparse assembly.
//! - [`sparse`]: compressed-row operators and a banded LU solver.
//! - [`problems`]: problem types and the example registry.
//! - [`schemes`]: scheme families, residuals, linear-system assembly.
//! - [`solvers`]: direct, Newton-continuation and fixed-point solvers.
//! - [`analysis`]: error norms, orders, matrix diagnostics, root regimes.
//! - [`config`]: TOML experiment configurations.
//! - [`experiment`]: convergence tables, solution dumps, diagnostics reports.

// `!(x > 0.0)` deliberately rejects NaN; index loops mirror the stencil formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod operators;
pub mod problems;
pub mod schemes;
pub mod solvers;
pub mod sparse;

pub use error::{Error, Result};
