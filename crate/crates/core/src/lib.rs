//! Lowest-order virtual element solver for two-dimensional linear elasticity
//! and the Poisson equation on polygonal meshes, with a linear triangle
//! finite element reference.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too; dense kernels
// index several arrays with the same loop variable.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod benchmarks;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod io;
pub mod mesher;
pub mod model;
pub mod norms;
pub mod pipeline;
pub mod quadrature;
pub mod run;
pub mod solver;
pub mod vem;

pub use error::{Error, Result};
pub use geometry::{Point2, Polygon};
pub use mesher::{Mesh, Region};
