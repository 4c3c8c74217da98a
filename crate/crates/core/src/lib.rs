//! Numerical verification engine for dualistic structures (conjugate
//! affine connection pairs) on generalized warped product manifolds.
//!
//! The crate builds, in coordinates, the two cross-term product metrics
//! on `M1 x M2` together with their induced product and factor connection
//! pairs, and checks every identity they are supposed to satisfy --
//! conjugacy, statistical symmetry, curvature duality, closed-form
//! curvature blocks -- against independent finite-difference oracles.
//!
//! All core math is generic over the scalar type via [`scalar::Real`];
//! the aliases below fix `f64`, which is what the verification suites and
//! the `warpgeo` CLI run at.

// Index loops are written to mirror the tensor formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod error;
pub mod expr;
pub mod manifold;
pub mod product;
pub mod scalar;
pub mod tensor;
pub mod verify;
pub mod warped;

pub use error::{GeomError, Result};
pub use scalar::{real, Real};

/// `f64` expression type used by the CLI and the suites.
pub type Expr64 = expr::ScalarExpr<f64>;
/// `f64` symmetric matrix.
pub type SymMatrix64 = tensor::SymMatrix<f64>;
/// `f64` connection coefficients.
pub type ConnectionCoeffs64 = manifold::ConnectionCoeffs<f64>;
/// `f64` single-chart manifold.
pub type ChartManifold64 = manifold::ChartManifold<f64>;
/// `f64` warped product scene.
pub type Scene64 = warped::WarpedProductScene<f64>;
