//! Built-in charts and scenes used by the verification suites and tests.
//!
//! Everything here goes through the expression parser, so the catalog also
//! exercises the same grammar scene files use.

use crate::error::Result;
use crate::expr::ScalarExpr;
use crate::manifold::{default_box, ChartManifold, ConnectionExprField, MetricField};
use crate::scalar::{real, Real};
use crate::warped::WarpedProductScene;

fn expr<T: Real>(text: &str, arity: usize) -> Result<ScalarExpr<T>> {
    ScalarExpr::parse(text, arity)
        .map_err(|e| crate::error::GeomError::validation(format!("catalog expression: {e}")))
}

fn diag_metric<T: Real>(entries: &[&str]) -> Result<MetricField<T>> {
    let dim = entries.len();
    MetricField::from_fn_upper(dim, |i, j| {
        if i == j {
            expr(entries[i], dim)
        } else {
            Ok(ScalarExpr::constant(dim, T::zero()))
        }
    })
}

/// Flat Euclidean chart in `dim` coordinates.
pub fn euclidean<T: Real>(dim: usize) -> Result<ChartManifold<T>> {
    let ones = vec!["1"; dim];
    ChartManifold::from_metric(diag_metric(&ones)?)
}

/// Polar-type chart: `g = diag(1, x0^2)`.
pub fn polar<T: Real>() -> Result<ChartManifold<T>> {
    ChartManifold::from_metric(diag_metric(&["1", "x0^2"])?)
}

/// Unit-sphere chart: `g = diag(1, sin(x0)^2)`.
pub fn sphere<T: Real>() -> Result<ChartManifold<T>> {
    ChartManifold::from_metric(diag_metric(&["1", "sin(x0)^2"])?)
}

/// Gaussian location-scale information metric in the `(mu, sigma)` chart:
/// `g = diag(1/x1^2, 2/x1^2)`.
pub fn gauss_fisher<T: Real>() -> Result<ChartManifold<T>> {
    ChartManifold::from_metric(diag_metric(&["1/x1^2", "2/x1^2"])?)
}

/// One-dimensional chart `g = exp(2 x0)` carrying the explicit dually flat
/// pair: the flat connection and its conjugate `gamma* = 2`.
pub fn exp_1d<T: Real>() -> Result<ChartManifold<T>> {
    let metric = diag_metric(&["exp(2*x0)"])?;
    let conn = ConnectionExprField::from_fn(1, true, |_, _, _| expr("0", 1))?;
    let conn_star = ConnectionExprField::from_fn(1, true, |_, _, _| expr("2", 1))?;
    ChartManifold::new(metric, Some(conn), Some(conn_star), default_box(1))
}

/// Two-dimensional dually flat statistical chart `g = diag(x0^2, x1^2)`
/// with the flat primal connection and its conjugate
/// (`gamma*^0_{00} = 2/x0`, `gamma*^1_{11} = 2/x1`).
pub fn diag_quadratic<T: Real>() -> Result<ChartManifold<T>> {
    let metric = diag_metric(&["x0^2", "x1^2"])?;
    let conn = ConnectionExprField::from_fn(2, true, |_, _, _| expr("0", 2))?;
    let conn_star = ConnectionExprField::from_fn(2, true, |k, i, j| {
        if k == 0 && i == 0 && j == 0 {
            expr("2/x0", 2)
        } else if k == 1 && i == 1 && j == 1 {
            expr("2/x1", 2)
        } else {
            expr("0", 2)
        }
    })?;
    ChartManifold::new(metric, Some(conn), Some(conn_star), default_box(2))
}

/// Three-dimensional split chart `g = diag(1, 1, sin(x1)^2)`: a flat line
/// times a curved surface, so `d/dx0` is parallel.
pub fn split_base<T: Real>() -> Result<ChartManifold<T>> {
    ChartManifold::from_metric(diag_metric(&["1", "1", "sin(x1)^2"])?)
}

fn scene<T: Real>(
    base: ChartManifold<T>,
    fiber: ChartManifold<T>,
    f1: &str,
    f2: &str,
    c: f64,
) -> Result<WarpedProductScene<T>> {
    let f1 = expr(f1, base.dim())?;
    let f2 = expr(f2, fiber.dim())?;
    WarpedProductScene::new(base, fiber, f1, f2, real(c))
}

/// Flat line base with `f1 = 0.5 x0`, flat plane fiber with constant `f2`,
/// `c = 1`. The deformed-base curvature blocks have simple hand values
/// here (wedge coefficient `-0.2`, constant fiber curvature `0.2`).
pub fn flat_linear<T: Real>() -> Result<WarpedProductScene<T>> {
    scene(euclidean(1)?, euclidean(2)?, "0.5*x0", "1", 1.0)
}

/// Flat 1-d factors with `f1 = x0`, `f2 = x0` (its own chart coordinate)
/// and adjustable `c`; `b1 = b2 = 1`, so `c = 0.5` is admissible and
/// `c = 1` is exactly degenerate.
pub fn bilinear<T: Real>(c: f64) -> Result<WarpedProductScene<T>> {
    scene(euclidean(1)?, euclidean(1)?, "x0", "x0", c)
}

/// Statistical (non-self-dual) factor pairs on both sides.
pub fn statistical<T: Real>() -> Result<WarpedProductScene<T>> {
    scene(diag_quadratic()?, exp_1d()?, "x0", "1 + x0", 0.5)
}

/// Flat line base, flat plane fiber, both warping functions linear; the
/// fiber wedge and mixed curvature blocks are all nonzero here.
pub fn wedge<T: Real>() -> Result<WarpedProductScene<T>> {
    scene(euclidean(1)?, euclidean(2)?, "x0", "x0", 0.5)
}

/// Curved split base (nonzero base curvature with a parallel gradient)
/// over a flat line fiber.
pub fn split<T: Real>() -> Result<WarpedProductScene<T>> {
    scene(split_base()?, euclidean(1)?, "x0", "x0", 0.5)
}

/// Polar base over a sphere fiber, constant `f2`.
pub fn polar_sphere<T: Real>() -> Result<WarpedProductScene<T>> {
    scene(polar()?, sphere()?, "x0", "1", 0.5)
}

/// Information-metric base over the exponential line fiber. Both boxes
/// sit where the metric third derivatives stay small enough for the
/// 1e-5 stencils to resolve the first-order identities at 1e-8.
pub fn fisher_exp<T: Real>() -> Result<WarpedProductScene<T>> {
    let base = ChartManifold::new(
        diag_metric(&["1/x1^2", "2/x1^2"])?,
        None,
        None,
        vec![(real(1.0), real(2.0)), (real(1.0), real(2.0))],
    )?;
    let metric = diag_metric(&["exp(2*x0)"])?;
    let conn = ConnectionExprField::from_fn(1, true, |_, _, _| expr("0", 1))?;
    let conn_star = ConnectionExprField::from_fn(1, true, |_, _, _| expr("2", 1))?;
    let fiber = ChartManifold::new(
        metric,
        Some(conn),
        Some(conn_star),
        vec![(real(0.5), real(1.25))],
    )?;
    scene(base, fiber, "x1", "1 + x0", 0.5)
}

/// Names of the built-in scenes, in catalog order.
pub const SCENE_NAMES: &[&str] = &[
    "flat_linear",
    "bilinear",
    "degenerate",
    "statistical",
    "wedge",
    "split",
    "polar_sphere",
    "fisher_exp",
];

/// Builds a catalog scene by name.
pub fn scene_by_name<T: Real>(name: &str) -> Option<Result<WarpedProductScene<T>>> {
    match name {
        "flat_linear" => Some(flat_linear()),
        "bilinear" => Some(bilinear(0.5)),
        "degenerate" => Some(bilinear(1.0)),
        "statistical" => Some(statistical()),
        "wedge" => Some(wedge()),
        "split" => Some(split()),
        "polar_sphere" => Some(polar_sphere()),
        "fisher_exp" => Some(fisher_exp()),
        _ => None,
    }
}
