//! Single-chart manifolds: metric fields, conjugate connection pairs,
//! lambda-connections, curvature, gradients and Hessians.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GeomError, Result};
use crate::expr::{EvalError, ScalarExpr};
use crate::scalar::{real, Real};
use crate::tensor::{check_nondegenerate, dot, solve_sym, SymMatrix, FD_STEP_CURVATURE};

/// Seed for the deterministic load-time probe grid.
const PROBE_SEED: u64 = 0x5eed_9e37;

/// Number of probe points used by load-time validation.
pub const PROBE_COUNT: usize = 32;

/// Connection coefficients at a point: `gamma[k][i][j]` is the coefficient
/// of `d_k` in `nabla_{d_i} d_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoeffs<T> {
    dim: usize,
    gamma: Vec<T>,
}

impl<T: Real> ConnectionCoeffs<T> {
    pub fn zeros(dim: usize) -> Self {
        ConnectionCoeffs {
            dim,
            gamma: vec![T::zero(); dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.dim + i) * self.dim + j
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> T {
        self.gamma[self.idx(k, i, j)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, value: T) {
        let at = self.idx(k, i, j);
        self.gamma[at] = value;
    }

    #[inline]
    pub fn add_to(&mut self, k: usize, i: usize, j: usize, value: T) {
        let at = self.idx(k, i, j);
        self.gamma[at] += value;
    }

    /// `ca * a + cb * b` entrywise.
    pub fn affine(ca: T, a: &Self, cb: T, b: &Self) -> Self {
        assert_eq!(a.dim, b.dim);
        ConnectionCoeffs {
            dim: a.dim,
            gamma: a
                .gamma
                .iter()
                .zip(&b.gamma)
                .map(|(&x, &y)| ca * x + cb * y)
                .collect(),
        }
    }

    /// Largest |gamma^k_{ij} - gamma^k_{ji}|.
    pub fn torsion_max(&self) -> T {
        let mut worst = T::zero();
        for k in 0..self.dim {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.gamma
            .iter()
            .zip(&other.gamma)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.gamma.iter().all(|g| g.is_finite())
    }
}

/// The lambda-connection `(1+lambda)/2 * gamma + (1-lambda)/2 * gamma*`.
pub fn lambda_connection<T: Real>(
    gamma: &ConnectionCoeffs<T>,
    gamma_star: &ConnectionCoeffs<T>,
    lambda: T,
) -> ConnectionCoeffs<T> {
    let half = real::<T>(0.5);
    ConnectionCoeffs::affine(
        half * (T::one() + lambda),
        gamma,
        half * (T::one() - lambda),
        gamma_star,
    )
}

/// A scalar expression together with cached symbolic first and second
/// partials. Warping functions and test functions are carried this way so
/// gradients and Hessians never re-derive expressions per point.
#[derive(Debug, Clone)]
pub struct ScalarField<T> {
    expr: ScalarExpr<T>,
    d: Vec<ScalarExpr<T>>,
    dd: Vec<ScalarExpr<T>>,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

impl<T: Real> ScalarField<T> {
    pub fn new(expr: ScalarExpr<T>) -> Self {
        let n = expr.arity();
        let d: Vec<_> = (0..n).map(|i| expr.differentiate(i)).collect();
        let mut dd = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for i in 0..=j {
                dd.push(d[i].differentiate(j));
            }
        }
        ScalarField { expr, d, dd }
    }

    pub fn arity(&self) -> usize {
        self.expr.arity()
    }

    pub fn expr(&self) -> &ScalarExpr<T> {
        &self.expr
    }

    pub fn value(&self, p: &[T]) -> std::result::Result<T, EvalError> {
        self.expr.evaluate(p)
    }

    /// All first partials at `p` (the coordinate differential `df`).
    pub fn d_at(&self, p: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        self.d.iter().map(|e| e.evaluate(p)).collect()
    }

    pub fn partial(&self, i: usize, p: &[T]) -> std::result::Result<T, EvalError> {
        self.d[i].evaluate(p)
    }

    /// Second partial `d_i d_j f` at `p`.
    pub fn second_partial(&self, i: usize, j: usize, p: &[T]) -> std::result::Result<T, EvalError> {
        self.dd[tri(i, j)].evaluate(p)
    }
}

/// Symmetric grid of metric-entry expressions with cached first partials.
/// Triangular storage makes `g[i][j]` and `g[j][i]` literally the same
/// expression.
#[derive(Debug, Clone)]
pub struct MetricField<T> {
    dim: usize,
    entries: Vec<ScalarExpr<T>>,
    d_entries: Vec<Vec<ScalarExpr<T>>>,
}

impl<T: Real> MetricField<T> {
    /// Builds from the upper triangle: `f(i, j)` is called for `i <= j`.
    pub fn from_fn_upper(
        dim: usize,
        mut f: impl FnMut(usize, usize) -> Result<ScalarExpr<T>>,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(dim * (dim + 1) / 2);
        for j in 0..dim {
            for i in 0..=j {
                let e = f(i, j)?;
                if e.arity() != dim {
                    return Err(GeomError::DimensionMismatch {
                        expected: dim,
                        got: e.arity(),
                    });
                }
                entries.push(e);
            }
        }
        let d_entries = (0..dim)
            .map(|k| entries.iter().map(|e| e.differentiate(k)).collect())
            .collect();
        Ok(MetricField {
            dim,
            entries,
            d_entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarExpr<T> {
        &self.entries[tri(i, j)]
    }

    pub fn at(&self, p: &[T]) -> std::result::Result<SymMatrix<T>, EvalError> {
        let mut g = SymMatrix::zeros(self.dim);
        for j in 0..self.dim {
            for i in 0..=j {
                g.set(i, j, self.entries[tri(i, j)].evaluate(p)?);
            }
        }
        Ok(g)
    }

    /// `d_k g` at `p`, from the cached symbolic partials.
    pub fn d_at(&self, p: &[T], k: usize) -> std::result::Result<SymMatrix<T>, EvalError> {
        let mut g = SymMatrix::zeros(self.dim);
        for j in 0..self.dim {
            for i in 0..=j {
                g.set(i, j, self.d_entries[k][tri(i, j)].evaluate(p)?);
            }
        }
        Ok(g)
    }
}

/// Explicit connection coefficients as expressions, with symbolic partials
/// for the curvature path.
#[derive(Debug, Clone)]
pub struct ConnectionExprField<T> {
    dim: usize,
    gamma: Vec<ScalarExpr<T>>,
    d_gamma: Vec<Vec<ScalarExpr<T>>>,
    torsion_free: bool,
}

impl<T: Real> ConnectionExprField<T> {
    /// `f(k, i, j)` supplies the expression for `gamma^k_{ij}`.
    pub fn from_fn(
        dim: usize,
        torsion_free: bool,
        mut f: impl FnMut(usize, usize, usize) -> Result<ScalarExpr<T>>,
    ) -> Result<Self> {
        let mut gamma = Vec::with_capacity(dim * dim * dim);
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let e = f(k, i, j)?;
                    if e.arity() != dim {
                        return Err(GeomError::DimensionMismatch {
                            expected: dim,
                            got: e.arity(),
                        });
                    }
                    gamma.push(e);
                }
            }
        }
        let d_gamma = (0..dim)
            .map(|dir| gamma.iter().map(|e| e.differentiate(dir)).collect())
            .collect();
        Ok(ConnectionExprField {
            dim,
            gamma,
            d_gamma,
            torsion_free,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn torsion_free(&self) -> bool {
        self.torsion_free
    }

    pub fn at(&self, p: &[T]) -> std::result::Result<ConnectionCoeffs<T>, EvalError> {
        let mut c = ConnectionCoeffs::zeros(self.dim);
        let mut it = self.gamma.iter();
        for k in 0..self.dim {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    c.set(k, i, j, it.next().unwrap().evaluate(p)?);
                }
            }
        }
        Ok(c)
    }

    fn partial(&self, p: &[T], dir: usize) -> std::result::Result<ConnectionCoeffs<T>, EvalError> {
        let mut c = ConnectionCoeffs::zeros(self.dim);
        let mut it = self.d_gamma[dir].iter();
        for k in 0..self.dim {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    c.set(k, i, j, it.next().unwrap().evaluate(p)?);
                }
            }
        }
        Ok(c)
    }
}

/// A single-chart manifold: dimension, metric field, optional explicit
/// connection pair, and the sampling box checks run inside.
///
/// Immutable after load; all evaluations are pure.
#[derive(Debug, Clone)]
pub struct ChartManifold<T> {
    dim: usize,
    metric: MetricField<T>,
    conn: Option<ConnectionExprField<T>>,
    conn_star: Option<ConnectionExprField<T>>,
    sampling_box: Vec<(T, T)>,
}

/// Default per-coordinate sampling interval; keeps clear of the usual
/// coordinate singularities (polar origin, sigma = 0).
pub fn default_box<T: Real>(dim: usize) -> Vec<(T, T)> {
    (0..dim).map(|_| (real(0.5), real(2.0))).collect()
}

/// Deterministic uniform probe points inside a box.
pub fn probe_points<T: Real>(boxes: &[(T, T)], count: usize) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    (0..count)
        .map(|_| {
            boxes
                .iter()
                .map(|&(lo, hi)| lo + (hi - lo) * real::<T>(rng.gen::<f64>()))
                .collect()
        })
        .collect()
}

impl<T: Real> ChartManifold<T> {
    pub fn new(
        metric: MetricField<T>,
        conn: Option<ConnectionExprField<T>>,
        conn_star: Option<ConnectionExprField<T>>,
        sampling_box: Vec<(T, T)>,
    ) -> Result<Self> {
        let dim = metric.dim();
        if sampling_box.len() != dim {
            return Err(GeomError::DimensionMismatch {
                expected: dim,
                got: sampling_box.len(),
            });
        }
        for (c, &(lo, hi)) in sampling_box.iter().enumerate() {
            if lo >= hi || !lo.is_finite() || !hi.is_finite() {
                return Err(GeomError::validation(format!(
                    "sampling box for coordinate x{c} is empty or not finite"
                )));
            }
        }
        if conn.is_none() && conn_star.is_some() {
            return Err(GeomError::validation(
                "a conjugate connection was given without the primal connection",
            ));
        }
        for field in [&conn, &conn_star].into_iter().flatten() {
            if field.dim() != dim {
                return Err(GeomError::DimensionMismatch {
                    expected: dim,
                    got: field.dim(),
                });
            }
        }

        let chart = ChartManifold {
            dim,
            metric,
            conn,
            conn_star,
            sampling_box,
        };
        chart.validate_on_probes()?;
        Ok(chart)
    }

    /// Metric-only chart over the default box.
    pub fn from_metric(metric: MetricField<T>) -> Result<Self> {
        let dim = metric.dim();
        Self::new(metric, None, None, default_box(dim))
    }

    fn validate_on_probes(&self) -> Result<()> {
        let tol = real::<T>(1e-12);
        for p in probe_points(&self.sampling_box, PROBE_COUNT) {
            let g = self.metric.at(&p).map_err(|e| {
                GeomError::validation(format!("metric at probe point {p:?}: {e}"))
            })?;
            for j in 0..self.dim {
                for i in 0..=j {
                    if !g.get(i, j).is_finite() {
                        return Err(GeomError::validation(format!(
                            "metric entry g{i}{j} is not finite at probe point {p:?}"
                        )));
                    }
                }
            }
            check_nondegenerate(&g)?;

            for (field, label) in [(&self.conn, "conn"), (&self.conn_star, "conn_star")] {
                if let Some(field) = field {
                    let c = field.at(&p).map_err(|e| {
                        GeomError::validation(format!("{label} at probe point {p:?}: {e}"))
                    })?;
                    if !c.is_finite() {
                        return Err(GeomError::validation(format!(
                            "{label} coefficients are not finite at probe point {p:?}"
                        )));
                    }
                    if field.torsion_free() && c.torsion_max() > tol {
                        return Err(GeomError::validation(format!(
                            "{label} declared torsion-free but has torsion {:.3e} at {p:?}",
                            crate::scalar::to_f64(c.torsion_max())
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &MetricField<T> {
        &self.metric
    }

    pub fn sampling_box(&self) -> &[(T, T)] {
        &self.sampling_box
    }

    pub fn has_explicit_connection(&self) -> bool {
        self.conn.is_some()
    }

    pub fn explicit_connection(&self) -> Option<&ConnectionExprField<T>> {
        self.conn.as_ref()
    }

    pub fn explicit_conn_star(&self) -> Option<&ConnectionExprField<T>> {
        self.conn_star.as_ref()
    }

    /// Metric matrix at `p`; degenerate metrics are an error.
    pub fn metric_at(&self, p: &[T]) -> Result<SymMatrix<T>> {
        let g = self.metric.at(p).map_err(GeomError::Eval)?;
        check_nondegenerate(&g)?;
        Ok(g)
    }

    /// Inverse metric (cometric) matrix at `p`.
    pub fn cometric_at(&self, p: &[T]) -> Result<SymMatrix<T>> {
        self.metric.at(p).map_err(GeomError::Eval)?.inverse()
    }

    /// Musical isomorphism: raises the 1-form `alpha` to a vector.
    pub fn sharp(&self, p: &[T], alpha: &[T]) -> Result<Vec<T>> {
        let g = self.metric.at(p).map_err(GeomError::Eval)?;
        solve_sym(&g, alpha)
    }

    /// Musical isomorphism: lowers the vector `x` to a 1-form.
    pub fn flat(&self, p: &[T], x: &[T]) -> Result<Vec<T>> {
        Ok(self.metric.at(p).map_err(GeomError::Eval)?.mul_vec(x))
    }

    /// Christoffel symbols of the first kind,
    /// `gamma_{ij,k} = (d_j g_ik + d_i g_jk - d_k g_ij) / 2`,
    /// as a flat `[i][j][k]` array. Partials are symbolic.
    pub fn christoffel_first_kind(&self, p: &[T]) -> Result<Vec<T>> {
        let n = self.dim;
        let dg: Vec<SymMatrix<T>> = (0..n)
            .map(|k| self.metric.d_at(p, k).map_err(GeomError::Eval))
            .collect::<Result<_>>()?;
        let half = real::<T>(0.5);
        let mut out = vec![T::zero(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[(i * n + j) * n + k] =
                        half * (dg[j].get(i, k) + dg[i].get(j, k) - dg[k].get(i, j));
                }
            }
        }
        Ok(out)
    }

    /// Christoffel symbols of the second kind (the Levi-Civita connection).
    pub fn levi_civita_at(&self, p: &[T]) -> Result<ConnectionCoeffs<T>> {
        let n = self.dim;
        let g = self.metric.at(p).map_err(GeomError::Eval)?;
        let first = self.christoffel_first_kind(p)?;
        let mut out = ConnectionCoeffs::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let rhs: Vec<T> = (0..n).map(|k| first[(i * n + j) * n + k]).collect();
                let col = solve_sym(&g, &rhs)?;
                for k in 0..n {
                    out.set(k, i, j, col[k]);
                }
            }
        }
        Ok(out)
    }

    /// Conjugate connection of `gamma` with respect to the metric:
    /// for every (k, j) solves `sum_l g_il gamma*^l_{kj} = d_k g_ij - gamma_{ki,j}`.
    pub fn conjugate_at(&self, p: &[T], gamma: &ConnectionCoeffs<T>) -> Result<ConnectionCoeffs<T>> {
        let n = self.dim;
        let g = self.metric.at(p).map_err(GeomError::Eval)?;
        let dg: Vec<SymMatrix<T>> = (0..n)
            .map(|k| self.metric.d_at(p, k).map_err(GeomError::Eval))
            .collect::<Result<_>>()?;
        let mut out = ConnectionCoeffs::zeros(n);
        for k in 0..n {
            for j in 0..n {
                let rhs: Vec<T> = (0..n)
                    .map(|i| {
                        let lowered = (0..n)
                            .fold(T::zero(), |acc, m| acc + g.get(j, m) * gamma.get(m, k, i));
                        dg[k].get(i, j) - lowered
                    })
                    .collect();
                let col = solve_sym(&g, &rhs)?;
                for l in 0..n {
                    out.set(l, k, j, col[l]);
                }
            }
        }
        Ok(out)
    }

    /// The chart's connection pair at `p`: explicit expressions when given,
    /// otherwise the self-conjugate default `(LC, LC)`. An explicit primal
    /// connection without a star partner gets its conjugate derived.
    pub fn connection_pair_at(&self, p: &[T]) -> Result<(ConnectionCoeffs<T>, ConnectionCoeffs<T>)> {
        match (&self.conn, &self.conn_star) {
            (None, _) => {
                let lc = self.levi_civita_at(p)?;
                Ok((lc.clone(), lc))
            }
            (Some(c), Some(s)) => Ok((
                c.at(p).map_err(GeomError::Eval)?,
                s.at(p).map_err(GeomError::Eval)?,
            )),
            (Some(c), None) => {
                let gamma = c.at(p).map_err(GeomError::Eval)?;
                let star = self.conjugate_at(p, &gamma)?;
                Ok((gamma, star))
            }
        }
    }

    /// Riemannian gradient: sharp of the coordinate differential.
    pub fn gradient_at(&self, p: &[T], f: &ScalarField<T>) -> Result<Vec<T>> {
        let df = f.d_at(p).map_err(GeomError::Eval)?;
        self.sharp(p, &df)
    }

    /// Squared gradient norm `g(grad f, grad f)`.
    pub fn grad_norm_sq(&self, p: &[T], f: &ScalarField<T>) -> Result<T> {
        let df = f.d_at(p).map_err(GeomError::Eval)?;
        let grad = self.sharp(p, &df)?;
        Ok(dot(&df, &grad))
    }

    /// Connection Hessian `H_ij = d_i d_j f - sum_k gamma^k_{ij} d_k f`.
    /// Symmetric whenever the connection is torsion-free.
    pub fn hessian_at(
        &self,
        p: &[T],
        f: &ScalarField<T>,
        gamma: &ConnectionCoeffs<T>,
    ) -> Result<SymMatrix<T>> {
        let n = self.dim;
        let df = f.d_at(p).map_err(GeomError::Eval)?;
        let mut h = SymMatrix::zeros(n);
        for j in 0..n {
            for i in 0..=j {
                let dd = f.second_partial(i, j, p).map_err(GeomError::Eval)?;
                let correction = (0..n).fold(T::zero(), |acc, k| acc + gamma.get(k, i, j) * df[k]);
                h.set(i, j, dd - correction);
            }
        }
        Ok(h)
    }
}

/// A connection-coefficient field that can be evaluated and differentiated.
/// Expression-backed fields override the derivative symbolically; anything
/// else falls back to the central-difference stencil.
pub trait ConnField<T: Real> {
    fn dim(&self) -> usize;

    fn at(&self, p: &[T]) -> Result<ConnectionCoeffs<T>>;

    fn partial_at(&self, p: &[T], dir: usize, h: T) -> Result<ConnectionCoeffs<T>> {
        let mut fwd = p.to_vec();
        let mut bwd = p.to_vec();
        fwd[dir] += h;
        bwd[dir] -= h;
        let half_inv = (real::<T>(2.0) * h).recip();
        Ok(ConnectionCoeffs::affine(
            half_inv,
            &self.at(&fwd)?,
            -half_inv,
            &self.at(&bwd)?,
        ))
    }
}

/// Closure-backed connection field (numerically defined; FD partials).
pub struct FnConn<T, F> {
    dim: usize,
    f: F,
    _marker: std::marker::PhantomData<T>,
}

impl<T, F> FnConn<T, F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnConn {
            dim,
            f,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<T: Real, F: Fn(&[T]) -> Result<ConnectionCoeffs<T>>> ConnField<T> for FnConn<T, F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, p: &[T]) -> Result<ConnectionCoeffs<T>> {
        (self.f)(p)
    }
}

impl<T: Real> ConnField<T> for ConnectionExprField<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, p: &[T]) -> Result<ConnectionCoeffs<T>> {
        ConnectionExprField::at(self, p).map_err(GeomError::Eval)
    }

    fn partial_at(&self, p: &[T], dir: usize, _h: T) -> Result<ConnectionCoeffs<T>> {
        self.partial(p, dir).map_err(GeomError::Eval)
    }
}

/// Levi-Civita coefficients of a chart as a [`ConnField`] (FD partials).
pub struct LeviCivitaField<'a, T> {
    chart: &'a ChartManifold<T>,
}

impl<'a, T> LeviCivitaField<'a, T> {
    pub fn new(chart: &'a ChartManifold<T>) -> Self {
        LeviCivitaField { chart }
    }
}

impl<T: Real> ConnField<T> for LeviCivitaField<'_, T> {
    fn dim(&self) -> usize {
        self.chart.dim()
    }

    fn at(&self, p: &[T]) -> Result<ConnectionCoeffs<T>> {
        self.chart.levi_civita_at(p)
    }
}

/// The (1,3) curvature array `R^l_{ijk}` for the convention
/// `R(X, Y) Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X,Y]} Z`,
/// with `i` the X slot, `j` the Y slot and `k` the Z slot.
#[derive(Debug, Clone)]
pub struct Curvature<T> {
    dim: usize,
    r: Vec<T>,
}

impl<T: Real> Curvature<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> T {
        self.r[((l * self.dim + i) * self.dim + j) * self.dim + k]
    }

    /// `R(x, y) z` contracted on coordinate components.
    pub fn apply(&self, x: &[T], y: &[T], z: &[T]) -> Vec<T> {
        let n = self.dim;
        (0..n)
            .map(|l| {
                let mut acc = T::zero();
                for i in 0..n {
                    if x[i] == T::zero() {
                        continue;
                    }
                    for j in 0..n {
                        if y[j] == T::zero() {
                            continue;
                        }
                        for k in 0..n {
                            acc += self.get(l, i, j, k) * x[i] * y[j] * z[k];
                        }
                    }
                }
                acc
            })
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.r.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

/// Coordinate curvature of a connection field:
/// `R^l_{ijk} = d_i gamma^l_{jk} - d_j gamma^l_{ik}
///  + sum_m (gamma^m_{jk} gamma^l_{im} - gamma^m_{ik} gamma^l_{jm})`.
///
/// `h` is the step used when the field falls back to FD partials; pass
/// [`FD_STEP_CURVATURE`]-sized steps for numerically defined fields.
pub fn curvature_at<T: Real>(field: &dyn ConnField<T>, p: &[T], h: T) -> Result<Curvature<T>> {
    let n = field.dim();
    let gamma = field.at(p)?;
    let d_gamma: Vec<ConnectionCoeffs<T>> = (0..n)
        .map(|dir| field.partial_at(p, dir, h))
        .collect::<Result<_>>()?;
    let mut r = vec![T::zero(); n * n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = d_gamma[i].get(l, j, k) - d_gamma[j].get(l, i, k);
                    for m in 0..n {
                        v += gamma.get(m, j, k) * gamma.get(l, i, m)
                            - gamma.get(m, i, k) * gamma.get(l, j, m);
                    }
                    r[((l * n + i) * n + j) * n + k] = v;
                }
            }
        }
    }
    Ok(Curvature { dim: n, r })
}

/// Convenience wrapper using the default curvature FD step.
pub fn curvature_at_default<T: Real>(field: &dyn ConnField<T>, p: &[T]) -> Result<Curvature<T>> {
    curvature_at(field, p, real(FD_STEP_CURVATURE))
}

/// Sectional curvature of the 2-plane spanned by `x`, `y`:
/// `g(R(X,Y)Y, X) / (g(X,X) g(Y,Y) - g(X,Y)^2)`.
pub fn sectional_curvature<T: Real>(g: &SymMatrix<T>, r: &Curvature<T>, x: &[T], y: &[T]) -> T {
    let rxyy = r.apply(x, y, y);
    let num = g.inner(&rxyy, x);
    let den = g.inner(x, x) * g.inner(y, y) - g.inner(x, y) * g.inner(x, y);
    num / den
}
