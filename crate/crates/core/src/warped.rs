//! Generalized warped product scenes: both cross-term product metrics on
//! `M1 x M2`, the product/factor connection pairs they induce, the
//! B-correction tensors, vector-field reconstruction, and the closed-form
//! curvature blocks of the deformed-base metric.
//!
//! Conventions used throughout:
//! * product coordinates are base-then-fiber (see [`crate::product`]);
//! * `b1 = g1(grad f1, grad f1)` and `b2 = g2(grad f2, grad f2)` are the
//!   squared gradient norms of the warping functions on their factors;
//! * in the cross-term metric `G` the gradient entering the correction
//!   terms is the gradient with respect to `G` itself (`G^{-1} d(f_i)`),
//!   while the deformed-base metric's corrections carry explicit
//!   `1 + (c f2)^2 b1` denominators and use lifted factor gradients.
//!   Both readings are forced by the conjugacy identities the test suite
//!   verifies.

use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::manifold::{
    curvature_at, probe_points, ChartManifold, ConnField, ConnectionCoeffs, Curvature,
    LeviCivitaField, ScalarField, PROBE_COUNT,
};
use crate::product::{Factor, ProductChart};
use crate::scalar::{real, to_f64, Real};
use crate::tensor::{axpy, central_fd, dot, solve_sym, SymMatrix, FD_STEP_FIRST};

/// Positivity with NaN counted as a failure.
#[inline]
fn is_positive<T: Real>(v: T) -> bool {
    v > T::zero()
}

/// Which of the two product metrics an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductMetricKind {
    /// Cross-term metric: `f2^2 g1 (+) f1^2 g2` plus the symmetric
    /// off-diagonal block `c f1 f2 df1 (x) df2`.
    G,
    /// Deformed-base metric: `g1 + (c f2)^2 df1 (x) df1 (+) f1^2 g2`,
    /// block-diagonal.
    GTilde,
}

/// Which reading of the B-tensor's metric term to use. The plain factor
/// form is the one the conjugacy identities confirm; the scaled variant
/// divides the `g_i(X,Y)` term by the opposite warping value and exists
/// for the `--diagnostic` comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BReading {
    FactorLevel,
    ScaledMetricTerm,
}

/// Result of the admissibility evaluation `value = c^2 b1 b2`.
#[derive(Debug, Clone, Copy)]
pub struct MetricCondition<T> {
    pub value: T,
    pub admissible: bool,
}

/// Largest covariant-derivative component of each factor gradient under
/// each of the four factor connections, probed on the sampling boxes.
#[derive(Debug, Clone, Copy)]
pub struct ParallelGradientProbe {
    pub base_primal: f64,
    pub base_star: f64,
    pub fiber_primal: f64,
    pub fiber_star: f64,
}

impl ParallelGradientProbe {
    pub const TOLERANCE: f64 = 1e-8;

    pub fn all_parallel(&self) -> bool {
        self.base_primal <= Self::TOLERANCE
            && self.base_star <= Self::TOLERANCE
            && self.fiber_primal <= Self::TOLERANCE
            && self.fiber_star <= Self::TOLERANCE
    }
}

/// Closed-form curvature blocks of the deformed-base metric, named by the
/// lift pattern of the three inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtildeBlock {
    /// All-horizontal: equals the lifted base curvature.
    BaseBaseBase,
    /// All-vertical: fiber curvature plus wedge corrections.
    FiberFiberFiber,
    /// Horizontal pair acting on a vertical vector: identically zero.
    BaseBaseFiber,
    /// Mixed `R(X1^h, Y2^v) Z1^h`.
    BaseFiberBase,
}

/// Everything the block formulas need at one `(p, q)` pair.
struct PointData<T> {
    f1v: T,
    f2v: T,
    df1: Vec<T>,
    df2: Vec<T>,
    grad1: Vec<T>,
    grad2: Vec<T>,
    b1: T,
    b2: T,
    g1: SymMatrix<T>,
    g2: SymMatrix<T>,
}

/// Two factor charts, a warping function on each, and the cross-term
/// constant `c`. Owns both product metrics and the product connections.
#[derive(Debug, Clone)]
pub struct WarpedProductScene<T> {
    chart: ProductChart<T>,
    f1: ScalarField<T>,
    f2: ScalarField<T>,
    c: T,
}

impl<T: Real> WarpedProductScene<T> {
    pub fn new(
        base: ChartManifold<T>,
        fiber: ChartManifold<T>,
        f1: ScalarExpr<T>,
        f2: ScalarExpr<T>,
        c: T,
    ) -> Result<Self> {
        if f1.arity() != base.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: base.dim(),
                got: f1.arity(),
            });
        }
        if f2.arity() != fiber.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: fiber.dim(),
                got: f2.arity(),
            });
        }
        let scene = WarpedProductScene {
            chart: ProductChart::new(base, fiber),
            f1: ScalarField::new(f1),
            f2: ScalarField::new(f2),
            c,
        };
        scene.validate_on_probes()?;
        Ok(scene)
    }

    fn validate_on_probes(&self) -> Result<()> {
        for (which, f, label) in [
            (Factor::Base, &self.f1, "f1"),
            (Factor::Fiber, &self.f2, "f2"),
        ] {
            let chart = self.chart.factor(which);
            for p in probe_points(chart.sampling_box(), PROBE_COUNT) {
                let v = f.value(&p).map_err(|e| {
                    GeomError::validation(format!("{label} at probe point {p:?}: {e}"))
                })?;
                if !is_positive(v) || !v.is_finite() {
                    return Err(GeomError::validation(format!(
                        "warping function {label} is not positive at probe point {p:?} (value {v})"
                    )));
                }
                let b = chart.grad_norm_sq(&p, f).map_err(|e| {
                    GeomError::validation(format!("{label} gradient at probe point {p:?}: {e}"))
                })?;
                if !b.is_finite() {
                    return Err(GeomError::validation(format!(
                        "squared gradient norm of {label} is not finite at probe point {p:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn chart(&self) -> &ProductChart<T> {
        &self.chart
    }

    pub fn base(&self) -> &ChartManifold<T> {
        self.chart.base()
    }

    pub fn fiber(&self) -> &ChartManifold<T> {
        self.chart.fiber()
    }

    pub fn f1(&self) -> &ScalarField<T> {
        &self.f1
    }

    pub fn f2(&self) -> &ScalarField<T> {
        &self.f2
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn m1(&self) -> usize {
        self.chart.m1()
    }

    pub fn m2(&self) -> usize {
        self.chart.m2()
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    fn point_data(&self, p: &[T], q: &[T]) -> Result<PointData<T>> {
        let f1v = self.f1.value(p).map_err(GeomError::Eval)?;
        let f2v = self.f2.value(q).map_err(GeomError::Eval)?;
        if !is_positive(f1v) || !is_positive(f2v) {
            return Err(GeomError::validation(format!(
                "warping functions must stay positive; got f1 = {f1v}, f2 = {f2v}"
            )));
        }
        let df1 = self.f1.d_at(p).map_err(GeomError::Eval)?;
        let df2 = self.f2.d_at(q).map_err(GeomError::Eval)?;
        let g1 = self.base().metric_at(p)?;
        let g2 = self.fiber().metric_at(q)?;
        let grad1 = solve_sym(&g1, &df1)?;
        let grad2 = solve_sym(&g2, &df2)?;
        let b1 = dot(&df1, &grad1);
        let b2 = dot(&df2, &grad2);
        Ok(PointData {
            f1v,
            f2v,
            df1,
            df2,
            grad1,
            grad2,
            b1,
            b2,
            g1,
            g2,
        })
    }

    /// Squared gradient norm `b1` of `f1` at a base point.
    pub fn b1_at(&self, p: &[T]) -> Result<T> {
        self.base().grad_norm_sq(p, &self.f1)
    }

    /// Squared gradient norm `b2` of `f2` at a fiber point.
    pub fn b2_at(&self, q: &[T]) -> Result<T> {
        self.fiber().grad_norm_sq(q, &self.f2)
    }

    /// The cross-term product metric at `(p, q)`: base block `f2^2 g1`,
    /// fiber block `f1^2 g2`, off-diagonal `c f1 f2 df1 (x) df2`.
    pub fn assemble_g(&self, p: &[T], q: &[T]) -> Result<SymMatrix<T>> {
        let d = self.point_data(p, q)?;
        let (m1, m2) = (self.m1(), self.m2());
        let mut g = SymMatrix::zeros(m1 + m2);
        for a in 0..m1 {
            for b in a..m1 {
                g.set(a, b, d.f2v * d.f2v * d.g1.get(a, b));
            }
        }
        for al in 0..m2 {
            for be in al..m2 {
                g.set(m1 + al, m1 + be, d.f1v * d.f1v * d.g2.get(al, be));
            }
        }
        let cf = self.c * d.f1v * d.f2v;
        for a in 0..m1 {
            for be in 0..m2 {
                g.set(a, m1 + be, cf * d.df1[a] * d.df2[be]);
            }
        }
        Ok(g)
    }

    /// The deformed-base product metric at `(p, q)`: base block
    /// `g1 + (c f2)^2 df1 (x) df1`, fiber block `f1^2 g2`, mixed block zero.
    pub fn assemble_gtilde(&self, p: &[T], q: &[T]) -> Result<SymMatrix<T>> {
        let d = self.point_data(p, q)?;
        let (m1, m2) = (self.m1(), self.m2());
        let cf2_sq = (self.c * d.f2v) * (self.c * d.f2v);
        let mut g = SymMatrix::zeros(m1 + m2);
        for a in 0..m1 {
            for b in a..m1 {
                g.set(a, b, d.g1.get(a, b) + cf2_sq * d.df1[a] * d.df1[b]);
            }
        }
        for al in 0..m2 {
            for be in al..m2 {
                g.set(m1 + al, m1 + be, d.f1v * d.f1v * d.g2.get(al, be));
            }
        }
        Ok(g)
    }

    pub fn assemble(&self, kind: ProductMetricKind, p: &[T], q: &[T]) -> Result<SymMatrix<T>> {
        match kind {
            ProductMetricKind::G => self.assemble_g(p, q),
            ProductMetricKind::GTilde => self.assemble_gtilde(p, q),
        }
    }

    /// `value = c^2 b1(p) b2(q)`; the cross-term metric is Riemannian at
    /// `(p, q)` iff `0 <= value < 1`.
    pub fn metric_condition(&self, p: &[T], q: &[T]) -> Result<MetricCondition<T>> {
        let d = self.point_data(p, q)?;
        let value = self.c * self.c * d.b1 * d.b2;
        Ok(MetricCondition {
            value,
            admissible: value >= T::zero() && value < T::one(),
        })
    }

    /// The correction tensor
    /// `B_f(X,Y) = c f H^f(X,Y) + c X(f) Y(f) - g(X,Y)`
    /// on the chosen factor, with the Hessian taken with respect to that
    /// factor's primal (or, for `star`, conjugate) connection.
    pub fn b_tensor(
        &self,
        side: Factor,
        star: bool,
        x: &[T],
        y: &[T],
        point: &[T],
    ) -> Result<T> {
        let chart = self.chart.factor(side);
        let f = match side {
            Factor::Base => &self.f1,
            Factor::Fiber => &self.f2,
        };
        let (gamma, gamma_star) = chart.connection_pair_at(point)?;
        let conn = if star { &gamma_star } else { &gamma };
        let fv = f.value(point).map_err(GeomError::Eval)?;
        let df = f.d_at(point).map_err(GeomError::Eval)?;
        let g = chart.metric_at(point)?;
        let h = hessian_contract(chart.dim(), f, conn, &df, x, y, point)?;
        Ok(self.c * fv * h + self.c * dot(x, &df) * dot(y, &df) - g.inner(x, y))
    }

    /// Gradient of the lifted warping function with respect to the
    /// cross-term metric: `G^{-1} d(f_i^I)` in product coordinates.
    pub fn cross_metric_gradient(&self, which: Factor, p: &[T], q: &[T]) -> Result<Vec<T>> {
        let d = self.point_data(p, q)?;
        let g = self.assemble_g(p, q)?;
        let rhs = match which {
            Factor::Base => self.chart.embed(Factor::Base, &d.df1),
            Factor::Fiber => self.chart.embed(Factor::Fiber, &d.df2),
        };
        solve_sym(&g, &rhs)
    }

    /// Product connection pair coefficients for the cross-term metric,
    /// assembled from the four coordinate-lift block cases.
    pub fn product_connection_g(&self, star: bool, p: &[T], q: &[T]) -> Result<ConnectionCoeffs<T>> {
        self.product_connection_g_with(star, BReading::FactorLevel, p, q)
    }

    /// As [`Self::product_connection_g`], but with a selectable B-tensor
    /// reading (for the diagnostic comparison).
    pub fn product_connection_g_with(
        &self,
        star: bool,
        reading: BReading,
        p: &[T],
        q: &[T],
    ) -> Result<ConnectionCoeffs<T>> {
        let cond = self.metric_condition(p, q)?;
        if !cond.admissible {
            return Err(GeomError::InadmissibleMetric {
                value: to_f64(cond.value),
            });
        }
        let d = self.point_data(p, q)?;
        let (m1, m2) = (self.m1(), self.m2());
        let dim = m1 + m2;
        let c = self.c;

        let (gamma1, gamma1_star) = self.base().connection_pair_at(p)?;
        let (gamma2, gamma2_star) = self.fiber().connection_pair_at(q)?;
        let conn1 = if star { &gamma1_star } else { &gamma1 };
        let conn2 = if star { &gamma2_star } else { &gamma2 };

        // grad_G of the lifted warping functions; this is where the
        // 1/(1 - c^2 b1 b2) of the expanded form lives.
        let g_product = self.assemble_g(p, q)?;
        let grad_f1h = solve_sym(&g_product, &self.chart.embed(Factor::Base, &d.df1))?;
        let grad_f2v = solve_sym(&g_product, &self.chart.embed(Factor::Fiber, &d.df2))?;

        let mut out = ConnectionCoeffs::zeros(dim);

        // Base-base block.
        for a in 0..m1 {
            for b in 0..m1 {
                for k in 0..m1 {
                    out.add_to(k, a, b, conn1.get(k, a, b));
                }
                let h = hessian_entry(&self.f1, conn1, &d.df1, a, b, p)?;
                let mut bt = c * d.f1v * h + c * d.df1[a] * d.df1[b] - d.g1.get(a, b);
                if reading == BReading::ScaledMetricTerm {
                    bt += d.g1.get(a, b) - d.g1.get(a, b) / d.f2v;
                }
                let coef = d.f2v * bt;
                for k in 0..dim {
                    out.add_to(k, a, b, coef * grad_f2v[k]);
                }
            }
        }

        // Fiber-fiber block.
        for al in 0..m2 {
            for be in 0..m2 {
                for k in 0..m2 {
                    out.add_to(m1 + k, m1 + al, m1 + be, conn2.get(k, al, be));
                }
                let h = hessian_entry(&self.f2, conn2, &d.df2, al, be, q)?;
                let mut bt = c * d.f2v * h + c * d.df2[al] * d.df2[be] - d.g2.get(al, be);
                if reading == BReading::ScaledMetricTerm {
                    bt += d.g2.get(al, be) - d.g2.get(al, be) / d.f1v;
                }
                let coef = d.f1v * bt;
                for k in 0..dim {
                    out.add_to(k, m1 + al, m1 + be, coef * grad_f1h[k]);
                }
            }
        }

        // Mixed block; identical for the primal and conjugate connections,
        // and symmetric in the two lower slots by construction.
        for a in 0..m1 {
            for be in 0..m2 {
                let mut w = vec![T::zero(); dim];
                let s = -c * d.df1[a] * d.df2[be];
                axpy(&mut w, s * d.f2v, &grad_f1h);
                axpy(&mut w, s * d.f1v, &grad_f2v);
                w[a] += d.df2[be] / d.f2v;
                w[m1 + be] += d.df1[a] / d.f1v;
                for k in 0..dim {
                    out.add_to(k, a, m1 + be, w[k]);
                    out.add_to(k, m1 + be, a, w[k]);
                }
            }
        }

        Ok(out)
    }

    /// Product connection pair coefficients for the deformed-base metric.
    pub fn product_connection_gtilde(
        &self,
        star: bool,
        p: &[T],
        q: &[T],
    ) -> Result<ConnectionCoeffs<T>> {
        let d = self.point_data(p, q)?;
        let (m1, m2) = (self.m1(), self.m2());
        let dim = m1 + m2;
        let c = self.c;
        let cf2_sq = (c * d.f2v) * (c * d.f2v);
        let denom = T::one() + cf2_sq * d.b1;

        let (gamma1, gamma1_star) = self.base().connection_pair_at(p)?;
        let (gamma2, gamma2_star) = self.fiber().connection_pair_at(q)?;
        let conn1 = if star { &gamma1_star } else { &gamma1 };
        let conn2 = if star { &gamma2_star } else { &gamma2 };

        let mut out = ConnectionCoeffs::zeros(dim);

        // Base-base: lifted factor term, a base-gradient Hessian correction
        // with the 1 + (c f2)^2 b1 denominator, and a fiber-gradient term.
        for a in 0..m1 {
            for b in 0..m1 {
                for k in 0..m1 {
                    out.add_to(k, a, b, conn1.get(k, a, b));
                }
                let h = hessian_entry(&self.f1, conn1, &d.df1, a, b, p)?;
                let coef1 = cf2_sq * h / denom;
                for k in 0..m1 {
                    out.add_to(k, a, b, coef1 * d.grad1[k]);
                }
                let coef2 = -(c * c) * d.f2v * (d.df1[a] / d.f1v) * (d.df1[b] / d.f1v);
                for k in 0..m2 {
                    out.add_to(m1 + k, a, b, coef2 * d.grad2[k]);
                }
            }
        }

        // Fiber-fiber.
        for al in 0..m2 {
            for be in 0..m2 {
                for k in 0..m2 {
                    out.add_to(m1 + k, m1 + al, m1 + be, conn2.get(k, al, be));
                }
                let coef = -d.f1v * d.g2.get(al, be) / denom;
                for k in 0..m1 {
                    out.add_to(k, m1 + al, m1 + be, coef * d.grad1[k]);
                }
            }
        }

        // Mixed block, shared by primal and conjugate.
        for a in 0..m1 {
            for be in 0..m2 {
                let coef = c * c * d.f2v * d.df2[be] * d.df1[a] / denom;
                let vert = d.df1[a] / d.f1v;
                for k in 0..m1 {
                    let v = coef * d.grad1[k];
                    out.add_to(k, a, m1 + be, v);
                    out.add_to(k, m1 + be, a, v);
                }
                out.add_to(m1 + be, a, m1 + be, vert);
                out.add_to(m1 + be, m1 + be, a, vert);
            }
        }

        Ok(out)
    }

    pub fn product_connection(
        &self,
        kind: ProductMetricKind,
        star: bool,
        p: &[T],
        q: &[T],
    ) -> Result<ConnectionCoeffs<T>> {
        match kind {
            ProductMetricKind::G => self.product_connection_g(star, p, q),
            ProductMetricKind::GTilde => self.product_connection_gtilde(star, p, q),
        }
    }

    /// Recovers a factor connection from a product connection by projecting
    /// the same-lift block and undoing its gradient correction. When the
    /// product connection came from the matching constructor built on
    /// `(gamma^i, gamma*^i)`, the round trip reproduces the inputs.
    pub fn factor_connection_from_product(
        &self,
        kind: ProductMetricKind,
        which: Factor,
        product_conn: &ConnectionCoeffs<T>,
        p: &[T],
        q: &[T],
    ) -> Result<ConnectionCoeffs<T>> {
        let d = self.point_data(p, q)?;
        let (m1, m2) = (self.m1(), self.m2());
        let c = self.c;
        match (kind, which) {
            (ProductMetricKind::G, Factor::Base) => {
                let mut out = ConnectionCoeffs::zeros(m1);
                for a in 0..m1 {
                    for b in 0..m1 {
                        // W(f2^v): the vertical block acting on the lifted f2.
                        let wf2 = (0..m2)
                            .fold(T::zero(), |acc, be| {
                                acc + product_conn.get(m1 + be, a, b) * d.df2[be]
                            });
                        let corr = c * (d.f1v / d.f2v) * wf2;
                        for k in 0..m1 {
                            out.set(k, a, b, product_conn.get(k, a, b) + corr * d.grad1[k]);
                        }
                    }
                }
                Ok(out)
            }
            (ProductMetricKind::G, Factor::Fiber) => {
                let mut out = ConnectionCoeffs::zeros(m2);
                for al in 0..m2 {
                    for be in 0..m2 {
                        let wf1 = (0..m1).fold(T::zero(), |acc, a| {
                            acc + product_conn.get(a, m1 + al, m1 + be) * d.df1[a]
                        });
                        let corr = c * (d.f2v / d.f1v) * wf1;
                        for k in 0..m2 {
                            out.set(
                                k,
                                al,
                                be,
                                product_conn.get(m1 + k, m1 + al, m1 + be) + corr * d.grad2[k],
                            );
                        }
                    }
                }
                Ok(out)
            }
            (ProductMetricKind::GTilde, Factor::Base) => {
                let cf2_sq = (c * d.f2v) * (c * d.f2v);
                let mut out = ConnectionCoeffs::zeros(m1);
                for a in 0..m1 {
                    for b in 0..m1 {
                        // Hessian of the lifted f1 with respect to the
                        // product connection itself.
                        let wf1 = (0..m1).fold(T::zero(), |acc, k| {
                            acc + product_conn.get(k, a, b) * d.df1[k]
                        });
                        let ddf1 = self
                            .f1
                            .second_partial(a, b, p)
                            .map_err(GeomError::Eval)?;
                        let h_lift = ddf1 - wf1;
                        for k in 0..m1 {
                            out.set(
                                k,
                                a,
                                b,
                                product_conn.get(k, a, b) - cf2_sq * h_lift * d.grad1[k],
                            );
                        }
                    }
                }
                Ok(out)
            }
            (ProductMetricKind::GTilde, Factor::Fiber) => {
                let mut out = ConnectionCoeffs::zeros(m2);
                for al in 0..m2 {
                    for be in 0..m2 {
                        for k in 0..m2 {
                            out.set(k, al, be, product_conn.get(m1 + k, m1 + al, m1 + be));
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Rebuilds the product vector determined by its cross-term inner
    /// products against horizontal and vertical lifts:
    /// `X = phi2 X1^h + psi1 Y2^v
    ///    + c f1 f2 {psi2 Y1(f1) - phi2 X1(f1)} grad_G(f2^v)
    ///    - c f1 f2 {psi1 Y2(f2) - phi1 X2(f2)} grad_G(f1^h)`.
    #[allow(clippy::too_many_arguments)]
    pub fn reconstruct_x(
        &self,
        phi1: T,
        phi2: T,
        psi1: T,
        psi2: T,
        x1: &[T],
        y1: &[T],
        x2: &[T],
        y2: &[T],
        p: &[T],
        q: &[T],
    ) -> Result<Vec<T>> {
        let cond = self.metric_condition(p, q)?;
        if !cond.admissible {
            return Err(GeomError::InadmissibleMetric {
                value: to_f64(cond.value),
            });
        }
        let d = self.point_data(p, q)?;
        let g_product = self.assemble_g(p, q)?;
        let grad_f1h = solve_sym(&g_product, &self.chart.embed(Factor::Base, &d.df1))?;
        let grad_f2v = solve_sym(&g_product, &self.chart.embed(Factor::Fiber, &d.df2))?;

        let cf = self.c * d.f1v * d.f2v;
        let brace_h = cf * (psi2 * dot(y1, &d.df1) - phi2 * dot(x1, &d.df1));
        let brace_v = cf * (psi1 * dot(y2, &d.df2) - phi1 * dot(x2, &d.df2));

        let mut out = vec![T::zero(); self.dim()];
        axpy(&mut out[..self.m1()], phi2, x1);
        axpy(&mut out[self.m1()..], psi1, y2);
        axpy(&mut out, brace_h, &grad_f2v);
        axpy(&mut out, -brace_v, &grad_f1h);
        Ok(out)
    }

    /// Probes whether each factor gradient is parallel under the factor's
    /// primal and conjugate connections (covariant-derivative components
    /// checked against [`ParallelGradientProbe::TOLERANCE`]).
    pub fn parallel_gradient_probe(&self) -> Result<ParallelGradientProbe> {
        let h = real::<T>(FD_STEP_FIRST);
        let mut results = [0.0f64; 4];
        for (slot, which, f) in [
            (0usize, Factor::Base, &self.f1),
            (2usize, Factor::Fiber, &self.f2),
        ] {
            let chart = self.chart.factor(which);
            let n = chart.dim();
            for point in probe_points(chart.sampling_box(), PROBE_COUNT) {
                let (gamma, gamma_star) = chart.connection_pair_at(&point)?;
                let grad = chart.gradient_at(&point, f)?;
                // FD of the gradient field components.
                let mut dgrad = vec![T::zero(); n * n];
                for a in 0..n {
                    for k in 0..n {
                        dgrad[a * n + k] = central_fd(
                            |pt: &[T]| chart.gradient_at(pt, f).map(|g| g[k]),
                            &point,
                            a,
                            h,
                        )?;
                    }
                }
                for (offset, conn) in [(0usize, &gamma), (1usize, &gamma_star)] {
                    let mut worst = T::zero();
                    for a in 0..n {
                        for k in 0..n {
                            let cov = dgrad[a * n + k]
                                + (0..n).fold(T::zero(), |acc, b| {
                                    acc + conn.get(k, a, b) * grad[b]
                                });
                            worst = worst.max(cov.abs());
                        }
                    }
                    results[slot + offset] = results[slot + offset].max(to_f64(worst));
                }
            }
        }
        Ok(ParallelGradientProbe {
            base_primal: results[0],
            base_star: results[1],
            fiber_primal: results[2],
            fiber_star: results[3],
        })
    }

    /// Curvature of a factor's primal connection at a factor point
    /// (symbolic partials when the connection is expression-backed,
    /// FD otherwise).
    pub fn factor_curvature(&self, which: Factor, point: &[T], h: T) -> Result<Curvature<T>> {
        let chart = self.chart.factor(which);
        match chart.explicit_connection() {
            Some(field) => curvature_at(field, point, h),
            None => curvature_at(&LeviCivitaField::new(chart), point, h),
        }
    }

    /// Closed-form curvature block of the deformed-base metric. The three
    /// inputs are factor vectors whose membership is fixed by `block`
    /// (`BaseFiberBase` takes `v1` on the base, `v2` on the fiber, `v3` on
    /// the base, and so on). Requires all four parallel-gradient probes
    /// to pass; refuses rather than extrapolates otherwise.
    #[allow(clippy::too_many_arguments)]
    pub fn closed_form_curvature_gtilde(
        &self,
        block: GtildeBlock,
        v1: &[T],
        v2: &[T],
        v3: &[T],
        p: &[T],
        q: &[T],
        fd_h: T,
    ) -> Result<Vec<T>> {
        let probe = self.parallel_gradient_probe()?;
        if !probe.all_parallel() {
            return Err(GeomError::precondition(format!(
                "factor gradients are not parallel (covariant components: \
                 base {:.2e}/{:.2e}, fiber {:.2e}/{:.2e}; tolerance {:.0e})",
                probe.base_primal,
                probe.base_star,
                probe.fiber_primal,
                probe.fiber_star,
                ParallelGradientProbe::TOLERANCE,
            )));
        }
        self.closed_form_curvature_gtilde_unchecked(block, v1, v2, v3, p, q, fd_h)
    }

    /// Same as [`Self::closed_form_curvature_gtilde`] but assumes the
    /// parallel-gradient probe already passed (suites probe once and then
    /// evaluate many blocks).
    #[allow(clippy::too_many_arguments)]
    pub fn closed_form_curvature_gtilde_unchecked(
        &self,
        block: GtildeBlock,
        v1: &[T],
        v2: &[T],
        v3: &[T],
        p: &[T],
        q: &[T],
        fd_h: T,
    ) -> Result<Vec<T>> {
        let d = self.point_data(p, q)?;
        let c = self.c;
        let cf2_sq = (c * d.f2v) * (c * d.f2v);
        let denom = T::one() + cf2_sq * d.b1;
        match block {
            GtildeBlock::BaseBaseBase => {
                let r1 = self.factor_curvature(Factor::Base, p, fd_h)?;
                Ok(self.chart.embed(Factor::Base, &r1.apply(v1, v2, v3)))
            }
            GtildeBlock::FiberFiberFiber => {
                let r2 = self.factor_curvature(Factor::Fiber, q, fd_h)?;
                let mut fiber_part = r2.apply(v1, v2, v3);
                // (X2 wedge Y2) Z2 = g2(Y2,Z2) X2 - g2(X2,Z2) Y2.
                let wy = d.g2.inner(v2, v3);
                let wx = d.g2.inner(v1, v3);
                let mut wedge = vec![T::zero(); self.m2()];
                axpy(&mut wedge, wy, v1);
                axpy(&mut wedge, -wx, v2);
                axpy(&mut fiber_part, -(d.b1 / denom), &wedge);
                let mut out = self.chart.embed(Factor::Fiber, &fiber_part);
                let wedge_f2 = dot(&wedge, &d.df2);
                let coef = c * c * d.f1v * d.f2v * d.b1 / (denom * denom) * wedge_f2;
                axpy(
                    &mut out[..self.m1()],
                    coef,
                    &d.grad1,
                );
                Ok(out)
            }
            GtildeBlock::BaseBaseFiber => Ok(vec![T::zero(); self.dim()]),
            GtildeBlock::BaseFiberBase => {
                let coef = c * c * (dot(v1, &d.df1) / d.f1v) * (dot(v3, &d.df1) / d.f1v)
                    * dot(v2, &d.df2)
                    / denom;
                let mut out = vec![T::zero(); self.dim()];
                axpy(&mut out[self.m1()..], coef, &d.grad2);
                Ok(out)
            }
        }
    }

    /// The constant sectional curvature a dually flat product forces on
    /// the fiber: `b1 / (1 + (c f2)^2 b1)`.
    pub fn fiber_curvature_constant(&self, p: &[T], q: &[T]) -> Result<T> {
        let d = self.point_data(p, q)?;
        let cf2_sq = (self.c * d.f2v) * (self.c * d.f2v);
        Ok(d.b1 / (T::one() + cf2_sq * d.b1))
    }
}

/// One Hessian entry `H_ab = d_a d_b f - sum_k gamma^k_{ab} d_k f`,
/// valid for torsion-full connections too (no symmetric storage).
fn hessian_entry<T: Real>(
    f: &ScalarField<T>,
    gamma: &ConnectionCoeffs<T>,
    df: &[T],
    a: usize,
    b: usize,
    point: &[T],
) -> Result<T> {
    let dd = f.second_partial(a, b, point).map_err(GeomError::Eval)?;
    let corr = (0..df.len()).fold(T::zero(), |acc, k| acc + gamma.get(k, a, b) * df[k]);
    Ok(dd - corr)
}

fn hessian_contract<T: Real>(
    n: usize,
    f: &ScalarField<T>,
    gamma: &ConnectionCoeffs<T>,
    df: &[T],
    x: &[T],
    y: &[T],
    point: &[T],
) -> Result<T> {
    let mut acc = T::zero();
    for a in 0..n {
        if x[a] == T::zero() {
            continue;
        }
        for b in 0..n {
            if y[b] == T::zero() {
                continue;
            }
            acc += x[a] * y[b] * hessian_entry(f, gamma, df, a, b, point)?;
        }
    }
    Ok(acc)
}

/// Connection field adapter for a product connection (closure over the
/// scene), used by the numerical-curvature oracles.
pub fn product_conn_field<'a, T: Real>(
    scene: &'a WarpedProductScene<T>,
    kind: ProductMetricKind,
    star: bool,
) -> impl ConnField<T> + 'a {
    crate::manifold::FnConn::new(scene.dim(), move |pt: &[T]| {
        let (p, q) = scene.chart().split(pt);
        scene.product_connection(kind, star, p, q)
    })
}
