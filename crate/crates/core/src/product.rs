//! The product chart `M1 x M2`: horizontal/vertical lifts of functions,
//! vector fields and 1-forms, plus pull-back connection evaluation.
//!
//! Product coordinates are base-then-fiber, fixed globally: the chart on
//! `M1 x M2` is `(x0..x(m1-1), x(m1)..x(m1+m2-1))`, the second block being
//! the fiber's own coordinates shifted by `m1`.

use crate::error::{GeomError, Result};
use crate::expr::{EvalError, ScalarExpr};
use crate::manifold::{ChartManifold, ConnectionCoeffs};
use crate::scalar::{real, Real};
use crate::tensor::central_fd;

/// Which factor a lift comes from: `Base` lifts are horizontal, `Fiber`
/// lifts are vertical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Base,
    Fiber,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::Base => Factor::Fiber,
            Factor::Fiber => Factor::Base,
        }
    }
}

/// A vector field with expression components (used both on factors and on
/// the product).
#[derive(Debug, Clone)]
pub struct ExprVectorField<T> {
    dim: usize,
    components: Vec<ScalarExpr<T>>,
}

impl<T: Real> ExprVectorField<T> {
    pub fn new(components: Vec<ScalarExpr<T>>) -> Result<Self> {
        let dim = components.len();
        for c in &components {
            if c.arity() != dim {
                return Err(GeomError::DimensionMismatch {
                    expected: dim,
                    got: c.arity(),
                });
            }
        }
        Ok(ExprVectorField { dim, components })
    }

    /// The coordinate field `d/dx<index>`.
    pub fn coordinate(dim: usize, index: usize) -> Self {
        let components = (0..dim)
            .map(|k| {
                ScalarExpr::constant(dim, if k == index { T::one() } else { T::zero() })
            })
            .collect();
        ExprVectorField { dim, components }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, k: usize) -> &ScalarExpr<T> {
        &self.components[k]
    }

    pub fn at(&self, p: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        self.components.iter().map(|c| c.evaluate(p)).collect()
    }

    /// Directional derivative `X(f) = sum_a X^a d_a f` at `p`, symbolic.
    pub fn apply_to(&self, f: &ScalarExpr<T>, p: &[T]) -> std::result::Result<T, EvalError> {
        let x = self.at(p)?;
        let mut acc = T::zero();
        for (a, &xa) in x.iter().enumerate() {
            if xa != T::zero() {
                acc += xa * f.differentiate(a).evaluate(p)?;
            }
        }
        Ok(acc)
    }
}

/// A 1-form with expression components.
#[derive(Debug, Clone)]
pub struct ExprOneForm<T> {
    dim: usize,
    components: Vec<ScalarExpr<T>>,
}

impl<T: Real> ExprOneForm<T> {
    pub fn new(components: Vec<ScalarExpr<T>>) -> Result<Self> {
        let dim = components.len();
        for c in &components {
            if c.arity() != dim {
                return Err(GeomError::DimensionMismatch {
                    expected: dim,
                    got: c.arity(),
                });
            }
        }
        Ok(ExprOneForm { dim, components })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, p: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        self.components.iter().map(|c| c.evaluate(p)).collect()
    }

    /// Pairing `alpha(X)` at `p`.
    pub fn pair(&self, x: &[T], p: &[T]) -> std::result::Result<T, EvalError> {
        let a = self.at(p)?;
        Ok(crate::tensor::dot(&a, x))
    }
}

/// A horizontal or vertical lift of a factor vector field, kept together
/// with its block-embedded product-chart form.
#[derive(Debug, Clone)]
pub struct LiftedVectorField<T> {
    pub kind: Factor,
    pub factor_field: ExprVectorField<T>,
    product_field: ExprVectorField<T>,
}

impl<T: Real> LiftedVectorField<T> {
    pub fn product_field(&self) -> &ExprVectorField<T> {
        &self.product_field
    }

    pub fn at(&self, product_point: &[T]) -> std::result::Result<Vec<T>, EvalError> {
        self.product_field.at(product_point)
    }
}

/// A product chart assembled from two factor charts.
#[derive(Debug, Clone)]
pub struct ProductChart<T> {
    base: ChartManifold<T>,
    fiber: ChartManifold<T>,
}

impl<T: Real> ProductChart<T> {
    pub fn new(base: ChartManifold<T>, fiber: ChartManifold<T>) -> Self {
        ProductChart { base, fiber }
    }

    pub fn base(&self) -> &ChartManifold<T> {
        &self.base
    }

    pub fn fiber(&self) -> &ChartManifold<T> {
        &self.fiber
    }

    pub fn factor(&self, which: Factor) -> &ChartManifold<T> {
        match which {
            Factor::Base => &self.base,
            Factor::Fiber => &self.fiber,
        }
    }

    pub fn m1(&self) -> usize {
        self.base.dim()
    }

    pub fn m2(&self) -> usize {
        self.fiber.dim()
    }

    pub fn dim(&self) -> usize {
        self.m1() + self.m2()
    }

    /// Splits a product point into its `(base, fiber)` parts; the inverse
    /// of [`ProductChart::join`].
    pub fn split<'p>(&self, p: &'p [T]) -> (&'p [T], &'p [T]) {
        assert_eq!(p.len(), self.dim());
        p.split_at(self.m1())
    }

    pub fn join(&self, p: &[T], q: &[T]) -> Vec<T> {
        assert_eq!(p.len(), self.m1());
        assert_eq!(q.len(), self.m2());
        let mut out = Vec::with_capacity(self.dim());
        out.extend_from_slice(p);
        out.extend_from_slice(q);
        out
    }

    /// Concatenated sampling box of both factors.
    pub fn sampling_box(&self) -> Vec<(T, T)> {
        let mut b = self.base.sampling_box().to_vec();
        b.extend_from_slice(self.fiber.sampling_box());
        b
    }

    /// Projection `d pi_i` applied to a product tangent vector: the
    /// corresponding block.
    pub fn project<'v>(&self, which: Factor, v: &'v [T]) -> &'v [T] {
        assert_eq!(v.len(), self.dim());
        match which {
            Factor::Base => &v[..self.m1()],
            Factor::Fiber => &v[self.m1()..],
        }
    }

    /// Block embedding of a factor tangent vector into the product.
    pub fn embed(&self, which: Factor, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        match which {
            Factor::Base => {
                assert_eq!(v.len(), self.m1());
                out[..self.m1()].copy_from_slice(v);
            }
            Factor::Fiber => {
                assert_eq!(v.len(), self.m2());
                out[self.m1()..].copy_from_slice(v);
            }
        }
        out
    }

    fn var_map(&self, which: Factor) -> impl Fn(usize) -> usize {
        let shift = match which {
            Factor::Base => 0,
            Factor::Fiber => self.m1(),
        };
        move |i| i + shift
    }

    /// Horizontal (`Base`) or vertical (`Fiber`) lift of a factor function:
    /// pure variable re-indexing, `phi^h(x, y) = phi(x)`.
    pub fn lift_function(&self, phi: &ScalarExpr<T>, which: Factor) -> Result<ScalarExpr<T>> {
        let expected = self.factor(which).dim();
        if phi.arity() != expected {
            return Err(GeomError::DimensionMismatch {
                expected,
                got: phi.arity(),
            });
        }
        Ok(phi.reindex(self.dim(), &self.var_map(which)))
    }

    /// Lift of a factor vector field: the factor block carries the
    /// re-indexed components, the other block is zero.
    pub fn lift_vector(&self, field: ExprVectorField<T>, which: Factor) -> Result<LiftedVectorField<T>> {
        let expected = self.factor(which).dim();
        if field.dim() != expected {
            return Err(GeomError::DimensionMismatch {
                expected,
                got: field.dim(),
            });
        }
        let dim = self.dim();
        let map = self.var_map(which);
        let mut components = vec![ScalarExpr::constant(dim, T::zero()); dim];
        for (k, c) in field.components.iter().enumerate() {
            components[map(k)] = c.reindex(dim, &map);
        }
        Ok(LiftedVectorField {
            kind: which,
            factor_field: field,
            product_field: ExprVectorField { dim, components },
        })
    }

    /// Lift of a factor 1-form; `alpha_i^I(X) = alpha_i(d pi_i X)`.
    pub fn lift_one_form(&self, form: ExprOneForm<T>, which: Factor) -> Result<ExprOneForm<T>> {
        let expected = self.factor(which).dim();
        if form.dim() != expected {
            return Err(GeomError::DimensionMismatch {
                expected,
                got: form.dim(),
            });
        }
        let dim = self.dim();
        let map = self.var_map(which);
        let mut components = vec![ScalarExpr::constant(dim, T::zero()); dim];
        for (k, c) in form.components.iter().enumerate() {
            components[map(k)] = c.reindex(dim, &map);
        }
        Ok(ExprOneForm { dim, components })
    }

    /// Pull-back connection applied to a pulled-back section:
    /// `nabla^{pi_i}_X (Y_i o pi_i)` evaluated as `nabla^i_{d pi_i(X)} Y_i`
    /// at the factor point, with components
    /// `(d pi_i X)^a (d_a Y^k + gamma^k_{ab} Y^b)`.
    pub fn pullback_derivative(
        &self,
        which: Factor,
        x_product: &[T],
        y_factor: &ExprVectorField<T>,
        product_point: &[T],
    ) -> Result<Vec<T>> {
        let chart = self.factor(which);
        let n = chart.dim();
        if y_factor.dim() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                got: y_factor.dim(),
            });
        }
        let (p, q) = self.split(product_point);
        let point = match which {
            Factor::Base => p,
            Factor::Fiber => q,
        };
        let v = self.project(which, x_product);
        let (gamma, _) = chart.connection_pair_at(point)?;
        pullback_apply(&gamma, v, y_factor, point)
    }
}

/// `nabla_V Y` at a point from connection coefficients and the symbolic
/// partials of the field components.
pub fn pullback_apply<T: Real>(
    gamma: &ConnectionCoeffs<T>,
    v: &[T],
    y: &ExprVectorField<T>,
    point: &[T],
) -> Result<Vec<T>> {
    let n = y.dim();
    let yv = y.at(point).map_err(GeomError::Eval)?;
    let mut out = vec![T::zero(); n];
    for k in 0..n {
        let mut acc = T::zero();
        for a in 0..n {
            if v[a] == T::zero() {
                continue;
            }
            let dy = y.component(k).differentiate(a).evaluate(point).map_err(GeomError::Eval)?;
            acc += v[a] * dy;
            for b in 0..n {
                acc += v[a] * gamma.get(k, a, b) * yv[b];
            }
        }
        out[k] = acc;
    }
    Ok(out)
}

/// Rebuilds a product vector from its scaled projections:
/// given `d pi_1(X) = phi * (X1 o pi_1)` and `d pi_2(X) = psi * (X2 o pi_2)`,
/// the field is `X = phi * X1^h + psi * X2^v`, componentwise the scaled
/// block concatenation.
pub fn reconstruct_from_projections<T: Real>(phi: T, psi: T, x1: &[T], x2: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(x1.len() + x2.len());
    out.extend(x1.iter().map(|&v| phi * v));
    out.extend(x2.iter().map(|&v| psi * v));
    out
}

/// Lie bracket `[X, Y]` at `p` with the component partials taken by
/// central differences (the oracle form used by the lift-identity checks).
pub fn lie_bracket_fd<T: Real>(
    x: &ExprVectorField<T>,
    y: &ExprVectorField<T>,
    p: &[T],
    h: T,
) -> Result<Vec<T>> {
    let n = x.dim();
    if y.dim() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: y.dim(),
        });
    }
    let xv = x.at(p).map_err(GeomError::Eval)?;
    let yv = y.at(p).map_err(GeomError::Eval)?;
    let mut out = vec![T::zero(); n];
    for k in 0..n {
        let mut acc = T::zero();
        for a in 0..n {
            if xv[a] != T::zero() {
                let dyk = central_fd(|pt: &[T]| y.component(k).evaluate(pt), p, a, h)
                    .map_err(GeomError::Eval)?;
                acc += xv[a] * dyk;
            }
            if yv[a] != T::zero() {
                let dxk = central_fd(|pt: &[T]| x.component(k).evaluate(pt), p, a, h)
                    .map_err(GeomError::Eval)?;
                acc -= yv[a] * dxk;
            }
        }
        out[k] = acc;
    }
    Ok(out)
}

/// Exterior derivative of a 1-form by central differences:
/// `(d omega)_{ab} = d_a omega_b - d_b omega_a`, returned row-major.
pub fn d_one_form_fd<T: Real>(form: &ExprOneForm<T>, p: &[T], h: T) -> Result<Vec<T>> {
    let n = form.dim();
    let mut out = vec![T::zero(); n * n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let d_a_wb = central_fd(|pt: &[T]| form.components[b].evaluate(pt), p, a, h)
                .map_err(GeomError::Eval)?;
            let d_b_wa = central_fd(|pt: &[T]| form.components[a].evaluate(pt), p, b, h)
                .map_err(GeomError::Eval)?;
            out[a * n + b] = d_a_wb - d_b_wa;
        }
    }
    Ok(out)
}

/// Exterior derivative of a 0-form (a function) by central differences.
pub fn d_function_fd<T: Real>(f: &ScalarExpr<T>, p: &[T], h: T) -> Result<Vec<T>> {
    (0..f.arity())
        .map(|a| central_fd(|pt: &[T]| f.evaluate(pt), p, a, h).map_err(GeomError::Eval))
        .collect()
}

pub fn fd_step_first<T: Real>() -> T {
    real(crate::tensor::FD_STEP_FIRST)
}
