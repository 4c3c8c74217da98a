//! Identity-residual engine: every structural identity the engine
//! constructs is re-checked here against independent finite-difference
//! oracles, producing tolerance-gated [`IdentityReport`]s.
//!
//! Anti-circularity rule: wherever an identity involves a derivative of
//! the metric, the check takes it by central differences, never from the
//! symbolic partials that built the quantity under test.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::manifold::{curvature_at, probe_points, ConnField, ConnectionCoeffs, PROBE_COUNT};
use crate::product::Factor;
use crate::scalar::{real, to_f64, Real};
use crate::tensor::SymMatrix;
use crate::warped::{GtildeBlock, ProductMetricKind, WarpedProductScene};

/// First-derivative identities (conjugacy, nabla-g): the FD truncation
/// floor at h = 1e-5 in double precision sits far below this.
pub const TOL_FIRST_ORDER: f64 = 1e-6;
/// Nested-derivative identities (anything through numerical curvature).
pub const TOL_CURVATURE: f64 = 1e-4;
/// Algebraic identities evaluated without any FD (torsion of symbolic
/// connections, affine-combination identities).
pub const TOL_ALGEBRAIC: f64 = 1e-12;
/// Symmetry of nabla-g for statistical products.
pub const TOL_NABLA_G: f64 = 1e-8;
/// Curvature duality on factor manifolds (single FD layer).
pub const TOL_FACTOR_DUALITY: f64 = 1e-5;
/// Base-flatness residual in the dually-flat check.
pub const TOL_BASE_FLAT: f64 = 1e-6;
/// Fiber constant-curvature match in the dually-flat check.
pub const TOL_COROLLARY: f64 = 1e-5;
/// Admissibility is the strict inequality `value < 1`; values at or above
/// this threshold fail the metric-condition report.
pub const ADMISSIBILITY_TOL: f64 = 1.0 - 1e-12;

const ANCHOR_CONJUGACY: &str = "X(g(Y,Z)) = g(D_X Y, Z) + g(Y, D*_X Z)";
const ANCHOR_TORSION: &str = "coefficients symmetric in the lower index pair";
const ANCHOR_NABLA_G: &str = "(Dg)(X,Y,Z) = (Dg)(Y,X,Z)";
const ANCHOR_DUALITY: &str = "g(R(X,Y)Z, W) + g(Z, R*(X,Y)W) = 0";
const ANCHOR_WARPED: &str = "product curvature blocks match their closed forms";
const ANCHOR_BASE_FLAT: &str = "base curvature vanishes";
const ANCHOR_COROLLARY: &str = "fiber sectional curvature = b1 / (1 + (c f2)^2 b1)";
const ANCHOR_WITNESS: &str = "mixed curvature block forces f2 constant";
const ANCHOR_CONDITION: &str = "0 <= c^2 b1 b2 < 1";
const ANCHOR_DEFINITE: &str = "admissible iff positive definite";

/// Knobs shared by all checks. Tolerances default per check and can be
/// overridden wholesale (the CLI's `--tol`).
#[derive(Debug, Clone, Copy)]
pub struct CheckOpts {
    pub samples: usize,
    pub seed: u64,
    pub fd_first: f64,
    pub fd_curvature: f64,
    pub tol_override: Option<f64>,
}

impl Default for CheckOpts {
    fn default() -> Self {
        CheckOpts {
            samples: 100,
            seed: 42,
            fd_first: crate::tensor::FD_STEP_FIRST,
            fd_curvature: crate::tensor::FD_STEP_CURVATURE,
            tol_override: None,
        }
    }
}

impl CheckOpts {
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn tol(&self, default_tol: f64) -> f64 {
        self.tol_override.unwrap_or(default_tol)
    }
}

/// A residual sample that exceeded the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub point: Vec<f64>,
    pub indices: Vec<usize>,
    pub residual: f64,
}

/// Named identity, residual statistics over sampled points, pass/fail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub anchor: String,
    pub samples: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seed: u64,
    #[serde(skip)]
    pub failures: Vec<Failure>,
}

/// Accumulates residuals with a compensated mean so the reduction is
/// order-independent in practice.
struct Accumulator {
    tol: f64,
    max: f64,
    sum: f64,
    comp: f64,
    count: u64,
    failures: Vec<Failure>,
}

impl Accumulator {
    fn new(tol: f64) -> Self {
        Accumulator {
            tol,
            max: 0.0,
            sum: 0.0,
            comp: 0.0,
            count: 0,
            failures: Vec::new(),
        }
    }

    fn record<T: Real>(&mut self, point: &[T], indices: &[usize], residual: f64) {
        self.max = self.max.max(residual);
        // Kahan step.
        let y = residual - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
        self.count += 1;
        if residual > self.tol && self.failures.len() < 10 {
            self.failures.push(Failure {
                point: point.iter().map(|&x| to_f64(x)).collect(),
                indices: indices.to_vec(),
                residual,
            });
        }
    }

    fn finish(self, identity: &str, anchor: &str, samples: usize, seed: u64) -> IdentityReport {
        let mean = if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        };
        IdentityReport {
            identity: identity.to_string(),
            anchor: anchor.to_string(),
            samples,
            max_residual: self.max,
            mean_residual: mean,
            tolerance: self.tol,
            passed: self.max <= self.tol,
            seed,
            failures: self.failures,
        }
    }
}

/// Shrinks each interval by `frac` per side so FD stencils stay inside.
pub fn shrink_boxes<T: Real>(boxes: &[(T, T)], frac: f64) -> Vec<(T, T)> {
    boxes
        .iter()
        .map(|&(lo, hi)| {
            let margin = (hi - lo) * real::<T>(frac);
            (lo + margin, hi - margin)
        })
        .collect()
}

/// Default 10% shrink used by every sampler.
pub const BOX_SHRINK: f64 = 0.1;

fn sample_point<T: Real>(rng: &mut ChaCha8Rng, boxes: &[(T, T)]) -> Vec<T> {
    boxes
        .iter()
        .map(|&(lo, hi)| lo + (hi - lo) * real::<T>(rng.gen::<f64>()))
        .collect()
}

fn sample_components<T: Real>(rng: &mut ChaCha8Rng, dim: usize) -> Vec<T> {
    (0..dim)
        .map(|_| real::<T>(rng.gen_range(-1.0..1.0)))
        .collect()
}

type MetricFn<'a, T> = dyn Fn(&[T]) -> Result<SymMatrix<T>> + 'a;
type ConnFn<'a, T> = dyn Fn(&[T]) -> Result<ConnectionCoeffs<T>> + 'a;

fn metric_fd<T: Real>(
    metric: &MetricFn<'_, T>,
    p: &[T],
    dir: usize,
    h: T,
) -> Result<SymMatrix<T>> {
    let mut fwd = p.to_vec();
    let mut bwd = p.to_vec();
    fwd[dir] += h;
    bwd[dir] -= h;
    let gp = metric(&fwd)?;
    let gm = metric(&bwd)?;
    let inv2h = (real::<T>(2.0) * h).recip();
    Ok(SymMatrix::from_fn(gp.dim(), |i, j| {
        (gp.get(i, j) - gm.get(i, j)) * inv2h
    }))
}

/// Conjugacy residual `X(g(Y,Z)) - g(D_X Y, Z) - g(Y, D*_X Z)` over random
/// points and all coordinate triples; the metric derivative is FD.
pub fn check_conjugacy<T: Real>(
    identity: &str,
    metric: &MetricFn<'_, T>,
    conn: &ConnFn<'_, T>,
    conn_star: &ConnFn<'_, T>,
    boxes: &[(T, T)],
    opts: &CheckOpts,
) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shrunk = shrink_boxes(boxes, BOX_SHRINK);
    let mut acc = Accumulator::new(opts.tol(TOL_FIRST_ORDER));
    let h = real::<T>(opts.fd_first);
    let n = boxes.len();
    for _ in 0..opts.samples {
        let p = sample_point(&mut rng, &shrunk);
        let g = metric(&p)?;
        let gamma = conn(&p)?;
        let gamma_star = conn_star(&p)?;
        for i in 0..n {
            let dg = metric_fd(metric, &p, i, h)?;
            for j in 0..n {
                for k in 0..n {
                    let lhs = dg.get(j, k);
                    let mut rhs = T::zero();
                    for l in 0..n {
                        rhs += gamma.get(l, i, j) * g.get(l, k);
                        rhs += gamma_star.get(l, i, k) * g.get(j, l);
                    }
                    acc.record(&p, &[i, j, k], to_f64((lhs - rhs).abs()));
                }
            }
        }
    }
    Ok(acc.finish(identity, ANCHOR_CONJUGACY, opts.samples, opts.seed))
}

/// Torsion residual `gamma^k_{ij} - gamma^k_{ji}`.
pub fn check_torsion_free<T: Real>(
    identity: &str,
    conn: &ConnFn<'_, T>,
    boxes: &[(T, T)],
    opts: &CheckOpts,
) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shrunk = shrink_boxes(boxes, BOX_SHRINK);
    let mut acc = Accumulator::new(opts.tol(TOL_ALGEBRAIC));
    let n = boxes.len();
    for _ in 0..opts.samples {
        let p = sample_point(&mut rng, &shrunk);
        let gamma = conn(&p)?;
        for k in 0..n {
            for i in 0..n {
                for j in i + 1..n {
                    let r = (gamma.get(k, i, j) - gamma.get(k, j, i)).abs();
                    acc.record(&p, &[k, i, j], to_f64(r));
                }
            }
        }
    }
    Ok(acc.finish(identity, ANCHOR_TORSION, opts.samples, opts.seed))
}

/// Symmetry residual of `(Dg)(X,Y,Z) = X(g(Y,Z)) - g(D_X Y, Z) - g(Y, D_X Z)`
/// in its first two slots, with the first term taken by FD.
pub fn check_nabla_g_symmetric<T: Real>(
    identity: &str,
    metric: &MetricFn<'_, T>,
    conn: &ConnFn<'_, T>,
    boxes: &[(T, T)],
    opts: &CheckOpts,
) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shrunk = shrink_boxes(boxes, BOX_SHRINK);
    let mut acc = Accumulator::new(opts.tol(TOL_NABLA_G));
    let h = real::<T>(opts.fd_first);
    let n = boxes.len();
    for _ in 0..opts.samples {
        let p = sample_point(&mut rng, &shrunk);
        let g = metric(&p)?;
        let gamma = conn(&p)?;
        let dg: Vec<SymMatrix<T>> = (0..n)
            .map(|i| metric_fd(metric, &p, i, h))
            .collect::<Result<_>>()?;
        let nabla_g = |i: usize, j: usize, k: usize| {
            let mut v = dg[i].get(j, k);
            for l in 0..n {
                v -= gamma.get(l, i, j) * g.get(l, k);
                v -= gamma.get(l, i, k) * g.get(j, l);
            }
            v
        };
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let r = (nabla_g(i, j, k) - nabla_g(j, i, k)).abs();
                    acc.record(&p, &[i, j, k], to_f64(r));
                }
            }
        }
    }
    Ok(acc.finish(identity, ANCHOR_NABLA_G, opts.samples, opts.seed))
}

/// Curvature-duality residual
/// `g(R(d_i,d_j)d_k, d_m) + g(d_k, R*(d_i,d_j)d_m)` with both curvatures
/// from [`curvature_at`].
pub fn check_curvature_duality<T: Real>(
    identity: &str,
    metric: &MetricFn<'_, T>,
    conn_field: &dyn ConnField<T>,
    conn_star_field: &dyn ConnField<T>,
    boxes: &[(T, T)],
    default_tol: f64,
    opts: &CheckOpts,
) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shrunk = shrink_boxes(boxes, BOX_SHRINK);
    let mut acc = Accumulator::new(opts.tol(default_tol));
    let h = real::<T>(opts.fd_curvature);
    let n = boxes.len();
    for _ in 0..opts.samples {
        let p = sample_point(&mut rng, &shrunk);
        let g = metric(&p)?;
        let r = curvature_at(conn_field, &p, h)?;
        let r_star = curvature_at(conn_star_field, &p, h)?;
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    for m in 0..n {
                        let mut v = T::zero();
                        for l in 0..n {
                            v += r.get(l, i, j, k) * g.get(l, m);
                            v += r_star.get(l, i, j, m) * g.get(k, l);
                        }
                        acc.record(&p, &[i, j, k, m], to_f64(v.abs()));
                    }
                }
            }
        }
    }
    Ok(acc.finish(identity, ANCHOR_DUALITY, opts.samples, opts.seed))
}

fn unit<T: Real>(dim: usize, index: usize) -> Vec<T> {
    let mut v = vec![T::zero(); dim];
    v[index] = T::one();
    v
}

/// Closed-form versus numerical curvature on all four deformed-base
/// blocks; requires the parallel-gradient probe to pass.
pub fn check_warped_curvature<T: Real>(
    identity: &str,
    scene: &WarpedProductScene<T>,
    opts: &CheckOpts,
) -> Result<IdentityReport> {
    let probe = scene.parallel_gradient_probe()?;
    if !probe.all_parallel() {
        return Err(GeomError::precondition(format!(
            "parallel-gradient probe failed (base {:.2e}/{:.2e}, fiber {:.2e}/{:.2e})",
            probe.base_primal, probe.base_star, probe.fiber_primal, probe.fiber_star
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut acc = Accumulator::new(opts.tol(TOL_CURVATURE));
    let h = real::<T>(opts.fd_curvature);
    let (m1, m2) = (scene.m1(), scene.m2());
    let base_boxes = shrink_boxes(scene.base().sampling_box(), BOX_SHRINK);
    let fiber_boxes = shrink_boxes(scene.fiber().sampling_box(), BOX_SHRINK);
    let field = crate::warped::product_conn_field(scene, ProductMetricKind::GTilde, false);

    for _ in 0..opts.samples {
        let p = sample_point(&mut rng, &base_boxes);
        let q = sample_point(&mut rng, &fiber_boxes);
        let joined = scene.chart().join(&p, &q);
        let r_num = curvature_at(&field, &joined, h)?;

        let mut compare = |block: GtildeBlock,
                           v1: &[T],
                           v2: &[T],
                           v3: &[T],
                           e1: &[T],
                           e2: &[T],
                           e3: &[T],
                           indices: &[usize]|
         -> Result<()> {
            let closed =
                scene.closed_form_curvature_gtilde_unchecked(block, v1, v2, v3, &p, &q, h)?;
            let numeric = r_num.apply(e1, e2, e3);
            let mut worst = T::zero();
            for k in 0..closed.len() {
                worst = worst.max((closed[k] - numeric[k]).abs());
            }
            acc.record(&joined, indices, to_f64(worst));
            Ok(())
        };

        for a in 0..m1 {
            for b in 0..m1 {
                for e in 0..m1 {
                    compare(
                        GtildeBlock::BaseBaseBase,
                        &unit(m1, a),
                        &unit(m1, b),
                        &unit(m1, e),
                        &unit(m1 + m2, a),
                        &unit(m1 + m2, b),
                        &unit(m1 + m2, e),
                        &[0, a, b, e],
                    )?;
                }
                for e in 0..m2 {
                    compare(
                        GtildeBlock::BaseBaseFiber,
                        &unit(m1, a),
                        &unit(m1, b),
                        &unit(m2, e),
                        &unit(m1 + m2, a),
                        &unit(m1 + m2, b),
                        &unit(m1 + m2, m1 + e),
                        &[2, a, b, e],
                    )?;
                }
                for be in 0..m2 {
                    compare(
                        GtildeBlock::BaseFiberBase,
                        &unit(m1, a),
                        &unit(m2, be),
                        &unit(m1, b),
                        &unit(m1 + m2, a),
                        &unit(m1 + m2, m1 + be),
                        &unit(m1 + m2, b),
                        &[3, a, be, b],
                    )?;
                }
            }
        }
        for al in 0..m2 {
            for be in 0..m2 {
                for e in 0..m2 {
                    compare(
                        GtildeBlock::FiberFiberFiber,
                        &unit(m2, al),
                        &unit(m2, be),
                        &unit(m2, e),
                        &unit(m1 + m2, m1 + al),
                        &unit(m1 + m2, m1 + be),
                        &unit(m1 + m2, m1 + e),
                        &[1, al, be, e],
                    )?;
                }
            }
        }
    }
    Ok(acc.finish(identity, ANCHOR_WARPED, opts.samples, opts.seed))
}

fn max_abs_d<T: Real>(
    chart: &crate::manifold::ChartManifold<T>,
    f: &crate::manifold::ScalarField<T>,
) -> Result<T> {
    let mut worst = T::zero();
    for p in probe_points(chart.sampling_box(), PROBE_COUNT) {
        let d = f.d_at(&p).map_err(GeomError::Eval)?;
        worst = worst.max(crate::tensor::max_abs(&d));
    }
    Ok(worst)
}

/// Dually-flat consequences: when the product pair is dually flat the
/// base curvature must vanish and the fiber must have constant sectional
/// curvature `b1 / (1 + (c f2)^2 b1)`. The check verifies the base
/// residual and extracts the fiber's wedge coefficient from the
/// numerical product curvature, requiring it to match the constant with
/// small spread over sampled points and 2-planes.
///
/// A non-constant `f2` contradicts dual flatness outright (the mixed
/// curvature block cannot vanish). With `allow_witness` the check then
/// runs in expectation-of-failure mode and reports that block's size as
/// the witness; without it, the situation is a precondition violation.
pub fn check_dually_flat<T: Real>(
    scene: &WarpedProductScene<T>,
    opts: &CheckOpts,
    allow_witness: bool,
) -> Result<Vec<IdentityReport>> {
    let flat_tol = real::<T>(1e-12);
    if scene.c() == T::zero() {
        return Err(GeomError::precondition(
            "the dually-flat check needs c != 0".to_string(),
        ));
    }
    if max_abs_d(scene.base(), scene.f1())? <= flat_tol {
        return Err(GeomError::precondition(
            "the dually-flat check needs a non-constant f1".to_string(),
        ));
    }
    let probe = scene.parallel_gradient_probe()?;
    if !probe.all_parallel() {
        return Err(GeomError::precondition(format!(
            "parallel-gradient probe failed (base {:.2e}/{:.2e}, fiber {:.2e}/{:.2e})",
            probe.base_primal, probe.base_star, probe.fiber_primal, probe.fiber_star
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let base_boxes = shrink_boxes(scene.base().sampling_box(), BOX_SHRINK);
    let fiber_boxes = shrink_boxes(scene.fiber().sampling_box(), BOX_SHRINK);
    let h = real::<T>(opts.fd_curvature);
    let (m1, m2) = (scene.m1(), scene.m2());

    let f2_constant = max_abs_d(scene.fiber(), scene.f2())? <= flat_tol;
    if !f2_constant && !allow_witness {
        return Err(GeomError::precondition(
            "f2 is not constant, so the scene cannot carry a dually flat structure; \
             run the dually-flat suite directly to see the witness"
                .to_string(),
        ));
    }
    if !f2_constant {
        // Witness mode: a dually flat structure would force f2 constant;
        // report the size of the mixed block instead.
        let mut acc = Accumulator::new(opts.tol(TOL_COROLLARY));
        for _ in 0..opts.samples {
            let p = sample_point(&mut rng, &base_boxes);
            let q = sample_point(&mut rng, &fiber_boxes);
            let joined = scene.chart().join(&p, &q);
            for a in 0..m1 {
                for be in 0..m2 {
                    for e in 0..m1 {
                        let block = scene.closed_form_curvature_gtilde_unchecked(
                            GtildeBlock::BaseFiberBase,
                            &unit(m1, a),
                            &unit(m2, be),
                            &unit(m1, e),
                            &p,
                            &q,
                            h,
                        )?;
                        acc.record(&joined, &[a, be, e], to_f64(crate::tensor::max_abs(&block)));
                    }
                }
            }
        }
        return Ok(vec![acc.finish(
            "dually-flat-witness",
            ANCHOR_WITNESS,
            opts.samples,
            opts.seed,
        )]);
    }

    if m2 < 2 {
        return Err(GeomError::precondition(
            "fiber must be at least 2-dimensional for sectional curvature".to_string(),
        ));
    }

    // (a) base curvature residual.
    let mut base_acc = Accumulator::new(opts.tol(TOL_BASE_FLAT));
    for _ in 0..opts.samples {
        let p = sample_point(&mut rng, &base_boxes);
        let r1 = scene.factor_curvature(Factor::Base, &p, h)?;
        base_acc.record(&p, &[], to_f64(r1.max_abs()));
    }
    let base_report = base_acc.finish("dually-flat-base", ANCHOR_BASE_FLAT, opts.samples, opts.seed);

    // (b) fiber wedge coefficient extracted from the numerical product
    // curvature; must equal the predicted constant at every sampled
    // point and 2-plane.
    let mut fiber_acc = Accumulator::new(opts.tol(TOL_COROLLARY));
    let field = crate::warped::product_conn_field(scene, ProductMetricKind::GTilde, false);
    let mut kappa_min = f64::INFINITY;
    let mut kappa_max = f64::NEG_INFINITY;
    for _ in 0..opts.samples {
        let p = sample_point(&mut rng, &base_boxes);
        let q = sample_point(&mut rng, &fiber_boxes);
        let joined = scene.chart().join(&p, &q);
        let r_num = curvature_at(&field, &joined, h)?;
        let r2 = scene.factor_curvature(Factor::Fiber, &q, h)?;
        let g2 = scene.fiber().metric_at(&q)?;
        let constant = scene.fiber_curvature_constant(&p, &q)?;

        // A couple of random 2-planes per point.
        for plane in 0..2 {
            let (x2, y2) = loop {
                let x = sample_components::<T>(&mut rng, m2);
                let y = sample_components::<T>(&mut rng, m2);
                let den = g2.inner(&x, &x) * g2.inner(&y, &y) - g2.inner(&x, &y) * g2.inner(&x, &y);
                if den > real::<T>(1e-3) {
                    break (x, y);
                }
            };
            let den = g2.inner(&x2, &x2) * g2.inner(&y2, &y2)
                - g2.inner(&x2, &y2) * g2.inner(&x2, &y2);
            let x2_emb = scene.chart().embed(Factor::Fiber, &x2);
            let y2_emb = scene.chart().embed(Factor::Fiber, &y2);
            let r_num_vert = r_num.apply(&x2_emb, &y2_emb, &y2_emb);
            let r2_applied = r2.apply(&x2, &y2, &y2);
            let delta: Vec<T> = (0..m2).map(|k| r2_applied[k] - r_num_vert[m1 + k]).collect();
            let kappa = g2.inner(&delta, &x2) / den;
            kappa_min = kappa_min.min(to_f64(kappa));
            kappa_max = kappa_max.max(to_f64(kappa));
            fiber_acc.record(&joined, &[plane], to_f64((kappa - constant).abs()));
        }
    }
    // Spread across all sampled planes and points enters as one extra
    // residual entry.
    let spread = (kappa_max - kappa_min).max(0.0);
    fiber_acc.record::<T>(&[], &[], spread);
    let fiber_report = fiber_acc.finish(
        "dually-flat-fiber-constant",
        ANCHOR_COROLLARY,
        opts.samples,
        opts.seed,
    );

    Ok(vec![base_report, fiber_report])
}

/// Admissibility and definiteness of the cross-term metric over sampled
/// point pairs: `metric-condition` records `c^2 b1 b2` against the strict
/// `< 1` gate, `metric-definiteness` records disagreement between
/// admissibility and positive definiteness of the assembled matrix.
pub fn check_metric_condition<T: Real>(
    scene: &WarpedProductScene<T>,
    opts: &CheckOpts,
) -> Result<Vec<IdentityReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let base_boxes = shrink_boxes(scene.base().sampling_box(), BOX_SHRINK);
    let fiber_boxes = shrink_boxes(scene.fiber().sampling_box(), BOX_SHRINK);
    let mut value_acc = Accumulator::new(opts.tol(ADMISSIBILITY_TOL));
    let mut agree_acc = Accumulator::new(opts.tol(0.5));
    for _ in 0..opts.samples {
        let p = sample_point(&mut rng, &base_boxes);
        let q = sample_point(&mut rng, &fiber_boxes);
        let joined = scene.chart().join(&p, &q);
        let cond = scene.metric_condition(&p, &q)?;
        let value = to_f64(cond.value);
        value_acc.record(&joined, &[], value);
        let g = scene.assemble_g(&p, &q)?;
        let disagreement = if (value - 1.0).abs() <= 1e-9 {
            // On the boundary the sign of the Cholesky pivot is rounding
            // noise; what must hold there is exact degeneracy.
            let det = to_f64(g.det().abs());
            let scale = to_f64(g.guard_scale());
            if det <= 1e-10 * scale {
                0.0
            } else {
                1.0
            }
        } else if cond.admissible == g.is_positive_definite() {
            0.0
        } else {
            1.0
        };
        agree_acc.record(&joined, &[], disagreement);
    }
    Ok(vec![
        value_acc.finish("metric-condition", ANCHOR_CONDITION, opts.samples, opts.seed),
        agree_acc.finish(
            "metric-definiteness",
            ANCHOR_DEFINITE,
            opts.samples,
            opts.seed,
        ),
    ])
}

/// Outcome of the step-halving sanity run.
#[derive(Debug, Clone)]
pub struct OrderSanity {
    pub coarse: IdentityReport,
    pub fine: IdentityReport,
    pub contracted: bool,
}

/// Order-of-accuracy sanity: reruns a check at h and h/2 and requires
/// `residual(h/2) <= 0.5 * residual(h) + 1e-12`. The baseline step is
/// deliberately coarse (1e-2) so truncation, which contracts like h^2,
/// dominates the rounding floor the absolute term absorbs.
pub fn fd_order_sanity(
    run: &mut dyn FnMut(f64) -> Result<IdentityReport>,
) -> Result<OrderSanity> {
    let coarse = run(1e-2)?;
    let fine = run(5e-3)?;
    let contracted = fine.max_residual <= 0.5 * coarse.max_residual + 1e-12;
    Ok(OrderSanity {
        coarse,
        fine,
        contracted,
    })
}
