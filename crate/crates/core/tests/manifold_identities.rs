//! Chart-level identities: musical isomorphisms, Christoffel symbols,
//! conjugate and lambda connections, curvature.

#![allow(clippy::needless_range_loop)]

use approx::assert_relative_eq;
use warpgeo_core::catalog;
use warpgeo_core::manifold::{
    curvature_at, lambda_connection, sectional_curvature, ConnectionCoeffs, FnConn,
    LeviCivitaField, ScalarField,
};
use warpgeo_core::tensor::central_fd;
use warpgeo_core::verify::{self, CheckOpts};
use warpgeo_core::{Expr64, GeomError};

fn field(text: &str, arity: usize) -> ScalarField<f64> {
    ScalarField::new(Expr64::parse(text, arity).unwrap())
}

#[test]
fn metric_values_at_points() {
    let euclid = catalog::euclidean::<f64>(2).unwrap();
    let g = euclid.metric_at(&[1.3, 0.7]).unwrap();
    assert_eq!(g.get(0, 0), 1.0);
    assert_eq!(g.get(1, 1), 1.0);
    assert_eq!(g.get(0, 1), 0.0);

    let polar = catalog::polar::<f64>().unwrap();
    let g = polar.metric_at(&[2.0, 1.0]).unwrap();
    assert_eq!(g.get(0, 0), 1.0);
    assert_eq!(g.get(1, 1), 4.0);

    // Information metric of the location-scale family at sigma = 2,
    // computed by hand from the log-density: diag(1/sigma^2, 2/sigma^2).
    let fisher = catalog::gauss_fisher::<f64>().unwrap();
    let g = fisher.metric_at(&[0.9, 2.0]).unwrap();
    assert_relative_eq!(g.get(0, 0), 0.25, max_relative = 1e-14);
    assert_relative_eq!(g.get(1, 1), 0.5, max_relative = 1e-14);
}

#[test]
fn sharp_and_cometric() {
    // Identity metric: sharp is the identity on components.
    let euclid = catalog::euclidean::<f64>(2).unwrap();
    let alpha = [3.0, -1.0];
    assert_eq!(euclid.sharp(&[1.0, 1.0], &alpha).unwrap(), vec![3.0, -1.0]);

    // g = diag(4, 1), alpha = (8, 3): sharp = (2, 3) and the induced
    // covector inner product is 8*2 + 3*3 = 25.
    let chart = warpgeo_core::manifold::ChartManifold::from_metric(
        warpgeo_core::manifold::MetricField::from_fn_upper(2, |i, j| {
            let text = if i == j { if i == 0 { "4" } else { "1" } } else { "0" };
            Ok(Expr64::parse(text, 2).unwrap())
        })
        .unwrap(),
    )
    .unwrap();
    let p = [1.0, 1.0];
    let sharp = chart.sharp(&p, &[8.0, 3.0]).unwrap();
    assert_relative_eq!(sharp[0], 2.0, max_relative = 1e-14);
    assert_relative_eq!(sharp[1], 3.0, max_relative = 1e-14);
    let cometric = chart.cometric_at(&p).unwrap();
    assert_relative_eq!(cometric.inner(&[8.0, 3.0], &[8.0, 3.0]), 25.0, max_relative = 1e-12);
}

#[test]
fn flat_sharp_round_trip_preserves_inner_products() {
    let sphere = catalog::sphere::<f64>().unwrap();
    let p = [1.1, 0.8];
    for (x, y) in [([1.0, 2.0], [0.5, -1.0]), ([0.2, 0.9], [3.0, 0.1])] {
        let g = sphere.metric_at(&p).unwrap();
        let gx = sphere.flat(&p, &x).unwrap();
        let gy = sphere.flat(&p, &y).unwrap();
        let cometric = sphere.cometric_at(&p).unwrap();
        assert_relative_eq!(cometric.inner(&gx, &gy), g.inner(&x, &y), max_relative = 1e-10);
        let back = sphere.sharp(&p, &gx).unwrap();
        for k in 0..2 {
            assert_relative_eq!(back[k], x[k], max_relative = 1e-10);
        }
    }
}

#[test]
fn christoffel_first_kind_values_and_fd_oracle() {
    let euclid = catalog::euclidean::<f64>(2).unwrap();
    let first = euclid.christoffel_first_kind(&[1.0, 1.0]).unwrap();
    assert!(first.iter().all(|&v| v == 0.0));

    // Polar: gamma_{11,0} = -x0, so -2 at x0 = 2.
    let polar = catalog::polar::<f64>().unwrap();
    let p = [2.0, 1.0];
    let first = polar.christoffel_first_kind(&p).unwrap();
    let n = 2;
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    assert_relative_eq!(first[idx(1, 1, 0)], -2.0, max_relative = 1e-12);

    // FD oracle on the metric entries, never the symbolic partials.
    let dg = |k: usize, i: usize, j: usize| {
        central_fd(|pt: &[f64]| polar.metric_at(pt).map(|g| g.get(i, j)), &p, k, 1e-5).unwrap()
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let oracle = 0.5 * (dg(j, i, k) + dg(i, j, k) - dg(k, i, j));
                assert_relative_eq!(first[idx(i, j, k)], oracle, epsilon = 1e-9);
            }
        }
    }

    // 1-d exponential metric: gamma_{00,0} = e^{2x}, so 1 at x = 0...
    // the box starts at 0.5, so check at 0.5 against exp(1).
    let exp1 = catalog::exp_1d::<f64>().unwrap();
    let first = exp1.christoffel_first_kind(&[0.5]).unwrap();
    assert_relative_eq!(first[0], (1.0f64).exp(), max_relative = 1e-12);
}

#[test]
fn levi_civita_known_coefficients() {
    let euclid = catalog::euclidean::<f64>(2).unwrap();
    let lc = euclid.levi_civita_at(&[1.0, 1.7]).unwrap();
    assert_eq!(lc.torsion_max(), 0.0);
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(lc.get(k, i, j), 0.0);
            }
        }
    }

    // Polar at x0 = 2: gamma^0_{11} = -2, gamma^1_{01} = 0.5, others 0.
    let polar = catalog::polar::<f64>().unwrap();
    let lc = polar.levi_civita_at(&[2.0, 0.9]).unwrap();
    assert_relative_eq!(lc.get(0, 1, 1), -2.0, max_relative = 1e-12);
    assert_relative_eq!(lc.get(1, 0, 1), 0.5, max_relative = 1e-12);
    assert_relative_eq!(lc.get(1, 1, 0), 0.5, max_relative = 1e-12);
    assert!(lc.get(0, 0, 0).abs() < 1e-13);
    assert!(lc.get(0, 0, 1).abs() < 1e-13);
    assert!(lc.get(1, 1, 1).abs() < 1e-13);

    // 1-d exponential metric: gamma^0_{00} = 1 everywhere.
    let exp1 = catalog::exp_1d::<f64>().unwrap();
    for x in [0.6, 1.0, 1.9] {
        let lc = exp1.levi_civita_at(&[x]).unwrap();
        assert_relative_eq!(lc.get(0, 0, 0), 1.0, max_relative = 1e-11);
    }
}

#[test]
fn conjugate_of_levi_civita_is_itself() {
    for chart in [
        catalog::polar::<f64>().unwrap(),
        catalog::sphere::<f64>().unwrap(),
        catalog::gauss_fisher::<f64>().unwrap(),
    ] {
        for p in [[0.8, 1.2], [1.5, 0.6]] {
            let lc = chart.levi_civita_at(&p).unwrap();
            let conj = chart.conjugate_at(&p, &lc).unwrap();
            assert!(conj.max_abs_diff(&lc) < 1e-10, "self-conjugacy failed");
        }
    }
}

#[test]
fn conjugate_of_flat_connection_on_exponential_metric() {
    // g = e^{2x}, gamma = 0: the conjugacy equation 2 e^{2x} = e^{2x} gamma*
    // gives gamma* = 2 at every point.
    let exp1 = catalog::exp_1d::<f64>().unwrap();
    let flat = ConnectionCoeffs::<f64>::zeros(1);
    for x in [0.5, 1.0, 2.0] {
        let conj = exp1.conjugate_at(&[x], &flat).unwrap();
        assert_relative_eq!(conj.get(0, 0, 0), 2.0, max_relative = 1e-11);
    }
}

#[test]
fn conjugation_is_an_involution() {
    let sphere = catalog::sphere::<f64>().unwrap();
    // An arbitrary (torsion-full) connection to push through twice.
    let mut gamma = ConnectionCoeffs::<f64>::zeros(2);
    gamma.set(0, 0, 1, 0.3);
    gamma.set(1, 1, 1, -0.8);
    gamma.set(0, 1, 0, 0.05);
    for p in [[0.7, 1.0], [1.4, 1.9]] {
        let once = sphere.conjugate_at(&p, &gamma).unwrap();
        let twice = sphere.conjugate_at(&p, &once).unwrap();
        assert!(twice.max_abs_diff(&gamma) < 1e-12);
    }
}

#[test]
fn lambda_connection_endpoints_and_midpoint() {
    let exp1 = catalog::exp_1d::<f64>().unwrap();
    let p = [1.1];
    let (gamma, gamma_star) = exp1.connection_pair_at(&p).unwrap();

    let at_one = lambda_connection(&gamma, &gamma_star, 1.0);
    let at_minus = lambda_connection(&gamma, &gamma_star, -1.0);
    assert!(at_one.max_abs_diff(&gamma) <= 1e-14);
    assert!(at_minus.max_abs_diff(&gamma_star) <= 1e-14);

    // (gamma^(l) + gamma^(-l)) / 2 is the metric connection for any l.
    let lam = 0.7;
    let plus = lambda_connection(&gamma, &gamma_star, lam);
    let minus = lambda_connection(&gamma, &gamma_star, -lam);
    let mid = ConnectionCoeffs::affine(0.5, &plus, 0.5, &minus);
    let hat = lambda_connection(&gamma, &gamma_star, 0.0);
    assert!(mid.max_abs_diff(&hat) <= 1e-14);

    // lambda = 0 of a conjugate pair is Levi-Civita.
    let lc = exp1.levi_civita_at(&p).unwrap();
    assert!(hat.max_abs_diff(&lc) <= 1e-10);
}

#[test]
fn lambda_zero_matches_levi_civita_on_derived_pairs() {
    // A statistical pair: perturb Levi-Civita by the sharp of a totally
    // symmetric (0,3) tensor. The conjugate is then LC - S and the
    // midpoint must land back on Levi-Civita.
    for chart in [
        catalog::polar::<f64>().unwrap(),
        catalog::gauss_fisher::<f64>().unwrap(),
    ] {
        for p in [[0.9, 1.3], [1.8, 0.7]] {
            let lc = chart.levi_civita_at(&p).unwrap();
            let s = chart.sharp(&p, &[0.25, 0.0]).unwrap();
            let mut gamma = lc.clone();
            for k in 0..2 {
                gamma.add_to(k, 0, 0, s[k]);
            }
            let star = chart.conjugate_at(&p, &gamma).unwrap();
            let hat = lambda_connection(&gamma, &star, 0.0);
            assert!(hat.max_abs_diff(&lc) < 1e-10, "diff {}", hat.max_abs_diff(&lc));
        }
    }
}

#[test]
fn curvature_of_flat_connection_vanishes() {
    let conn = FnConn::new(2, |_: &[f64]| Ok(ConnectionCoeffs::zeros(2)));
    let r = curvature_at(&conn, &[1.0, 1.0], 1e-4).unwrap();
    assert_eq!(r.max_abs(), 0.0);
}

#[test]
fn sphere_sectional_curvature_is_one() {
    let sphere = catalog::sphere::<f64>().unwrap();
    let p = [1.0, 0.9];
    let r = curvature_at(&LeviCivitaField::new(&sphere), &p, 1e-4).unwrap();
    let g = sphere.metric_at(&p).unwrap();
    let k = sectional_curvature(&g, &r, &[1.0, 0.0], &[0.0, 1.0]);
    assert_relative_eq!(k, 1.0, epsilon = 1e-5);
}

#[test]
fn curvature_is_antisymmetric_in_the_first_pair() {
    let sphere = catalog::sphere::<f64>().unwrap();
    let r = curvature_at(&LeviCivitaField::new(&sphere), &[1.2, 0.5], 1e-4).unwrap();
    for l in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert_eq!(r.get(l, i, j, k), -r.get(l, j, i, k));
                }
            }
        }
    }
}

#[test]
fn gradient_and_hessian_flat_chart() {
    let euclid = catalog::euclidean::<f64>(2).unwrap();
    let f = field("x0^2", 2);
    let p = [1.5, 0.8];
    let grad = euclid.gradient_at(&p, &f).unwrap();
    assert_relative_eq!(grad[0], 3.0, max_relative = 1e-13);
    assert_eq!(grad[1], 0.0);

    let flat = ConnectionCoeffs::zeros(2);
    let h = euclid.hessian_at(&p, &f, &flat).unwrap();
    assert_relative_eq!(h.get(0, 0), 2.0, max_relative = 1e-13);
    assert_eq!(h.get(1, 1), 0.0);
    assert_eq!(h.get(0, 1), 0.0);
}

#[test]
fn gradient_norm_on_constant_metric() {
    // 1-d metric g = 4, f = x0: grad f = 0.25 and b = g(grad, grad) = 0.25.
    let chart = warpgeo_core::manifold::ChartManifold::from_metric(
        warpgeo_core::manifold::MetricField::from_fn_upper(1, |_, _| {
            Ok(Expr64::parse("4", 1).unwrap())
        })
        .unwrap(),
    )
    .unwrap();
    let f = field("x0", 1);
    let grad = chart.gradient_at(&[1.0], &f).unwrap();
    assert_relative_eq!(grad[0], 0.25, max_relative = 1e-14);
    assert_relative_eq!(chart.grad_norm_sq(&[1.0], &f).unwrap(), 0.25, max_relative = 1e-14);
}

#[test]
fn hessian_symmetry_for_torsion_free_connections() {
    let sphere = catalog::sphere::<f64>().unwrap();
    let f = field("exp(x0)*sin(x1)", 2);
    for p in [[0.7, 1.1], [1.9, 0.6]] {
        let lc = sphere.levi_civita_at(&p).unwrap();
        let h = sphere.hessian_at(&p, &f, &lc).unwrap();
        // Triangular storage is symmetric by construction; cross-check the
        // two index orders through the raw formula instead.
        let df = [f.partial(0, &p).unwrap(), f.partial(1, &p).unwrap()];
        let h01 = f.second_partial(0, 1, &p).unwrap()
            - lc.get(0, 0, 1) * df[0]
            - lc.get(1, 0, 1) * df[1];
        let h10 = f.second_partial(1, 0, &p).unwrap()
            - lc.get(0, 1, 0) * df[0]
            - lc.get(1, 1, 0) * df[1];
        assert!((h01 - h10).abs() < 1e-12);
        assert_relative_eq!(h.get(0, 1), h01, max_relative = 1e-12);
    }
}

#[test]
fn conjugacy_residual_fd_check_on_catalog_pairs() {
    let opts = CheckOpts::default();
    // Self-conjugate pairs.
    for chart in [
        catalog::polar::<f64>().unwrap(),
        catalog::sphere::<f64>().unwrap(),
        catalog::gauss_fisher::<f64>().unwrap(),
    ] {
        let metric = |p: &[f64]| chart.metric_at(p);
        let conn = |p: &[f64]| chart.levi_civita_at(p);
        let report = verify::check_conjugacy(
            "self-conjugacy",
            &metric,
            &conn,
            &conn,
            chart.sampling_box(),
            &opts,
        )
        .unwrap();
        assert!(report.passed, "residual {}", report.max_residual);
    }

    // Explicit dually flat pair on the exponential line.
    let exp1 = catalog::exp_1d::<f64>().unwrap();
    let metric = |p: &[f64]| exp1.metric_at(p);
    let conn = |p: &[f64]| Ok(exp1.connection_pair_at(p)?.0);
    let conn_star = |p: &[f64]| Ok(exp1.connection_pair_at(p)?.1);
    let report = verify::check_conjugacy(
        "exp-1d-pair",
        &metric,
        &conn,
        &conn_star,
        exp1.sampling_box(),
        &opts,
    )
    .unwrap();
    assert!(report.passed, "residual {}", report.max_residual);

    // Replacing the conjugate by the primal on a non-metric pair must
    // fail loudly: the residual is |dg| = 2 e^{2x} >= 2 on the box.
    let report = verify::check_conjugacy(
        "broken-pair",
        &metric,
        &conn,
        &conn,
        exp1.sampling_box(),
        &opts,
    )
    .unwrap();
    assert!(!report.passed);
    assert!(report.max_residual > 1e-3);
    assert!(!report.failures.is_empty());
}

#[test]
fn curvature_duality_on_factor_manifolds() {
    let opts = CheckOpts::default().with_samples(50);

    // Metric pair on the sphere: R is skew-adjoint.
    let sphere = catalog::sphere::<f64>().unwrap();
    let metric = |p: &[f64]| sphere.metric_at(p);
    let lc_field = LeviCivitaField::new(&sphere);
    let report = verify::check_curvature_duality(
        "sphere-duality",
        &metric,
        &lc_field,
        &lc_field,
        sphere.sampling_box(),
        verify::TOL_FACTOR_DUALITY,
        &opts,
    )
    .unwrap();
    assert!(report.passed, "residual {}", report.max_residual);

    // Non-self-dual pair: flat primal on the polar metric, conjugate
    // derived pointwise; both curvatures vanish but so must the pairing.
    let polar = catalog::polar::<f64>().unwrap();
    let metric = |p: &[f64]| polar.metric_at(p);
    let flat_conn = FnConn::new(2, |_: &[f64]| Ok(ConnectionCoeffs::zeros(2)));
    let conj_conn = FnConn::new(2, |p: &[f64]| {
        polar.conjugate_at(p, &ConnectionCoeffs::zeros(2))
    });
    let report = verify::check_curvature_duality(
        "polar-flat-pair-duality",
        &metric,
        &flat_conn,
        &conj_conn,
        polar.sampling_box(),
        verify::TOL_FACTOR_DUALITY,
        &opts,
    )
    .unwrap();
    assert!(report.passed, "residual {}", report.max_residual);
}

#[test]
fn lambda_curvature_duality() {
    // For a conjugate pair, the lambda and minus-lambda connections are
    // again conjugate; their curvatures must satisfy the same pairing.
    let polar = catalog::polar::<f64>().unwrap();
    let metric = |p: &[f64]| polar.metric_at(p);
    let lam = 0.5;
    let pair = |p: &[f64]| -> warpgeo_core::Result<(ConnectionCoeffs<f64>, ConnectionCoeffs<f64>)> {
        let gamma = ConnectionCoeffs::zeros(2);
        let star = polar.conjugate_at(p, &gamma)?;
        Ok((gamma, star))
    };
    let plus = FnConn::new(2, move |p: &[f64]| {
        let (g, s) = pair(p)?;
        Ok(lambda_connection(&g, &s, lam))
    });
    let minus = FnConn::new(2, move |p: &[f64]| {
        let (g, s) = pair(p)?;
        Ok(lambda_connection(&g, &s, -lam))
    });
    let report = verify::check_curvature_duality(
        "polar-lambda-duality",
        &metric,
        &plus,
        &minus,
        polar.sampling_box(),
        verify::TOL_FACTOR_DUALITY,
        &CheckOpts::default().with_samples(50),
    )
    .unwrap();
    assert!(report.passed, "residual {}", report.max_residual);
}

#[test]
fn degenerate_metric_is_surfaced() {
    // A metric expression that collapses at a probe point fails at load.
    let result = warpgeo_core::manifold::ChartManifold::<f64>::from_metric(
        warpgeo_core::manifold::MetricField::from_fn_upper(2, |_, _| {
            Ok(Expr64::parse("1", 2).unwrap())
        })
        .unwrap(),
    );
    assert!(matches!(result, Err(GeomError::DegenerateMatrix { .. })));
}

#[test]
fn declared_torsion_free_connections_are_checked_at_load() {
    use warpgeo_core::manifold::{default_box, ChartManifold, ConnectionExprField, MetricField};
    let metric = MetricField::from_fn_upper(2, |i, j| {
        Ok(Expr64::parse(if i == j { "1" } else { "0" }, 2).unwrap())
    })
    .unwrap();
    let asymmetric = ConnectionExprField::from_fn(2, true, |k, i, j| {
        Ok(Expr64::parse(if (k, i, j) == (0, 0, 1) { "1" } else { "0" }, 2).unwrap())
    })
    .unwrap();
    let err = ChartManifold::new(metric, Some(asymmetric), None, default_box(2)).unwrap_err();
    assert!(matches!(err, GeomError::Validation(_)));
    assert!(err.to_string().contains("torsion"));
}

#[test]
fn non_finite_metric_entries_fail_the_probe_grid() {
    use warpgeo_core::manifold::{ChartManifold, MetricField};
    // log(x0 - 1) is undefined on part of the default box; the load-time
    // probe grid must surface it rather than let checks blow up later.
    let metric = MetricField::from_fn_upper(1, |_, _| Ok(Expr64::parse("log(x0 - 1)", 1).unwrap()))
        .unwrap();
    let err = ChartManifold::from_metric(metric).unwrap_err();
    assert!(matches!(err, GeomError::Eval(_) | GeomError::Validation(_)));
}
