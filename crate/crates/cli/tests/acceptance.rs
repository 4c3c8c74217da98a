//! Acceptance suite: every release criterion as a tolerance-gated check,
//! one pass/fail line per criterion (run with `-- --nocapture` to watch).
//!
//! Everything here is oracle-based: symbolic derivatives are checked
//! against central differences, constructed connection pairs against the
//! conjugacy residual, closed-form curvature blocks against nested-FD
//! numerical curvature, and hand-derived constants are frozen inline.

use std::fmt::Write as _;
use std::process::Command;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use warpgeo_core::catalog;
use warpgeo_core::manifold::{lambda_connection, ChartManifold, ConnectionExprField, MetricField};
use warpgeo_core::product::{lie_bracket_fd, ExprVectorField, Factor, ProductChart};
use warpgeo_core::tensor::central_fd;
use warpgeo_core::verify::{self, CheckOpts};
use warpgeo_core::warped::{GtildeBlock, ProductMetricKind};
use warpgeo_core::{Expr64, Scene64};

struct Gate {
    lines: Vec<String>,
    failures: usize,
}

impl Gate {
    fn new() -> Self {
        Gate {
            lines: Vec::new(),
            failures: 0,
        }
    }

    fn record(&mut self, number: u32, what: &str, outcome: Result<String, String>) {
        let line = match outcome {
            Ok(detail) => format!("PASS criterion {number:>2}: {what} [{detail}]"),
            Err(detail) => {
                self.failures += 1;
                format!("FAIL criterion {number:>2}: {what} [{detail}]")
            }
        };
        println!("{line}");
        self.lines.push(line);
    }
}

fn admissible_scenes() -> Vec<(&'static str, Scene64)> {
    vec![
        ("bilinear", catalog::bilinear(0.5).unwrap()),
        ("flat_linear", catalog::flat_linear().unwrap()),
        ("statistical", catalog::statistical().unwrap()),
        ("wedge", catalog::wedge().unwrap()),
        ("split", catalog::split().unwrap()),
        ("polar_sphere", catalog::polar_sphere().unwrap()),
        ("fisher_exp", catalog::fisher_exp().unwrap()),
    ]
}

fn factor_charts() -> Vec<(&'static str, ChartManifold<f64>)> {
    vec![
        ("polar", catalog::polar().unwrap()),
        ("exp_1d", catalog::exp_1d().unwrap()),
        ("sphere", catalog::sphere().unwrap()),
        ("gauss_fisher", catalog::gauss_fisher().unwrap()),
    ]
}

fn product_conjugacy_report(
    scene: &Scene64,
    kind: ProductMetricKind,
    opts: &CheckOpts,
) -> warpgeo_core::Result<verify::IdentityReport> {
    let metric = |pt: &[f64]| {
        let (p, q) = scene.chart().split(pt);
        scene.assemble(kind, p, q)
    };
    let conn = |pt: &[f64]| {
        let (p, q) = scene.chart().split(pt);
        scene.product_connection(kind, false, p, q)
    };
    let conn_star = |pt: &[f64]| {
        let (p, q) = scene.chart().split(pt);
        scene.product_connection(kind, true, p, q)
    };
    verify::check_conjugacy(
        "acceptance",
        &metric,
        &conn,
        &conn_star,
        &scene.chart().sampling_box(),
        opts,
    )
}

fn criterion_1(gate: &mut Gate) {
    // Self-conjugacy of the metric connection on the factor catalog.
    let opts = CheckOpts::default();
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for (name, chart) in factor_charts() {
        let metric = |p: &[f64]| chart.metric_at(p);
        let conn = |p: &[f64]| chart.levi_civita_at(p);
        let report =
            verify::check_conjugacy(name, &metric, &conn, &conn, chart.sampling_box(), &opts)
                .unwrap();
        worst = worst.max(report.max_residual);
        if report.max_residual > 1e-6 {
            failed.push(format!("{name}: {:.2e}", report.max_residual));
        }
    }
    let outcome = if failed.is_empty() {
        Ok(format!("4 charts, 100 samples each, max residual {worst:.2e} <= 1e-6"))
    } else {
        Err(failed.join(", "))
    };
    gate.record(1, "metric connection is self-conjugate on the factor catalog", outcome);
}

fn sample_chart_points(chart: &ChartManifold<f64>, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let shrunk = verify::shrink_boxes(chart.sampling_box(), verify::BOX_SHRINK);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            shrunk
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect()
        })
        .collect()
}

fn criterion_2_and_3(gate: &mut Gate) {
    let charts = vec![
        ("polar", catalog::polar().unwrap()),
        ("exp_1d", catalog::exp_1d().unwrap()),
        ("sphere", catalog::sphere().unwrap()),
        ("gauss_fisher", catalog::gauss_fisher().unwrap()),
        ("diag_quadratic", catalog::diag_quadratic().unwrap()),
    ];
    let mut mid_worst: f64 = 0.0;
    let mut end_worst: f64 = 0.0;
    for (_, chart) in &charts {
        for p in sample_chart_points(chart, 100, 42) {
            let (gamma, gamma_star) = chart.connection_pair_at(&p).unwrap();
            let lc = chart.levi_civita_at(&p).unwrap();
            let mid = lambda_connection(&gamma, &gamma_star, 0.0);
            mid_worst = mid_worst.max(mid.max_abs_diff(&lc));
            let plus = lambda_connection(&gamma, &gamma_star, 1.0);
            let minus = lambda_connection(&gamma, &gamma_star, -1.0);
            end_worst = end_worst.max(plus.max_abs_diff(&gamma));
            end_worst = end_worst.max(minus.max_abs_diff(&gamma_star));
        }
    }
    gate.record(
        2,
        "midpoint of every conjugate pair is the metric connection",
        if mid_worst <= 1e-10 {
            Ok(format!("5 charts, 100 samples each, max deviation {mid_worst:.2e} <= 1e-10"))
        } else {
            Err(format!("max deviation {mid_worst:.2e} > 1e-10"))
        },
    );
    gate.record(
        3,
        "lambda = +/-1 reproduces the pair exactly",
        if end_worst <= 1e-14 {
            Ok(format!("max deviation {end_worst:.2e} <= 1e-14"))
        } else {
            Err(format!("max deviation {end_worst:.2e} > 1e-14"))
        },
    );
}

fn criterion_4_and_5(gate: &mut Gate) {
    let opts = CheckOpts::default();
    for (number, kind, label) in [
        (4u32, ProductMetricKind::G, "cross-term product pair is conjugate on every admissible scene"),
        (5u32, ProductMetricKind::GTilde, "deformed-base product pair is conjugate on every admissible scene"),
    ] {
        let mut worst: f64 = 0.0;
        let mut failed = Vec::new();
        for (name, scene) in admissible_scenes() {
            let report = product_conjugacy_report(&scene, kind, &opts).unwrap();
            worst = worst.max(report.max_residual);
            if report.max_residual > 1e-6 {
                failed.push(format!("{name}: {:.2e}", report.max_residual));
            }
        }
        let outcome = if failed.is_empty() {
            Ok(format!("7 scenes, 100 samples each, max residual {worst:.2e} <= 1e-6"))
        } else {
            Err(failed.join(", "))
        };
        gate.record(number, label, outcome);
    }
}

fn perturbed_statistical_scene(epsilon: f64) -> Scene64 {
    let metric = MetricField::from_fn_upper(2, |i, j| {
        let text = match (i, j) {
            (0, 0) => "x0^2",
            (1, 1) => "x1^2",
            _ => "0",
        };
        Ok(Expr64::parse(text, 2).unwrap())
    })
    .unwrap();
    let conn = ConnectionExprField::from_fn(2, false, |k, i, j| {
        Ok(if (k, i, j) == (0, 0, 1) {
            Expr64::parse(&format!("{epsilon}"), 2).unwrap()
        } else {
            Expr64::parse("0", 2).unwrap()
        })
    })
    .unwrap();
    let base = ChartManifold::new(
        metric,
        Some(conn),
        None,
        warpgeo_core::manifold::default_box(2),
    )
    .unwrap();
    Scene64::new(
        base,
        catalog::exp_1d().unwrap(),
        Expr64::parse("x0", 2).unwrap(),
        Expr64::parse("1 + x0", 1).unwrap(),
        0.5,
    )
    .unwrap()
}

fn criterion_6(gate: &mut Gate) {
    let opts = CheckOpts::default();
    let scene = catalog::statistical().unwrap();
    let boxes = scene.chart().sampling_box();
    let mut torsion_worst: f64 = 0.0;
    let mut nabla_worst: f64 = 0.0;
    for kind in [ProductMetricKind::G, ProductMetricKind::GTilde] {
        let metric = |pt: &[f64]| {
            let (p, q) = scene.chart().split(pt);
            scene.assemble(kind, p, q)
        };
        let conn = |pt: &[f64]| {
            let (p, q) = scene.chart().split(pt);
            scene.product_connection(kind, false, p, q)
        };
        let torsion =
            verify::check_torsion_free("fwd", &conn, &boxes, &opts).unwrap();
        let nabla = verify::check_nabla_g_symmetric("fwd", &metric, &conn, &boxes, &opts).unwrap();
        torsion_worst = torsion_worst.max(torsion.max_residual);
        nabla_worst = nabla_worst.max(nabla.max_residual);
    }

    let perturbed = perturbed_statistical_scene(1e-2);
    let pboxes = perturbed.chart().sampling_box();
    let pconn = |pt: &[f64]| {
        let (p, q) = perturbed.chart().split(pt);
        perturbed.product_connection_g(false, p, q)
    };
    let pmetric = |pt: &[f64]| {
        let (p, q) = perturbed.chart().split(pt);
        perturbed.assemble_g(p, q)
    };
    let detected = verify::check_nabla_g_symmetric("rev", &pmetric, &pconn, &pboxes, &opts)
        .unwrap()
        .max_residual;

    let forward_ok = torsion_worst <= 1e-12 && nabla_worst <= 1e-8;
    let reverse_ok = detected >= 1e-4;
    gate.record(
        6,
        "statistical factors <=> statistical product (forward + detected perturbation)",
        if forward_ok && reverse_ok {
            Ok(format!(
                "torsion {torsion_worst:.1e} <= 1e-12, nabla-g {nabla_worst:.1e} <= 1e-8, perturbation residual {detected:.1e} >= 1e-4"
            ))
        } else {
            Err(format!(
                "torsion {torsion_worst:.1e}, nabla-g {nabla_worst:.1e}, perturbation residual {detected:.1e}"
            ))
        },
    );
}

fn criterion_7(gate: &mut Gate) {
    // 5x5 grid over the (1-d base) x (1-d fiber) boxes.
    let grid: Vec<f64> = (0..5).map(|i| 0.65 + 0.3 * i as f64).collect();
    let admissible = catalog::bilinear(0.5).unwrap();
    let degenerate = catalog::bilinear(1.0).unwrap();
    let mut pd_ok = true;
    let mut det_ok = true;
    let mut worst_det_ratio: f64 = 0.0;
    for &p in &grid {
        for &q in &grid {
            let g = admissible.assemble_g(&[p], &[q]).unwrap();
            pd_ok &= g.is_positive_definite();
            let g = degenerate.assemble_g(&[p], &[q]).unwrap();
            let ratio = g.det().abs() / (1e-10 * g.guard_scale());
            worst_det_ratio = worst_det_ratio.max(ratio);
            det_ok &= ratio <= 1.0;
        }
    }
    gate.record(
        7,
        "admissible scene is positive definite; boundary scene is degenerate on the grid",
        if pd_ok && det_ok {
            Ok(format!(
                "25 grid points; worst |det| at {:.1e} of the 1e-10*scale gate",
                worst_det_ratio
            ))
        } else {
            Err(format!("pd_ok={pd_ok} det_ok={det_ok}"))
        },
    );
}

fn criterion_8(gate: &mut Gate) {
    let opts = CheckOpts::default().with_samples(50);
    let mut factor_worst: f64 = 0.0;
    for (_, chart) in factor_charts() {
        let metric = |p: &[f64]| chart.metric_at(p);
        let lc = warpgeo_core::manifold::LeviCivitaField::new(&chart);
        let report = verify::check_curvature_duality(
            "factor",
            &metric,
            &lc,
            &lc,
            chart.sampling_box(),
            verify::TOL_FACTOR_DUALITY,
            &opts,
        )
        .unwrap();
        factor_worst = factor_worst.max(report.max_residual);
    }

    let mut product_worst: f64 = 0.0;
    for scene in [catalog::statistical().unwrap(), catalog::flat_linear().unwrap()] {
        for kind in [ProductMetricKind::G, ProductMetricKind::GTilde] {
            let metric = |pt: &[f64]| {
                let (p, q) = scene.chart().split(pt);
                scene.assemble(kind, p, q)
            };
            let conn = warpgeo_core::warped::product_conn_field(&scene, kind, false);
            let star = warpgeo_core::warped::product_conn_field(&scene, kind, true);
            let report = verify::check_curvature_duality(
                "product",
                &metric,
                &conn,
                &star,
                &scene.chart().sampling_box(),
                verify::TOL_CURVATURE,
                &opts,
            )
            .unwrap();
            product_worst = product_worst.max(report.max_residual);
        }
    }
    gate.record(
        8,
        "curvature duality pairing vanishes (factors and products)",
        if factor_worst <= 1e-5 && product_worst <= 1e-4 {
            Ok(format!(
                "50 samples; factors {factor_worst:.2e} <= 1e-5, products {product_worst:.2e} <= 1e-4"
            ))
        } else {
            Err(format!("factors {factor_worst:.2e}, products {product_worst:.2e}"))
        },
    );
}

fn criterion_9(gate: &mut Gate) {
    let scene = catalog::flat_linear().unwrap();
    let report =
        verify::check_warped_curvature("criterion-9", &scene, &CheckOpts::default()).unwrap();

    // Hand value: wedge coefficient -b1/(1 + b1) = -0.25/1.25 = -0.2.
    let out = scene
        .closed_form_curvature_gtilde(
            GtildeBlock::FiberFiberFiber,
            &[1.0, 0.0],
            &[0.0, 1.0],
            &[0.0, 1.0],
            &[1.3],
            &[1.0, 0.9],
            1e-4,
        )
        .unwrap();
    let coeff: f64 = out[1];
    let coeff_ok = (coeff - (-0.2)).abs() <= 1e-5;
    gate.record(
        9,
        "closed-form curvature blocks match nested-FD curvature on the linear scene",
        if report.passed && coeff_ok {
            Ok(format!(
                "blocks residual {:.2e} <= 1e-4; fiber coefficient {coeff:.6} = -0.2 +/- 1e-5",
                report.max_residual
            ))
        } else {
            Err(format!(
                "blocks residual {:.2e}, fiber coefficient {coeff:.6}",
                report.max_residual
            ))
        },
    );
}

fn criterion_10(gate: &mut Gate) {
    let scene = catalog::flat_linear().unwrap();
    let constant: f64 = scene.fiber_curvature_constant(&[1.0], &[1.0, 1.0]).unwrap();
    let reports =
        verify::check_dually_flat(&scene, &CheckOpts::default().with_samples(20), false)
            .unwrap();
    let base = &reports[0];
    let fiber = &reports[1];
    let ok = (constant - 0.2).abs() < 1e-12
        && base.max_residual <= 1e-6
        && fiber.max_residual <= 1e-5;
    gate.record(
        10,
        "dually-flat consequences: fiber curvature 0.2 with small spread, flat base",
        if ok {
            Ok(format!(
                "constant {constant:.6}; 20 points x 2 planes, |kappa - 0.2| and spread {:.2e} <= 1e-5; base {:.2e} <= 1e-6",
                fiber.max_residual, base.max_residual
            ))
        } else {
            Err(format!(
                "constant {constant:.6}, fiber residual {:.2e}, base residual {:.2e}",
                fiber.max_residual, base.max_residual
            ))
        },
    );
}

fn criterion_11(gate: &mut Gate) {
    let scene = catalog::bilinear(0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = [rng.gen_range(0.65..1.85)];
        let q = [rng.gen_range(0.65..1.85)];
        let draws: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let x = scene
            .reconstruct_x(
                draws[0], draws[1], draws[2], draws[3],
                &[draws[4]], &[draws[5]], &[draws[6]], &[draws[7]],
                &p, &q,
            )
            .unwrap();
        let g = scene.assemble_g(&p, &q).unwrap();
        let lhs_h = g.inner(&x, &[1.0, 0.0]);
        let want_h = g.inner(&[draws[1] * draws[4], draws[0] * draws[6]], &[1.0, 0.0]);
        let lhs_v = g.inner(&x, &[0.0, 1.0]);
        let want_v = g.inner(&[draws[3] * draws[5], draws[2] * draws[7]], &[0.0, 1.0]);
        worst = worst.max((lhs_h - want_h).abs()).max((lhs_v - want_v).abs());
    }
    gate.record(
        11,
        "reconstructed vector satisfies both defining inner-product equations",
        if worst <= 1e-9 {
            Ok(format!("100 draws, max equation residual {worst:.2e} <= 1e-9"))
        } else {
            Err(format!("max equation residual {worst:.2e} > 1e-9"))
        },
    );
}

fn criterion_12(gate: &mut Gate) {
    let chart = ProductChart::new(
        catalog::euclidean::<f64>(2).unwrap(),
        catalog::euclidean::<f64>(1).unwrap(),
    );
    let field = |dim: usize, comps: &[&str]| {
        ExprVectorField::new(
            comps
                .iter()
                .map(|c| Expr64::parse(c, dim).unwrap())
                .collect::<Vec<_>>(),
        )
        .unwrap()
    };
    let x1 = field(2, &["x0*x1", "sin(x0)"]);
    let x2 = field(1, &["1 + x0^2"]);
    let y1 = field(2, &["x1^2", "x0 + x1"]);
    let y2 = field(1, &["cos(x0)"]);
    let phi1 = Expr64::parse("exp(x0)*x1", 2).unwrap();
    let alpha1 = warpgeo_core::product::ExprOneForm::new(vec![
        Expr64::parse("x0", 2).unwrap(),
        Expr64::parse("x0*x1", 2).unwrap(),
    ])
    .unwrap();
    let x_product = field(3, &["x0*x1", "sin(x0)", "1 + x2^2"]);

    let x1_h = chart.lift_vector(x1.clone(), Factor::Base).unwrap();
    let y1_h = chart.lift_vector(y1.clone(), Factor::Base).unwrap();
    let y2_v = chart.lift_vector(y2.clone(), Factor::Fiber).unwrap();
    let phi1_h = chart.lift_function(&phi1, Factor::Base).unwrap();
    let alpha1_h = chart.lift_one_form(alpha1.clone(), Factor::Base).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut alg_worst: f64 = 0.0;
    let mut bracket_worst: f64 = 0.0;
    for _ in 0..100 {
        let p: Vec<f64> = (0..3).map(|_| rng.gen_range(0.65..1.85)).collect();
        let (pb, pf) = (&p[..2], &p[2..]);

        let lhs = x1_h.product_field().apply_to(&phi1_h, &p).unwrap();
        let rhs = x1.apply_to(&phi1, pb).unwrap();
        alg_worst = alg_worst.max((lhs - rhs).abs());

        let xv = x_product.at(&p).unwrap();
        let lhs = alpha1_h.pair(&xv, &p).unwrap();
        let rhs = alpha1.pair(&x1.at(pb).unwrap(), pb).unwrap();
        alg_worst = alg_worst.max((lhs - rhs).abs());

        let bracket = lie_bracket_fd(&x_product, y1_h.product_field(), &p, 1e-5).unwrap();
        let factor_bracket = lie_bracket_fd(&x1, &y1, pb, 1e-5).unwrap();
        for k in 0..2 {
            bracket_worst = bracket_worst.max((bracket[k] - factor_bracket[k]).abs());
        }
        bracket_worst = bracket_worst.max(bracket[2].abs());

        let bracket = lie_bracket_fd(&x_product, y2_v.product_field(), &p, 1e-5).unwrap();
        let factor_bracket = lie_bracket_fd(&x2, &y2, pf, 1e-5).unwrap();
        bracket_worst = bracket_worst.max((bracket[2] - factor_bracket[0]).abs());
        bracket_worst = bracket_worst.max(bracket[0].abs()).max(bracket[1].abs());
    }
    gate.record(
        12,
        "lift identities (derivations, pairings exact; FD commutators)",
        if alg_worst <= 1e-10 && bracket_worst <= 1e-8 {
            Ok(format!(
                "100 samples; algebraic {alg_worst:.2e} <= 1e-10, brackets {bracket_worst:.2e} <= 1e-8"
            ))
        } else {
            Err(format!("algebraic {alg_worst:.2e}, brackets {bracket_worst:.2e}"))
        },
    );
}

fn criterion_13(gate: &mut Gate) {
    // Halving the FD step must halve (or better) the conjugacy residual
    // for the criterion 1/4/5 checks, up to the rounding floor.
    let mut detail = String::new();
    let mut ok = true;

    for (name, chart) in factor_charts() {
        let sanity = verify::fd_order_sanity(&mut |h| {
            let mut opts = CheckOpts::default().with_samples(25);
            opts.fd_first = h;
            let metric = |p: &[f64]| chart.metric_at(p);
            let conn = |p: &[f64]| chart.levi_civita_at(p);
            verify::check_conjugacy(name, &metric, &conn, &conn, chart.sampling_box(), &opts)
        })
        .unwrap();
        ok &= sanity.contracted;
        if !sanity.contracted {
            let _ = write!(detail, "{name}: {:.1e}->{:.1e}; ", sanity.coarse.max_residual, sanity.fine.max_residual);
        }
    }

    for kind in [ProductMetricKind::G, ProductMetricKind::GTilde] {
        for (name, scene) in admissible_scenes() {
            let sanity = verify::fd_order_sanity(&mut |h| {
                let mut opts = CheckOpts::default().with_samples(15);
                opts.fd_first = h;
                product_conjugacy_report(&scene, kind, &opts)
            })
            .unwrap();
            ok &= sanity.contracted;
            if !sanity.contracted {
                let _ = write!(
                    detail,
                    "{name}/{kind:?}: {:.1e}->{:.1e}; ",
                    sanity.coarse.max_residual, sanity.fine.max_residual
                );
            }
        }
    }

    gate.record(
        13,
        "halving the FD step contracts the conjugacy residuals",
        if ok {
            Ok("4 factor charts + 7 scenes x 2 product metrics".to_string())
        } else {
            Err(detail)
        },
    );
}

fn random_expr(rng: &mut ChaCha8Rng, depth: usize, arity: usize) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.4) {
            format!("{:.3}", rng.gen_range(-2.0..2.0))
        } else {
            format!("x{}", rng.gen_range(0..arity))
        };
    }
    let a = random_expr(rng, depth - 1, arity);
    match rng.gen_range(0..11) {
        0 => format!("(({a}) + ({}))/2", random_expr(rng, depth - 1, arity)),
        1 => format!("(({a}) - ({}))/2", random_expr(rng, depth - 1, arity)),
        2 => format!("({a})*({})/8", random_expr(rng, depth - 1, arity)),
        3 => format!("({a})/(1 + ({})^2)", random_expr(rng, depth - 1, arity)),
        4 => format!("-({a})"),
        5 => format!("sin({a})"),
        6 => format!("cos({a})"),
        7 => format!("exp(({a})/8)"),
        8 => format!("log(1 + ({a})^2)"),
        9 => format!("sqrt(1 + ({a})^2)"),
        _ => format!("(({a})/4)^{}", rng.gen_range(2..=3)),
    }
}

fn criterion_14(gate: &mut Gate) {
    let arity = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..1000 {
        let text = random_expr(&mut rng, 5, arity);
        let e = Expr64::parse(&text, arity).unwrap();
        let p: Vec<f64> = (0..arity).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let i = rng.gen_range(0..arity);
        let sym = e.differentiate(i).evaluate(&p).unwrap();
        let fd = central_fd(|pt: &[f64]| e.evaluate(pt), &p, i, 1e-5).unwrap();
        worst_rel = worst_rel.max((sym - fd).abs() / (1.0 + sym.abs()));
    }
    let derivative_ok = worst_rel <= 1e-6;

    // Malformed input through the CLI must exit 2 with a located error.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("malformed.scene");
    std::fs::write(
        &path,
        "[scene]\nc = 0.5\nf1 = 2*+x0\nf2 = 1\n[base]\ndim = 1\ng00 = 1\n[fiber]\ndim = 1\ng00 = 1\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_warpgeo"))
        .args(["run", path.to_str().unwrap(), "--suite", "all"])
        .output()
        .unwrap();
    let exit_ok = out.status.code() == Some(2);
    let located = String::from_utf8_lossy(&out.stderr).contains("offset");

    gate.record(
        14,
        "expression engine: symbolic-vs-FD agreement and located CLI errors",
        if derivative_ok && exit_ok && located {
            Ok(format!(
                "1000 expressions, worst relative deviation {worst_rel:.2e} <= 1e-6; malformed spec exits 2"
            ))
        } else {
            Err(format!(
                "worst relative {worst_rel:.2e}, exit2={exit_ok}, located={located}"
            ))
        },
    );
}

#[test]
fn acceptance() {
    let mut gate = Gate::new();
    criterion_1(&mut gate);
    criterion_2_and_3(&mut gate);
    criterion_4_and_5(&mut gate);
    criterion_6(&mut gate);
    criterion_7(&mut gate);
    criterion_8(&mut gate);
    criterion_9(&mut gate);
    criterion_10(&mut gate);
    criterion_11(&mut gate);
    criterion_12(&mut gate);
    criterion_13(&mut gate);
    criterion_14(&mut gate);
    assert_eq!(
        gate.failures,
        0,
        "{} acceptance criteria failed:\n{}",
        gate.failures,
        gate.lines.join("\n")
    );
}
