//! Mapping from suite names to verification checks, producing one record
//! per identity in a fixed order.

use warpgeo_core::manifold::{ChartManifold, ConnField, FnConn, LeviCivitaField};
use warpgeo_core::product::Factor;
use warpgeo_core::verify::{self, CheckOpts, IdentityReport};
use warpgeo_core::warped::{BReading, ProductMetricKind};
use warpgeo_core::{GeomError, Scene64};

pub const SUITE_NAMES: &[&str] = &[
    "conjugacy",
    "statistical",
    "curvature",
    "warped-curvature",
    "dually-flat",
    "metric-condition",
    "all",
];

/// One emitted record. Diagnostic records are informational comparisons
/// (the `--diagnostic` flag) and do not affect the exit status.
#[derive(Debug, Clone)]
pub struct Record {
    pub suite: &'static str,
    pub report: IdentityReport,
    pub diagnostic: bool,
}

/// Checks skipped by `all` because a precondition does not hold on the
/// scene (reported to stderr, not an error).
#[derive(Debug, Clone, Default)]
pub struct SuiteNotes {
    pub skipped: Vec<String>,
}

fn factor_primal_field<'a>(chart: &'a ChartManifold<f64>) -> Box<dyn ConnField<f64> + 'a> {
    match chart.explicit_connection() {
        Some(field) => Box::new(field.clone()),
        None => Box::new(LeviCivitaField::new(chart)),
    }
}

fn factor_star_field<'a>(chart: &'a ChartManifold<f64>) -> Box<dyn ConnField<f64> + 'a> {
    match chart.explicit_conn_star() {
        Some(field) => Box::new(field.clone()),
        None => Box::new(FnConn::new(chart.dim(), move |p: &[f64]| {
            Ok(chart.connection_pair_at(p)?.1)
        })),
    }
}

fn factor_label(which: Factor) -> &'static str {
    match which {
        Factor::Base => "base",
        Factor::Fiber => "fiber",
    }
}

fn kind_label(kind: ProductMetricKind) -> &'static str {
    match kind {
        ProductMetricKind::G => "product-g",
        ProductMetricKind::GTilde => "product-gtilde",
    }
}

fn record(suite: &'static str, report: IdentityReport) -> Record {
    Record {
        suite,
        report,
        diagnostic: false,
    }
}

fn factor_conjugacy(
    scene: &Scene64,
    which: Factor,
    opts: &CheckOpts,
) -> Result<Record, GeomError> {
    let chart = scene.chart().factor(which);
    let metric = |p: &[f64]| chart.metric_at(p);
    let conn = |p: &[f64]| Ok(chart.connection_pair_at(p)?.0);
    let conn_star = |p: &[f64]| Ok(chart.connection_pair_at(p)?.1);
    Ok(record(
        "conjugacy",
        verify::check_conjugacy(
            &format!("{}-conjugacy", factor_label(which)),
            &metric,
            &conn,
            &conn_star,
            chart.sampling_box(),
            opts,
        )?,
    ))
}

fn product_conjugacy(
    scene: &Scene64,
    kind: ProductMetricKind,
    opts: &CheckOpts,
) -> Result<Record, GeomError> {
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
    Ok(record(
        "conjugacy",
        verify::check_conjugacy(
            &format!("{}-conjugacy", kind_label(kind)),
            &metric,
            &conn,
            &conn_star,
            &scene.chart().sampling_box(),
            opts,
        )?,
    ))
}

fn diagnostic_conjugacy(scene: &Scene64, opts: &CheckOpts) -> Result<Vec<Record>, GeomError> {
    // Comparison of the two B-tensor readings for the cross-term metric;
    // the scaled variant is expected to fail.
    let mut records = Vec::new();
    for (reading, label) in [
        (BReading::FactorLevel, "diagnostic-b-factor-conjugacy"),
        (BReading::ScaledMetricTerm, "diagnostic-b-scaled-conjugacy"),
    ] {
        let metric = |pt: &[f64]| {
            let (p, q) = scene.chart().split(pt);
            scene.assemble_g(p, q)
        };
        let conn = |pt: &[f64]| {
            let (p, q) = scene.chart().split(pt);
            scene.product_connection_g_with(false, reading, p, q)
        };
        let conn_star = |pt: &[f64]| {
            let (p, q) = scene.chart().split(pt);
            scene.product_connection_g_with(true, reading, p, q)
        };
        records.push(Record {
            suite: "conjugacy",
            report: verify::check_conjugacy(
                label,
                &metric,
                &conn,
                &conn_star,
                &scene.chart().sampling_box(),
                opts,
            )?,
            diagnostic: true,
        });
    }
    Ok(records)
}

fn factor_statistical(
    scene: &Scene64,
    which: Factor,
    opts: &CheckOpts,
) -> Result<Vec<Record>, GeomError> {
    let chart = scene.chart().factor(which);
    let metric = |p: &[f64]| chart.metric_at(p);
    let conn = |p: &[f64]| Ok(chart.connection_pair_at(p)?.0);
    Ok(vec![
        record(
            "statistical",
            verify::check_torsion_free(
                &format!("{}-torsion-free", factor_label(which)),
                &conn,
                chart.sampling_box(),
                opts,
            )?,
        ),
        record(
            "statistical",
            verify::check_nabla_g_symmetric(
                &format!("{}-nabla-g-symmetric", factor_label(which)),
                &metric,
                &conn,
                chart.sampling_box(),
                opts,
            )?,
        ),
    ])
}

fn product_statistical(
    scene: &Scene64,
    kind: ProductMetricKind,
    opts: &CheckOpts,
) -> Result<Vec<Record>, GeomError> {
    let metric = |pt: &[f64]| {
        let (p, q) = scene.chart().split(pt);
        scene.assemble(kind, p, q)
    };
    let conn = |pt: &[f64]| {
        let (p, q) = scene.chart().split(pt);
        scene.product_connection(kind, false, p, q)
    };
    Ok(vec![
        record(
            "statistical",
            verify::check_torsion_free(
                &format!("{}-torsion-free", kind_label(kind)),
                &conn,
                &scene.chart().sampling_box(),
                opts,
            )?,
        ),
        record(
            "statistical",
            verify::check_nabla_g_symmetric(
                &format!("{}-nabla-g-symmetric", kind_label(kind)),
                &metric,
                &conn,
                &scene.chart().sampling_box(),
                opts,
            )?,
        ),
    ])
}

fn factor_duality(
    scene: &Scene64,
    which: Factor,
    opts: &CheckOpts,
) -> Result<Record, GeomError> {
    let chart = scene.chart().factor(which);
    let metric = |p: &[f64]| chart.metric_at(p);
    let conn_field = factor_primal_field(chart);
    let star_field = factor_star_field(chart);
    Ok(record(
        "curvature",
        verify::check_curvature_duality(
            &format!("{}-curvature-duality", factor_label(which)),
            &metric,
            conn_field.as_ref(),
            star_field.as_ref(),
            chart.sampling_box(),
            verify::TOL_FACTOR_DUALITY,
            opts,
        )?,
    ))
}

fn product_duality(
    scene: &Scene64,
    kind: ProductMetricKind,
    opts: &CheckOpts,
) -> Result<Record, GeomError> {
    let metric = |pt: &[f64]| {
        let (p, q) = scene.chart().split(pt);
        scene.assemble(kind, p, q)
    };
    let conn_field = warpgeo_core::warped::product_conn_field(scene, kind, false);
    let star_field = warpgeo_core::warped::product_conn_field(scene, kind, true);
    Ok(record(
        "curvature",
        verify::check_curvature_duality(
            &format!("{}-curvature-duality", kind_label(kind)),
            &metric,
            &conn_field,
            &star_field,
            &scene.chart().sampling_box(),
            verify::TOL_CURVATURE,
            opts,
        )?,
    ))
}

fn warped_curvature(scene: &Scene64, opts: &CheckOpts) -> Result<Vec<Record>, GeomError> {
    Ok(vec![record(
        "warped-curvature",
        verify::check_warped_curvature("warped-curvature-blocks", scene, opts)?,
    )])
}

fn dually_flat(
    scene: &Scene64,
    opts: &CheckOpts,
    allow_witness: bool,
) -> Result<Vec<Record>, GeomError> {
    Ok(verify::check_dually_flat(scene, opts, allow_witness)?
        .into_iter()
        .map(|report| record("dually-flat", report))
        .collect())
}

fn metric_condition(scene: &Scene64, opts: &CheckOpts) -> Result<Vec<Record>, GeomError> {
    Ok(verify::check_metric_condition(scene, opts)?
        .into_iter()
        .map(|report| record("metric-condition", report))
        .collect())
}

/// Runs one named suite. Precondition and admissibility errors propagate
/// as `Err` when the suite was requested explicitly (exit status 2); the
/// `all` suite instead skips the affected checks and notes them.
pub fn run_suite(
    scene: &Scene64,
    suite: &str,
    opts: &CheckOpts,
    diagnostic: bool,
) -> Result<(Vec<Record>, SuiteNotes), GeomError> {
    let mut notes = SuiteNotes::default();
    let records = match suite {
        "conjugacy" => {
            let mut records = vec![
                factor_conjugacy(scene, Factor::Base, opts)?,
                factor_conjugacy(scene, Factor::Fiber, opts)?,
                product_conjugacy(scene, ProductMetricKind::G, opts)?,
                product_conjugacy(scene, ProductMetricKind::GTilde, opts)?,
            ];
            if diagnostic {
                records.append(&mut diagnostic_conjugacy(scene, opts)?);
            }
            records
        }
        "statistical" => {
            let mut records = Vec::new();
            records.extend(factor_statistical(scene, Factor::Base, opts)?);
            records.extend(factor_statistical(scene, Factor::Fiber, opts)?);
            records.extend(product_statistical(scene, ProductMetricKind::G, opts)?);
            records.extend(product_statistical(scene, ProductMetricKind::GTilde, opts)?);
            records
        }
        "curvature" => vec![
            factor_duality(scene, Factor::Base, opts)?,
            factor_duality(scene, Factor::Fiber, opts)?,
            product_duality(scene, ProductMetricKind::G, opts)?,
            product_duality(scene, ProductMetricKind::GTilde, opts)?,
        ],
        "warped-curvature" => warped_curvature(scene, opts)?,
        "dually-flat" => dually_flat(scene, opts, true)?,
        "metric-condition" => metric_condition(scene, opts)?,
        "all" => run_all(scene, opts, diagnostic, &mut notes)?,
        other => {
            return Err(GeomError::validation(format!(
                "unknown suite `{other}`; expected one of {}",
                SUITE_NAMES.join(", ")
            )))
        }
    };
    Ok((records, notes))
}

/// Everything applicable to the scene, skipping (with a note) the checks
/// whose preconditions fail rather than aborting the run.
fn run_all(
    scene: &Scene64,
    opts: &CheckOpts,
    diagnostic: bool,
    notes: &mut SuiteNotes,
) -> Result<Vec<Record>, GeomError> {
    let mut records = Vec::new();
    let attempt = |label: &str,
                       outcome: Result<Vec<Record>, GeomError>,
                       records: &mut Vec<Record>,
                       notes: &mut SuiteNotes|
     -> Result<(), GeomError> {
        match outcome {
            Ok(mut r) => {
                records.append(&mut r);
                Ok(())
            }
            Err(GeomError::PreconditionViolated(msg)) => {
                notes.skipped.push(format!("{label}: {msg}"));
                Ok(())
            }
            Err(GeomError::InadmissibleMetric { value }) => {
                notes.skipped.push(format!(
                    "{label}: cross-term metric inadmissible (c^2 b1 b2 = {value})"
                ));
                Ok(())
            }
            Err(other) => Err(other),
        }
    };

    records.push(factor_conjugacy(scene, Factor::Base, opts)?);
    records.push(factor_conjugacy(scene, Factor::Fiber, opts)?);
    attempt(
        "product-g-conjugacy",
        product_conjugacy(scene, ProductMetricKind::G, opts).map(|r| vec![r]),
        &mut records,
        notes,
    )?;
    records.push(product_conjugacy(scene, ProductMetricKind::GTilde, opts)?);
    if diagnostic {
        attempt(
            "diagnostic-conjugacy",
            diagnostic_conjugacy(scene, opts),
            &mut records,
            notes,
        )?;
    }

    records.extend(factor_statistical(scene, Factor::Base, opts)?);
    records.extend(factor_statistical(scene, Factor::Fiber, opts)?);
    attempt(
        "product-g-statistical",
        product_statistical(scene, ProductMetricKind::G, opts),
        &mut records,
        notes,
    )?;
    records.extend(product_statistical(scene, ProductMetricKind::GTilde, opts)?);

    records.push(factor_duality(scene, Factor::Base, opts)?);
    records.push(factor_duality(scene, Factor::Fiber, opts)?);
    attempt(
        "product-g-curvature-duality",
        product_duality(scene, ProductMetricKind::G, opts).map(|r| vec![r]),
        &mut records,
        notes,
    )?;
    records.push(product_duality(scene, ProductMetricKind::GTilde, opts)?);

    attempt(
        "warped-curvature",
        warped_curvature(scene, opts),
        &mut records,
        notes,
    )?;
    attempt("dually-flat", dually_flat(scene, opts, false), &mut records, notes)?;
    records.extend(metric_condition(scene, opts)?);
    Ok(records)
}
