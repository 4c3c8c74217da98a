//! Record emission: one human-readable or JSON line per identity.
//!
//! The JSON record fields are a stable interface:
//! `identity, anchor, samples, max_residual, mean_residual, tolerance,
//! passed, seed` (one self-delimiting record per line, UTF-8).

use std::io::Write;

use crate::suites::Record;

pub fn emit_records(
    out: &mut dyn Write,
    records: &[Record],
    json: bool,
) -> std::io::Result<()> {
    for rec in records {
        if json {
            let line = serde_json::to_string(&rec.report).expect("report serializes");
            writeln!(out, "{line}")?;
        } else {
            let r = &rec.report;
            let status = if rec.diagnostic {
                "DIAG"
            } else if r.passed {
                "PASS"
            } else {
                "FAIL"
            };
            writeln!(
                out,
                "[{status}] {suite}/{identity} samples={samples} max={max:.3e} mean={mean:.3e} tol={tol:.1e} seed={seed} anchor=\"{anchor}\"",
                suite = rec.suite,
                identity = r.identity,
                samples = r.samples,
                max = r.max_residual,
                mean = r.mean_residual,
                tol = r.tolerance,
                seed = r.seed,
                anchor = r.anchor,
            )?;
            if !r.passed && !rec.diagnostic {
                for f in &r.failures {
                    writeln!(
                        out,
                        "       residual {res:.3e} at {point:?} indices {idx:?}",
                        res = f.residual,
                        point = f.point,
                        idx = f.indices,
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// Exit-status contribution: true iff every non-diagnostic record passed.
pub fn all_passed(records: &[Record]) -> bool {
    records
        .iter()
        .filter(|r| !r.diagnostic)
        .all(|r| r.report.passed)
}
