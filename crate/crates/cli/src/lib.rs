//! Library side of the `warpgeo` CLI: scene-file parsing, suite dispatch
//! and record emission. The binary in `main.rs` is a thin wrapper so the
//! integration tests can drive everything in-process too.

pub mod catalog;
pub mod report;
pub mod scene;
pub mod suites;

use std::path::Path;

use warpgeo_core::verify::CheckOpts;

use scene::{SceneSpec, SpecError};

/// Resolves a spec argument: an existing file wins, otherwise a built-in
/// catalog name (with or without the `.scene` suffix).
pub fn resolve_spec(arg: &str) -> Result<SceneSpec, SpecError> {
    let path = Path::new(arg);
    if path.exists() {
        return scene::load_spec(path);
    }
    if let Some(text) = catalog::lookup(arg) {
        return scene::load_spec_text(text);
    }
    Err(SpecError {
        line: 0,
        column: None,
        message: format!(
            "`{arg}` is neither a readable file nor a built-in scene (try --list-catalog)"
        ),
    })
}

/// Flag overrides applied on top of the spec's own defaults.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub fd_h: Option<f64>,
    pub tol: Option<f64>,
}

pub fn check_opts(spec: &SceneSpec, overrides: &Overrides) -> CheckOpts {
    let d = &spec.defaults;
    CheckOpts {
        samples: overrides.samples.unwrap_or(d.samples),
        seed: overrides.seed.unwrap_or(d.seed),
        fd_first: overrides.fd_h.unwrap_or(d.fd_h),
        fd_curvature: d.fd_h_curvature,
        tol_override: overrides.tol.or(d.tol),
    }
}
