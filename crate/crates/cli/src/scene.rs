//! Scene-file loading: a line-oriented format with three sections that
//! assembles a validated [`warpgeo_core::warped::WarpedProductScene`].
//!
//! ```text
//! # comments start with '#'
//! [scene]
//! c = 0.5              # cross-term constant (required)
//! f1 = x0              # warping expression on the base chart (required)
//! f2 = 1 + x0          # warping expression on the fiber chart (required)
//! seed = 42            # optional; default 42
//! samples = 100        # optional; default 100
//! fd_h = 1e-5          # optional first-derivative step
//! fd_h_curvature = 1e-4  # optional nested-derivative step
//! tol = 1e-6           # optional tolerance override for every report
//! suites = conjugacy curvature   # optional default suite list
//!
//! [base]               # and [fiber], same keys
//! dim = 2              # required
//! box = 0.5 2.0        # optional interval for all coordinates, or
//! box0 = 0.5 2.0       # per-coordinate overrides
//! g00 = x0^2           # metric entries, upper triangle; diagonal
//! g11 = x1^2           # entries required, off-diagonal default 0
//! conn000 = 0          # optional connection coefficients gamma^k_{ij}
//! conn_star000 = 2/x0  # optional conjugate coefficients
//! torsion_free = true  # optional; default false
//! ```
//!
//! Expressions use the chart's own coordinates `x0..x(dim-1)`; the fiber's
//! variables are re-indexed internally when lifted to the product. Unknown
//! keys are rejected. Errors carry `line` (1-based) and, for expression
//! errors, the column of the offending byte.

use std::collections::BTreeMap;
use std::fmt;

use warpgeo_core::manifold::{default_box, ChartManifold, ConnectionExprField, MetricField};
use warpgeo_core::{Expr64, GeomError, Scene64};

/// Error with file position, suitable for exit-status 2 reporting.
#[derive(Debug, Clone)]
pub struct SpecError {
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(col) => write!(f, "line {}, column {}: {}", self.line, col, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

impl std::error::Error for SpecError {}

fn err(line: usize, message: impl Into<String>) -> SpecError {
    SpecError {
        line,
        column: None,
        message: message.into(),
    }
}

/// Suite knobs parsed from the `[scene]` section.
#[derive(Debug, Clone)]
pub struct RunDefaults {
    pub seed: u64,
    pub samples: usize,
    pub fd_h: f64,
    pub fd_h_curvature: f64,
    pub tol: Option<f64>,
    pub suites: Vec<String>,
}

impl Default for RunDefaults {
    fn default() -> Self {
        RunDefaults {
            seed: 42,
            samples: 100,
            fd_h: warpgeo_core::tensor::FD_STEP_FIRST,
            fd_h_curvature: warpgeo_core::tensor::FD_STEP_CURVATURE,
            tol: None,
            suites: vec!["all".to_string()],
        }
    }
}

/// A fully validated scene spec: the assembled scene plus run defaults.
#[derive(Debug)]
pub struct SceneSpec {
    pub scene: Scene64,
    pub defaults: RunDefaults,
}

#[derive(Default)]
struct RawSection {
    // key -> (line, value-column, value)
    entries: BTreeMap<String, (usize, usize, String)>,
}

fn split_sections(text: &str) -> Result<BTreeMap<String, RawSection>, SpecError> {
    let mut sections: BTreeMap<String, RawSection> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !matches!(name.as_str(), "scene" | "base" | "fiber") {
                return Err(err(line_no, format!("unknown section `[{name}]`")));
            }
            if sections.contains_key(&name) {
                return Err(err(line_no, format!("duplicate section `[{name}]`")));
            }
            sections.insert(name.clone(), RawSection::default());
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(line_no, format!("expected `key = value`, got `{trimmed}`")));
        };
        let section = current
            .as_ref()
            .ok_or_else(|| err(line_no, "key outside of any [section]"))?;
        let key_name = key.trim().to_string();
        let value_col = line.find('=').unwrap() + 1 + (value.len() - value.trim_start().len()) + 1;
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(err(line_no, format!("key `{key_name}` has an empty value")));
        }
        let section = sections.get_mut(section).unwrap();
        if section
            .entries
            .insert(key_name.clone(), (line_no, value_col, value))
            .is_some()
        {
            return Err(err(line_no, format!("duplicate key `{key_name}`")));
        }
    }
    for required in ["scene", "base", "fiber"] {
        if !sections.contains_key(required) {
            return Err(err(0, format!("missing required section `[{required}]`")));
        }
    }
    Ok(sections)
}

fn parse_expr(
    text: &str,
    arity: usize,
    line: usize,
    col: usize,
    what: &str,
) -> Result<Expr64, SpecError> {
    Expr64::parse(text, arity).map_err(|e| SpecError {
        line,
        column: Some(col + e.offset),
        message: format!("{what}: {e}"),
    })
}

fn parse_num<T: std::str::FromStr>(
    value: &str,
    line: usize,
    what: &str,
) -> Result<T, SpecError> {
    value
        .parse()
        .map_err(|_| err(line, format!("{what}: cannot parse `{value}`")))
}

fn parse_interval(value: &str, line: usize, key: &str) -> Result<(f64, f64), SpecError> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(err(line, format!("`{key}` needs two numbers, e.g. `0.5 2.0`")));
    }
    let lo: f64 = parse_num(parts[0], line, key)?;
    let hi: f64 = parse_num(parts[1], line, key)?;
    if lo >= hi || !lo.is_finite() || !hi.is_finite() {
        return Err(err(line, format!("`{key}` interval is empty: {lo} >= {hi}")));
    }
    Ok((lo, hi))
}

/// Splits a key like `g01` / `conn012` / `conn_star012` into its digit
/// indices. Dimensions are single-digit by construction (charts here are
/// small), which keeps the keys unambiguous.
fn digit_indices(tail: &str, count: usize) -> Option<Vec<usize>> {
    if tail.len() != count || !tail.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(tail.bytes().map(|b| (b - b'0') as usize).collect())
}

fn build_factor(section: &RawSection, label: &str) -> Result<ChartManifold<f64>, SpecError> {
    let (dim_line, _, dim_value) = section
        .entries
        .get("dim")
        .ok_or_else(|| err(0, format!("[{label}] is missing `dim`")))?;
    let dim: usize = parse_num(dim_value, *dim_line, "dim")?;
    if dim == 0 || dim > 9 {
        return Err(err(*dim_line, "dim must be between 1 and 9"));
    }

    let mut boxes = default_box::<f64>(dim);
    let mut metric_entries: BTreeMap<(usize, usize), (usize, usize, String)> = BTreeMap::new();
    let mut conn_entries: BTreeMap<(usize, usize, usize), (usize, usize, String)> = BTreeMap::new();
    let mut star_entries: BTreeMap<(usize, usize, usize), (usize, usize, String)> = BTreeMap::new();
    let mut torsion_free = false;

    for (key, (line, col, value)) in &section.entries {
        let (line, col) = (*line, *col);
        match key.as_str() {
            "dim" => {}
            "box" => {
                let interval = parse_interval(value, line, "box")?;
                boxes = vec![interval; dim];
            }
            "torsion_free" => {
                torsion_free = match value.as_str() {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(err(line, format!("torsion_free must be true/false, got `{other}`")))
                    }
                };
            }
            k if k.starts_with("box") => {
                let Some(idx) = digit_indices(&k[3..], 1) else {
                    return Err(err(line, format!("unknown key `{k}` in [{label}]")));
                };
                if idx[0] >= dim {
                    return Err(err(line, format!("`{k}` indexes past dim = {dim}")));
                }
                boxes[idx[0]] = parse_interval(value, line, k)?;
            }
            k if k.starts_with("conn_star") => {
                let Some(idx) = digit_indices(&k[9..], 3) else {
                    return Err(err(line, format!("unknown key `{k}` in [{label}]")));
                };
                if idx.iter().any(|&i| i >= dim) {
                    return Err(err(line, format!("`{k}` indexes past dim = {dim}")));
                }
                star_entries.insert((idx[0], idx[1], idx[2]), (line, col, value.clone()));
            }
            k if k.starts_with("conn") => {
                let Some(idx) = digit_indices(&k[4..], 3) else {
                    return Err(err(line, format!("unknown key `{k}` in [{label}]")));
                };
                if idx.iter().any(|&i| i >= dim) {
                    return Err(err(line, format!("`{k}` indexes past dim = {dim}")));
                }
                conn_entries.insert((idx[0], idx[1], idx[2]), (line, col, value.clone()));
            }
            k if k.starts_with('g') => {
                let Some(idx) = digit_indices(&k[1..], 2) else {
                    return Err(err(line, format!("unknown key `{k}` in [{label}]")));
                };
                let (i, j) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
                if j >= dim {
                    return Err(err(line, format!("`{k}` indexes past dim = {dim}")));
                }
                if metric_entries
                    .insert((i, j), (line, col, value.clone()))
                    .is_some()
                {
                    return Err(err(line, format!("metric entry ({i},{j}) given twice")));
                }
            }
            other => {
                return Err(err(line, format!("unknown key `{other}` in [{label}]")));
            }
        }
    }

    for i in 0..dim {
        if !metric_entries.contains_key(&(i, i)) {
            return Err(err(
                *dim_line,
                format!("[{label}] is missing the diagonal metric entry g{i}{i}"),
            ));
        }
    }

    let mut metric_result: Result<(), SpecError> = Ok(());
    let metric = MetricField::from_fn_upper(dim, |i, j| {
        match metric_entries.get(&(i, j)) {
            Some((line, col, text)) => {
                match parse_expr(text, dim, *line, *col, &format!("metric entry g{i}{j}")) {
                    Ok(e) => Ok(e),
                    Err(e) => {
                        if metric_result.is_ok() {
                            metric_result = Err(e);
                        }
                        Ok(Expr64::parse("0", dim).unwrap())
                    }
                }
            }
            None => Ok(Expr64::parse("0", dim).unwrap()),
        }
    })
    .map_err(|e| err(*dim_line, format!("[{label}] metric: {e}")))?;
    metric_result?;

    let build_conn = |entries: &BTreeMap<(usize, usize, usize), (usize, usize, String)>,
                      name: &str|
     -> Result<Option<ConnectionExprField<f64>>, SpecError> {
        if entries.is_empty() {
            return Ok(None);
        }
        let mut parse_failure: Option<SpecError> = None;
        let field = ConnectionExprField::from_fn(dim, torsion_free, |k, i, j| {
            match entries.get(&(k, i, j)) {
                Some((line, col, text)) => {
                    match parse_expr(text, dim, *line, *col, &format!("{name}{k}{i}{j}")) {
                        Ok(e) => Ok(e),
                        Err(e) => {
                            if parse_failure.is_none() {
                                parse_failure = Some(e);
                            }
                            Ok(Expr64::parse("0", dim).unwrap())
                        }
                    }
                }
                None => Ok(Expr64::parse("0", dim).unwrap()),
            }
        })
        .map_err(|e| err(*dim_line, format!("[{label}] {name}: {e}")))?;
        if let Some(e) = parse_failure {
            return Err(e);
        }
        Ok(Some(field))
    };

    let conn = build_conn(&conn_entries, "conn")?;
    let conn_star = build_conn(&star_entries, "conn_star")?;

    ChartManifold::new(metric, conn, conn_star, boxes)
        .map_err(|e| err(*dim_line, format!("[{label}] failed validation: {e}")))
}

/// Loads and fully validates a scene spec from text.
pub fn load_spec_text(text: &str) -> Result<SceneSpec, SpecError> {
    let sections = split_sections(text)?;
    let scene_section = &sections["scene"];

    let mut defaults = RunDefaults::default();
    let mut c: Option<f64> = None;
    let mut f1_raw: Option<(usize, usize, String)> = None;
    let mut f2_raw: Option<(usize, usize, String)> = None;
    for (key, (line, col, value)) in &scene_section.entries {
        let (line, col) = (*line, *col);
        match key.as_str() {
            "c" => c = Some(parse_num(value, line, "c")?),
            "f1" => f1_raw = Some((line, col, value.clone())),
            "f2" => f2_raw = Some((line, col, value.clone())),
            "seed" => defaults.seed = parse_num(value, line, "seed")?,
            "samples" => defaults.samples = parse_num(value, line, "samples")?,
            "fd_h" => defaults.fd_h = parse_num(value, line, "fd_h")?,
            "fd_h_curvature" => defaults.fd_h_curvature = parse_num(value, line, "fd_h_curvature")?,
            "tol" => defaults.tol = Some(parse_num(value, line, "tol")?),
            "suites" => {
                defaults.suites = value
                    .split(|ch: char| ch.is_whitespace() || ch == ',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.to_string())
                    .collect();
                if defaults.suites.is_empty() {
                    return Err(err(line, "`suites` must name at least one suite"));
                }
            }
            other => return Err(err(line, format!("unknown key `{other}` in [scene]"))),
        }
    }
    let c = c.ok_or_else(|| err(0, "[scene] is missing `c`"))?;
    let (f1_line, f1_col, f1_text) = f1_raw.ok_or_else(|| err(0, "[scene] is missing `f1`"))?;
    let (f2_line, f2_col, f2_text) = f2_raw.ok_or_else(|| err(0, "[scene] is missing `f2`"))?;

    let base = build_factor(&sections["base"], "base")?;
    let fiber = build_factor(&sections["fiber"], "fiber")?;

    let f1 = parse_expr(&f1_text, base.dim(), f1_line, f1_col, "f1")?;
    let f2 = parse_expr(&f2_text, fiber.dim(), f2_line, f2_col, "f2")?;

    let scene = Scene64::new(base, fiber, f1, f2, c).map_err(|e| match e {
        GeomError::Validation(msg) => err(f1_line, format!("scene validation: {msg}")),
        other => err(f1_line, format!("scene validation: {other}")),
    })?;

    Ok(SceneSpec { scene, defaults })
}

/// Loads a spec from a file path.
pub fn load_spec(path: &std::path::Path) -> Result<SceneSpec, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|e| SpecError {
        line: 0,
        column: None,
        message: format!("cannot read `{}`: {e}", path.display()),
    })?;
    load_spec_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[scene]
c = 0.5
f1 = x0
f2 = 1

[base]
dim = 1
g00 = 1

[fiber]
dim = 1
g00 = 1
";

    #[test]
    fn minimal_spec_loads() {
        let spec = load_spec_text(MINIMAL).unwrap();
        assert_eq!(spec.scene.m1(), 1);
        assert_eq!(spec.scene.m2(), 1);
        assert_eq!(spec.defaults.seed, 42);
    }

    #[test]
    fn catalog_flat_linear_loads_and_is_admissible() {
        let text = crate::catalog::lookup("flat_linear").unwrap();
        let spec = load_spec_text(text).unwrap();
        // f2 is constant here, so b2 = 0 and the condition value is 0
        // at every probe point.
        let cond = spec.scene.metric_condition(&[1.0], &[1.0, 1.0]).unwrap();
        assert!(cond.admissible);
        assert_eq!(cond.value, 0.0);
    }

    #[test]
    fn non_positive_warping_is_a_validation_error() {
        let text = MINIMAL.replace("f1 = x0", "f1 = -x0");
        let err = load_spec_text(&text).unwrap_err();
        assert!(err.message.contains("not positive"), "{err}");
    }

    #[test]
    fn out_of_arity_metric_entry_is_located() {
        let text = "\
[scene]
c = 0.5
f1 = x0
f2 = 1

[base]
dim = 2
g00 = 1
g11 = x2

[fiber]
dim = 1
g00 = 1
";
        let err = load_spec_text(text).unwrap_err();
        assert_eq!(err.line, 9);
        assert!(err.message.contains("out of range"), "{err}");
        assert!(err.column.is_some());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("g00 = 1\n\n[fiber]", "g00 = 1\nwarp = 2\n\n[fiber]");
        let err = load_spec_text(&text).unwrap_err();
        assert!(err.message.contains("unknown key"), "{err}");

        let text = MINIMAL.replace("c = 0.5", "c = 0.5\nspeed = 9");
        let err = load_spec_text(&text).unwrap_err();
        assert!(err.message.contains("unknown key `speed`"), "{err}");
    }

    #[test]
    fn duplicate_and_missing_entries_are_rejected() {
        let text = MINIMAL.replace("c = 0.5", "c = 0.5\nc = 0.7");
        let err = load_spec_text(&text).unwrap_err();
        assert!(err.message.contains("duplicate key"), "{err}");

        let text = MINIMAL.replace("g00 = 1\n\n[fiber]", "\n[fiber]");
        let err = load_spec_text(&text).unwrap_err();
        assert!(err.message.contains("missing the diagonal"), "{err}");
    }

    #[test]
    fn expression_syntax_errors_carry_line_and_column() {
        let text = MINIMAL.replace("f1 = x0", "f1 = 2*+x0");
        let err = load_spec_text(&text).unwrap_err();
        assert_eq!(err.line, 3);
        // Column points at the offending byte inside the value.
        assert!(err.column.unwrap() > 5);
    }

    #[test]
    fn every_catalog_scene_parses() {
        for (name, text) in crate::catalog::CATALOG {
            let spec = load_spec_text(text)
                .unwrap_or_else(|e| panic!("catalog scene `{name}` failed to load: {e}"));
            assert!(spec.scene.dim() >= 2);
        }
    }
}
