//! Named geometries, their parameters and the check suites run on them.

mod builders;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::error::GeomError;
use crate::geometry::{FdConfig, FdOrder};
use crate::verify::{CheckResult, EngineConfig, VerificationReport, CURVATURE_TOL, DEFAULT_SAMPLES};

/// Largest manifold dimension the runner accepts.
pub const MAX_DIM: usize = 9;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0:?} (try --list)")]
    UnknownScenario(String),
    #[error("invalid parameter {name} = {value}: accepted {accepted}")]
    InvalidParameter {
        name: String,
        value: String,
        accepted: String,
    },
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl ScenarioError {
    /// 2 for usage and parameter problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::UnknownScenario(_) | ScenarioError::InvalidParameter { .. } => 2,
            ScenarioError::Geometry(GeomError::ParameterConstraintViolated(_))
            | ScenarioError::Geometry(GeomError::InvalidGSParameters(_)) => 2,
            _ => 1,
        }
    }
}

pub type ScenarioResult<T> = std::result::Result<T, ScenarioError>;

/// One tunable parameter with its default and accepted closed range.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    pub integer: bool,
    pub help: &'static str,
}

impl ParamSpec {
    const fn real(name: &'static str, default: f64, min: f64, max: f64, help: &'static str) -> Self {
        Self { name, default, min, max, integer: false, help }
    }

    const fn int(name: &'static str, default: usize, min: usize, max: usize, help: &'static str) -> Self {
        Self { name, default: default as f64, min: min as f64, max: max as f64, integer: true, help }
    }

    fn accepted(&self) -> String {
        let kind = if self.integer { "integer" } else { "real" };
        format!("{kind} in [{}, {}]", self.min, self.max)
    }

    fn validate(&self, v: f64) -> ScenarioResult<f64> {
        let ok = v.is_finite() && v >= self.min && v <= self.max && (!self.integer || v.fract() == 0.0);
        if ok {
            Ok(v)
        } else {
            Err(ScenarioError::InvalidParameter {
                name: self.name.into(),
                value: v.to_string(),
                accepted: self.accepted(),
            })
        }
    }
}

type Builder = fn(&Ctx) -> ScenarioResult<Suite>;

/// A registered scenario.
#[derive(Clone)]
pub struct Scenario {
    pub id: &'static str,
    pub description: &'static str,
    pub params: Vec<ParamSpec>,
    /// Subject to `n >= m + 3 >= 8` unless relaxed.
    pub theorem_level: bool,
    build: Builder,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario").field("id", &self.id).field("params", &self.params).finish()
    }
}

/// Resolved parameter values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params {
    values: BTreeMap<String, f64>,
    integer: BTreeMap<String, bool>,
}

impl Params {
    pub fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    pub fn int(&self, name: &str) -> usize {
        self.values[name] as usize
    }

    fn to_json(&self) -> BTreeMap<String, serde_json::Value> {
        self.values
            .iter()
            .map(|(k, &v)| {
                let j = if self.integer[k] { serde_json::json!(v as i64) } else { serde_json::json!(v) };
                (k.clone(), j)
            })
            .collect()
    }
}

/// Engine settings shared by every check of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub samples: usize,
    pub fd: FdConfig,
    pub seed: u64,
    /// Tolerance of curvature-level checks; first-derivative checks keep
    /// their own fixed tolerances.
    pub curvature_tol: f64,
    pub relax: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            fd: FdConfig::default(),
            seed: 1,
            curvature_tol: CURVATURE_TOL,
            relax: false,
        }
    }
}

impl RunConfig {
    fn engine(&self) -> EngineConfig {
        EngineConfig {
            fd_step: self.fd.step,
            fd_order: match self.fd.order {
                FdOrder::Second => 2,
                FdOrder::Fourth => 4,
            },
            seed: self.seed,
            samples: self.samples,
            curvature_tol: self.curvature_tol,
        }
    }
}

/// What a builder sees.
pub struct Ctx<'a> {
    pub params: &'a Params,
    pub run: &'a RunConfig,
}

/// Checks in declaration order plus per-sample columns on the primary points.
#[derive(Debug, Default)]
struct Suite {
    checks: Vec<CheckResult>,
    coord_names: Vec<String>,
    points: Vec<Vec<f64>>,
    columns: Vec<(String, Vec<f64>)>,
}

impl Suite {
    fn new(coord_names: &[String], points: Vec<Vec<f64>>) -> Self {
        Self {
            coord_names: coord_names.to_vec(),
            points,
            ..Self::default()
        }
    }

    fn push(&mut self, c: CheckResult) {
        self.checks.push(c);
    }

    /// Pushes a check whose residuals are indexed like the primary points.
    fn push_column(&mut self, c: CheckResult) {
        debug_assert_eq!(c.residuals.len(), self.points.len());
        self.columns.push((c.check_id.clone(), c.residuals.clone()));
        self.checks.push(c);
    }

    fn column(&mut self, name: &str, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.points.len());
        self.columns.push((name.into(), values));
    }
}

/// Delimiter-separated per-sample table.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DumpTable {
    /// Comma-separated, header first, rows sorted by the first column.
    pub fn to_csv(&self) -> String {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// A finished run.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub report: VerificationReport,
    pub dump: DumpTable,
}

pub fn registry() -> Vec<Scenario> {
    builders::registry()
}

pub fn find_scenario(id: &str) -> ScenarioResult<Scenario> {
    registry()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| ScenarioError::UnknownScenario(id.into()))
}

/// Plain-text table of ids, descriptions and parameter defaults.
pub fn list_scenarios() -> String {
    let mut out = String::new();
    for s in registry() {
        let _ = writeln!(out, "{:<22} {}", s.id, s.description);
        for p in &s.params {
            let _ = writeln!(out, "    {:<8} = {:<8} {} ({})", p.name, p.default, p.help, p.accepted());
        }
    }
    out
}

/// Parses a `key=value` override.
pub fn parse_override(s: &str) -> ScenarioResult<(String, f64)> {
    let bad = |msg: &str| ScenarioError::InvalidParameter {
        name: s.split('=').next().unwrap_or("").trim().to_string(),
        value: s.to_string(),
        accepted: msg.into(),
    };
    let (k, v) = s.split_once('=').ok_or_else(|| bad("key=value"))?;
    let k = k.trim();
    if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(bad("key of letters, digits and '_'"));
    }
    let v: f64 = v.trim().parse().map_err(|_| bad("a number"))?;
    if !v.is_finite() {
        return Err(bad("a finite number"));
    }
    Ok((k.to_string(), v))
}

/// Defaults overlaid with `overrides`, range-checked, plus the dimension
/// hypotheses of theorem-level scenarios unless `relax`.
pub fn resolve_params(sc: &Scenario, overrides: &[(String, f64)], relax: bool) -> ScenarioResult<Params> {
    let mut params = Params::default();
    for p in &sc.params {
        params.values.insert(p.name.into(), p.default);
        params.integer.insert(p.name.into(), p.integer);
    }
    for (k, v) in overrides {
        let spec = sc.params.iter().find(|p| p.name == k).ok_or_else(|| ScenarioError::InvalidParameter {
            name: k.clone(),
            value: v.to_string(),
            accepted: format!(
                "one of [{}]",
                sc.params.iter().map(|p| p.name).collect::<Vec<_>>().join(", ")
            ),
        })?;
        params.values.insert(k.clone(), spec.validate(*v)?);
    }
    if let (Some(&n), Some(&m)) = (params.values.get("n"), params.values.get("m")) {
        let (n, m) = (n as usize, m as usize);
        let dim_err = |accepted: String| ScenarioError::InvalidParameter {
            name: "n".into(),
            value: format!("{n} (m = {m})"),
            accepted,
        };
        if n < m + 2 {
            return Err(dim_err("n >= m + 2".into()));
        }
        if sc.theorem_level && !relax && (m < 5 || n < m + 3) {
            return Err(dim_err("n >= m + 3 >= 8 (use --relax to go below)".into()));
        }
    }
    Ok(params)
}

/// Builds and checks a scenario without touching the filesystem.
pub fn evaluate(id: &str, overrides: &[(String, f64)], run: &RunConfig) -> ScenarioResult<ScenarioOutput> {
    let sc = find_scenario(id)?;
    if run.samples == 0 {
        return Err(ScenarioError::InvalidParameter {
            name: "samples".into(),
            value: "0".into(),
            accepted: "a positive integer".into(),
        });
    }
    if !(run.curvature_tol > 0.0 && run.curvature_tol.is_finite()) {
        return Err(ScenarioError::InvalidParameter {
            name: "tol".into(),
            value: run.curvature_tol.to_string(),
            accepted: "a positive real".into(),
        });
    }
    let params = resolve_params(&sc, overrides, run.relax)?;
    let suite = (sc.build)(&Ctx { params: &params, run })?;
    let mut columns = suite.coord_names.clone();
    columns.extend(suite.columns.iter().map(|c| c.0.clone()));
    let rows = suite
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut r = p.clone();
            r.extend(suite.columns.iter().map(|c| c.1[i]));
            r
        })
        .collect();
    let report = VerificationReport::new(sc.id, params.to_json(), suite.checks, run.engine());
    Ok(ScenarioOutput {
        report,
        dump: DumpTable { columns, rows },
    })
}

/// Runs a scenario and writes its report to `out_path` (if any).
pub fn run_scenario(
    id: &str,
    overrides: &[(String, f64)],
    run: &RunConfig,
    out_path: Option<&Path>,
) -> ScenarioResult<VerificationReport> {
    let out = evaluate(id, overrides, run)?;
    if let Some(path) = out_path {
        write_atomic(path, &out.report.to_json()?)?;
    }
    Ok(out.report)
}

/// Runs a scenario and writes the per-sample table to `out_path`.
pub fn dump_samples(
    id: &str,
    overrides: &[(String, f64)],
    run: &RunConfig,
    out_path: &Path,
) -> ScenarioResult<DumpTable> {
    let out = evaluate(id, overrides, run)?;
    write_atomic(out_path, &out.dump.to_csv())?;
    Ok(out.dump)
}

/// Temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, text: &str) -> ScenarioResult<()> {
    let io = |e: std::io::Error| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
