//! Scenario files: JSON with a version, an optional seed, and a list of
//! checks. Every check is fully validated before any numeric work starts.

use plateau_core::forms::{builtin_default_dimension, BUILTIN_FORMS};
use plateau_core::volumes::BUILTIN_FAMILIES;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported scenario version {got}; this build reads version {want}")]
    Version { got: u32, want: u32 },
    #[error("check {index}: expected an object with a string `kind` field")]
    MissingKind { index: usize },
    #[error("check {index}: unknown kind '{kind}'")]
    UnknownKind { index: usize, kind: String },
    #[error("check {index} ({kind}): {source}")]
    BadParams {
        index: usize,
        kind: String,
        source: serde_json::Error,
    },
    #[error("check {index} ({kind}): {message}")]
    Invalid {
        index: usize,
        kind: String,
        message: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub version: u32,
    pub seed: Option<u64>,
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum CheckSpec {
    NormalForm(NormalFormSpec),
    Sweep(SweepSpec),
    MetricCheck(MetricSpec),
    Period(PeriodSpec),
    Obstruction(ObstructionSpec),
    VolumeScan(VolumeScanSpec),
    GapCheck(GapSpec),
}

fn d_count() -> usize {
    50
}
fn d_max_dim() -> usize {
    4
}
fn d_nf_tol() -> f64 {
    1e-8
}

/// Random strictly plurisubharmonic jets: canonical invariants must not
/// move under unitary changes of frame, and the Hessian index must match
/// the eigenvalue-count oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormSpec {
    pub kind: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "d_count")]
    pub count: usize,
    #[serde(default = "d_max_dim")]
    pub max_dim: usize,
    #[serde(default = "d_nf_tol")]
    pub tol: f64,
}

fn d_dimension() -> usize {
    2
}
fn d_t_steps() -> usize {
    100
}
fn d_samples_per_slice() -> usize {
    500
}

/// Continuity-principle sweep through the quadric slice family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "d_dimension")]
    pub dimension: usize,
    pub delta0: f64,
    #[serde(default = "d_t_steps")]
    pub t_steps: usize,
    #[serde(default = "d_samples_per_slice")]
    pub samples_per_slice: usize,
}

fn d_samples() -> usize {
    100
}
fn d_metric_tol() -> f64 {
    1e-9
}
fn d_true() -> bool {
    true
}
fn d_inner() -> f64 {
    0.75
}
fn d_outer() -> f64 {
    1.5
}

/// Samples dd^c of a registered form over a shell and compares the verdict
/// with the expectation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub kind: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub form: String,
    #[serde(default)]
    pub dimension: Option<usize>,
    #[serde(default = "d_samples")]
    pub samples: usize,
    #[serde(default = "d_metric_tol")]
    pub tol: f64,
    #[serde(default = "d_true")]
    pub expect_pluriclosed: bool,
    #[serde(default = "d_inner")]
    pub inner: f64,
    #[serde(default = "d_outer")]
    pub outer: f64,
}

fn d_radius() -> f64 {
    1.0
}
fn d_center4() -> [f64; 4] {
    [0.0; 4]
}
fn d_outward() -> String {
    "outward".to_string()
}
fn d_period_grid() -> usize {
    64
}
fn d_rel_tol() -> f64 {
    1e-3
}

/// Integrates d^c of a registered form over a 3-sphere.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodSpec {
    pub kind: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub form: String,
    #[serde(default = "d_center4")]
    pub center: [f64; 4],
    #[serde(default = "d_radius")]
    pub radius: f64,
    #[serde(default = "d_outward")]
    pub orientation: String,
    #[serde(default = "d_period_grid")]
    pub grid: usize,
    #[serde(default)]
    pub expect_abs: Option<f64>,
    #[serde(default = "d_rel_tol")]
    pub tol_rel: f64,
}

fn d_obstruction_grid() -> usize {
    32
}

/// Shell-obstruction verdict for a sphere contour against a registered form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstructionSpec {
    pub kind: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub form: String,
    #[serde(default = "d_center4")]
    pub center: [f64; 4],
    #[serde(default = "d_radius")]
    pub radius: f64,
    #[serde(default = "d_obstruction_grid")]
    pub grid: usize,
    #[serde(default = "d_rel_tol")]
    pub tol: f64,
    #[serde(default)]
    pub expect: Option<String>,
}

fn d_slope_tol() -> f64 {
    0.05
}
fn d_volume_tol() -> f64 {
    1e-4
}

/// Graph-volume scan of a registered disc family with boundedness and
/// divergence-slope expectations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeScanSpec {
    pub kind: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub family: String,
    /// Parameters as (re, im) pairs.
    pub parameters: Vec<[f64; 2]>,
    pub c0: f64,
    #[serde(default)]
    pub expect_bounded: Option<bool>,
    #[serde(default)]
    pub expect_slope: Option<f64>,
    #[serde(default = "d_slope_tol")]
    pub slope_tol_rel: f64,
    #[serde(default)]
    pub expect_volumes: Option<Vec<f64>>,
    #[serde(default = "d_volume_tol")]
    pub volume_tol_rel: f64,
}

/// Pairwise volume-gap condition over a parameter window.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapSpec {
    pub kind: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub family: String,
    /// Parameters as (re, im) pairs.
    pub parameters: Vec<[f64; 2]>,
    pub nu: f64,
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default)]
    pub expect_pass: Option<bool>,
}

impl CheckSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckSpec::NormalForm(_) => "normal-form",
            CheckSpec::Sweep(_) => "sweep",
            CheckSpec::MetricCheck(_) => "metric-check",
            CheckSpec::Period(_) => "period",
            CheckSpec::Obstruction(_) => "obstruction",
            CheckSpec::VolumeScan(_) => "volume-scan",
            CheckSpec::GapCheck(_) => "gap-check",
        }
    }

    pub fn name(&self, index: usize) -> String {
        let given = match self {
            CheckSpec::NormalForm(s) => &s.name,
            CheckSpec::Sweep(s) => &s.name,
            CheckSpec::MetricCheck(s) => &s.name,
            CheckSpec::Period(s) => &s.name,
            CheckSpec::Obstruction(s) => &s.name,
            CheckSpec::VolumeScan(s) => &s.name,
            CheckSpec::GapCheck(s) => &s.name,
        };
        given
            .clone()
            .unwrap_or_else(|| format!("{}-{}", self.kind(), index))
    }

    pub fn seed_override(&self) -> Option<u64> {
        match self {
            CheckSpec::NormalForm(s) => s.seed,
            CheckSpec::Sweep(s) => s.seed,
            CheckSpec::MetricCheck(s) => s.seed,
            CheckSpec::Period(s) => s.seed,
            CheckSpec::Obstruction(s) => s.seed,
            CheckSpec::VolumeScan(s) => s.seed,
            CheckSpec::GapCheck(s) => s.seed,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            CheckSpec::NormalForm(s) => {
                if s.count == 0 {
                    return Err("count must be positive".into());
                }
                if !(2..=8).contains(&s.max_dim) {
                    return Err(format!("max_dim must lie in 2..=8, got {}", s.max_dim));
                }
                positive(s.tol, "tol")
            }
            CheckSpec::Sweep(s) => {
                if !(s.delta0 > 0.0 && s.delta0 < 1.0) {
                    return Err(format!("delta0 must lie in (0, 1), got {}", s.delta0));
                }
                if s.dimension < 2 {
                    return Err(format!("dimension must be at least 2, got {}", s.dimension));
                }
                if s.t_steps < 2 {
                    return Err(format!("t_steps must be at least 2, got {}", s.t_steps));
                }
                if s.samples_per_slice < 4 {
                    return Err(format!(
                        "samples_per_slice must be at least 4, got {}",
                        s.samples_per_slice
                    ));
                }
                Ok(())
            }
            CheckSpec::MetricCheck(s) => {
                known_form(&s.form)?;
                metric_dimension(s)?;
                if s.samples == 0 {
                    return Err("samples must be positive".into());
                }
                positive(s.tol, "tol")?;
                if !(s.inner > 0.0 && s.inner < s.outer && s.outer.is_finite()) {
                    return Err(format!(
                        "shell must satisfy 0 < inner < outer, got {} and {}",
                        s.inner, s.outer
                    ));
                }
                Ok(())
            }
            CheckSpec::Period(s) => {
                planar_form(&s.form)?;
                positive(s.radius, "radius")?;
                if s.orientation != "outward" && s.orientation != "inward" {
                    return Err(format!(
                        "orientation must be 'outward' or 'inward', got '{}'",
                        s.orientation
                    ));
                }
                if s.grid < 4 {
                    return Err(format!("grid must be at least 4, got {}", s.grid));
                }
                positive(s.tol_rel, "tol_rel")?;
                if let Some(e) = s.expect_abs {
                    positive(e, "expect_abs")?;
                }
                Ok(())
            }
            CheckSpec::Obstruction(s) => {
                planar_form(&s.form)?;
                positive(s.radius, "radius")?;
                if s.grid < 4 {
                    return Err(format!("grid must be at least 4, got {}", s.grid));
                }
                if !(s.tol >= 0.0) {
                    return Err(format!("tol must be nonnegative, got {}", s.tol));
                }
                if let Some(e) = &s.expect {
                    if e != "shell_obstruction" && e != "no_obstruction" {
                        return Err(format!(
                            "expect must be 'shell_obstruction' or 'no_obstruction', got '{e}'"
                        ));
                    }
                }
                Ok(())
            }
            CheckSpec::VolumeScan(s) => {
                known_family(&s.family)?;
                if s.parameters.is_empty() {
                    return Err("parameters must be nonempty".into());
                }
                if !s.c0.is_finite() {
                    return Err(format!("c0 must be finite, got {}", s.c0));
                }
                positive(s.slope_tol_rel, "slope_tol_rel")?;
                positive(s.volume_tol_rel, "volume_tol_rel")?;
                if let Some(slope) = s.expect_slope {
                    if !slope.is_finite() || slope == 0.0 {
                        return Err(format!("expect_slope must be finite nonzero, got {slope}"));
                    }
                }
                if let Some(v) = &s.expect_volumes {
                    if v.len() != s.parameters.len() {
                        return Err(format!(
                            "expect_volumes has {} entries for {} parameters",
                            v.len(),
                            s.parameters.len()
                        ));
                    }
                    if let Some(bad) = v.iter().find(|x| !(**x > 0.0)) {
                        return Err(format!("expect_volumes entries must be positive, got {bad}"));
                    }
                }
                Ok(())
            }
            CheckSpec::GapCheck(s) => {
                known_family(&s.family)?;
                if s.parameters.is_empty() {
                    return Err("parameters must be nonempty".into());
                }
                positive(s.nu, "nu")?;
                if !(s.radius >= 0.0) {
                    return Err(format!("radius must be nonnegative, got {}", s.radius));
                }
                Ok(())
            }
        }
    }
}

fn positive(value: f64, name: &str) -> Result<(), String> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive, got {value}"))
    }
}

fn known_form(name: &str) -> Result<(), String> {
    if BUILTIN_FORMS.contains(&name) {
        Ok(())
    } else {
        Err(format!(
            "unknown form '{name}'; known forms: {}",
            BUILTIN_FORMS.join(", ")
        ))
    }
}

fn known_family(name: &str) -> Result<(), String> {
    if BUILTIN_FAMILIES.contains(&name) {
        Ok(())
    } else {
        Err(format!(
            "unknown family '{name}'; known families: {}",
            BUILTIN_FAMILIES.join(", ")
        ))
    }
}

/// Sphere cycles live in two complex variables.
fn planar_form(name: &str) -> Result<(), String> {
    known_form(name)?;
    match builtin_default_dimension(name) {
        Some(2) => Ok(()),
        _ => Err(format!("form '{name}' does not live in 2 complex variables")),
    }
}

pub fn metric_dimension(s: &MetricSpec) -> Result<usize, String> {
    let n = s
        .dimension
        .or_else(|| builtin_default_dimension(&s.form))
        .ok_or_else(|| format!("form '{}' needs an explicit dimension", s.form))?;
    if !(2..=3).contains(&n) {
        return Err(format!(
            "metric checks pair dd^c against directions in 2 or 3 variables, got {n}"
        ));
    }
    Ok(n)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    version: u32,
    #[serde(default)]
    seed: Option<u64>,
    checks: Vec<serde_json::Value>,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = serde_json::from_str(text)?;
    if raw.version != SCENARIO_VERSION {
        return Err(ScenarioError::Version {
            got: raw.version,
            want: SCENARIO_VERSION,
        });
    }
    let mut checks = Vec::with_capacity(raw.checks.len());
    for (index, value) in raw.checks.into_iter().enumerate() {
        let kind = value
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or(ScenarioError::MissingKind { index })?
            .to_string();
        let parsed = match kind.as_str() {
            "normal-form" => serde_json::from_value(value).map(CheckSpec::NormalForm),
            "sweep" => serde_json::from_value(value).map(CheckSpec::Sweep),
            "metric-check" => serde_json::from_value(value).map(CheckSpec::MetricCheck),
            "period" => serde_json::from_value(value).map(CheckSpec::Period),
            "obstruction" => serde_json::from_value(value).map(CheckSpec::Obstruction),
            "volume-scan" => serde_json::from_value(value).map(CheckSpec::VolumeScan),
            "gap-check" => serde_json::from_value(value).map(CheckSpec::GapCheck),
            _ => return Err(ScenarioError::UnknownKind { index, kind }),
        };
        let spec = parsed.map_err(|source| ScenarioError::BadParams {
            index,
            kind: kind.clone(),
            source,
        })?;
        spec.validate().map_err(|message| ScenarioError::Invalid {
            index,
            kind,
            message,
        })?;
        checks.push(spec);
    }
    Ok(Scenario {
        version: raw.version,
        seed: raw.seed,
        checks,
    })
}
