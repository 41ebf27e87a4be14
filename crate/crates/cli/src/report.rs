//! Report assembly and emission. JSON output contains no wall-clock data,
//! so a fixed scenario and seed reproduce it byte for byte; the text table
//! carries the timings.

use crate::checks::{effective_seed, run_check};
use crate::scenario::Scenario;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub convention: &'static str,
    pub seed: u64,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub index: usize,
    pub kind: String,
    pub name: String,
    pub seed: u64,
    pub pass: bool,
    pub inputs: Value,
    pub outputs: Value,
    #[serde(skip)]
    pub wall_ms: f64,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Runs every check of the scenario. Checks execute concurrently; the
/// report is ordered by check index regardless of completion order.
pub fn run_scenario(scenario: &Scenario, seed_override: Option<u64>) -> Report {
    let base_seed = seed_override.or(scenario.seed).unwrap_or(0);
    let mut checks: Vec<CheckReport> = scenario
        .checks
        .par_iter()
        .enumerate()
        .map(|(index, spec)| {
            let seed = effective_seed(base_seed, index, spec);
            let start = Instant::now();
            let (pass, outputs) = match run_check(spec, seed) {
                Ok(result) => result,
                Err(message) => (false, json!({ "error": message })),
            };
            CheckReport {
                index,
                kind: spec.kind().to_string(),
                name: spec.name(index),
                seed,
                pass,
                inputs: serde_json::to_value(spec).unwrap_or(Value::Null),
                outputs,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect();
    checks.sort_by_key(|c| c.index);
    Report {
        version: env!("CARGO_PKG_VERSION"),
        convention: plateau_core::DC_CONVENTION,
        seed: base_seed,
        checks,
    }
}

pub fn emit_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization");
    s.push('\n');
    s
}

pub fn emit_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "plateau {} ({}) seed={}",
        report.version, report.convention, report.seed
    );
    for c in &report.checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "[{:>3}] {:<13} {:<32} {}  ({:.1} ms)",
            c.index, c.kind, c.name, status, c.wall_ms
        );
        if !c.pass {
            let detail = serde_json::to_string(&c.outputs).unwrap_or_default();
            let _ = writeln!(out, "      {detail}");
        }
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(out, "{} of {} checks passed", passed, report.checks.len());
    out
}
