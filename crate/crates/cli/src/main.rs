//! Command-line front end: one subcommand per check kind plus a scenario
//! runner. Exit codes: 0 all checks pass, 1 any check fails, 2 usage or
//! scenario errors.

mod checks;
mod report;
mod scenario;

use clap::{Parser, Subcommand, ValueEnum};
use report::{emit_json, emit_text, run_scenario};
use scenario::{
    parse_scenario, CheckSpec, GapSpec, MetricSpec, NormalFormSpec, ObstructionSpec, PeriodSpec,
    Scenario, SweepSpec, VolumeScanSpec, SCENARIO_VERSION,
};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "plateau", version, about = "Pluriclosed-form toolkit runner")]
struct Cli {
    /// Base RNG seed; overrides the scenario's own seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Check tolerance; meaning depends on the subcommand.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Sample count; meaning depends on the subcommand.
    #[arg(long, global = true)]
    samples: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every check of a scenario file.
    Run { file: PathBuf },
    /// Normal-form invariance and Hessian-index checks on random jets.
    NormalForm {
        #[arg(long, default_value_t = 4)]
        max_dim: usize,
    },
    /// Continuity-principle sweep through the quadric slices.
    Sweep {
        #[arg(long)]
        delta0: f64,
        #[arg(long, default_value_t = 100)]
        t_steps: usize,
        #[arg(long, default_value_t = 2)]
        dimension: usize,
    },
    /// Pluriclosedness of a registered form on shell samples.
    MetricCheck {
        #[arg(long)]
        form: String,
        #[arg(long)]
        dimension: Option<usize>,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        expect_pluriclosed: bool,
    },
    /// Period of d^c of a registered form over a 3-sphere.
    Period {
        #[arg(long)]
        form: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        expect_abs: Option<f64>,
    },
    /// Shell-obstruction verdict for a sphere contour.
    Obstruction {
        #[arg(long)]
        form: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        /// Sphere center: re1 im1 re2 im2.
        #[arg(long, num_args = 4, value_names = ["RE1", "IM1", "RE2", "IM2"])]
        center: Option<Vec<f64>>,
        /// "shell_obstruction" or "no_obstruction".
        #[arg(long)]
        expect: Option<String>,
    },
    /// Graph-volume scan of a registered disc family.
    VolumeScan {
        #[arg(long)]
        family: String,
        /// Real parameter values; repeat the flag per parameter.
        #[arg(long = "param", required = true)]
        params: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        c0: f64,
        #[arg(long)]
        expect_bounded: Option<bool>,
        #[arg(long)]
        expect_slope: Option<f64>,
    },
    /// Pairwise volume-gap condition near a base parameter.
    GapCheck {
        #[arg(long)]
        family: String,
        /// Real parameter values; repeat the flag per parameter.
        #[arg(long = "param", required = true)]
        params: Vec<f64>,
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = 0.0)]
        center: f64,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        expect_pass: Option<bool>,
    },
}

fn real_params(params: &[f64]) -> Vec<[f64; 2]> {
    params.iter().map(|&re| [re, 0.0]).collect()
}

fn build_scenario(cli: &Cli) -> Result<Scenario, String> {
    let spec = match &cli.command {
        Command::Run { file } => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
            return parse_scenario(&text).map_err(|e| e.to_string());
        }
        Command::NormalForm { max_dim } => CheckSpec::NormalForm(NormalFormSpec {
            kind: "normal-form".into(),
            name: None,
            seed: None,
            count: cli.samples.unwrap_or(50),
            max_dim: *max_dim,
            tol: cli.tol.unwrap_or(1e-8),
        }),
        Command::Sweep {
            delta0,
            t_steps,
            dimension,
        } => CheckSpec::Sweep(SweepSpec {
            kind: "sweep".into(),
            name: None,
            seed: None,
            dimension: *dimension,
            delta0: *delta0,
            t_steps: *t_steps,
            samples_per_slice: cli.samples.unwrap_or(500),
        }),
        Command::MetricCheck {
            form,
            dimension,
            expect_pluriclosed,
        } => CheckSpec::MetricCheck(MetricSpec {
            kind: "metric-check".into(),
            name: None,
            seed: None,
            form: form.clone(),
            dimension: *dimension,
            samples: cli.samples.unwrap_or(100),
            tol: cli.tol.unwrap_or(1e-9),
            expect_pluriclosed: *expect_pluriclosed,
            inner: 0.75,
            outer: 1.5,
        }),
        Command::Period {
            form,
            radius,
            grid,
            expect_abs,
        } => CheckSpec::Period(PeriodSpec {
            kind: "period".into(),
            name: None,
            seed: None,
            form: form.clone(),
            center: [0.0; 4],
            radius: *radius,
            orientation: "outward".into(),
            grid: *grid,
            expect_abs: *expect_abs,
            tol_rel: cli.tol.unwrap_or(1e-3),
        }),
        Command::Obstruction {
            form,
            radius,
            grid,
            center,
            expect,
        } => {
            let center = match center {
                Some(v) => [v[0], v[1], v[2], v[3]],
                None => [0.0; 4],
            };
            CheckSpec::Obstruction(ObstructionSpec {
                kind: "obstruction".into(),
                name: None,
                seed: None,
                form: form.clone(),
                center,
                radius: *radius,
                grid: *grid,
                tol: cli.tol.unwrap_or(1e-3),
                expect: expect.clone(),
            })
        }
        Command::VolumeScan {
            family,
            params,
            c0,
            expect_bounded,
            expect_slope,
        } => CheckSpec::VolumeScan(VolumeScanSpec {
            kind: "volume-scan".into(),
            name: None,
            seed: None,
            family: family.clone(),
            parameters: real_params(params),
            c0: *c0,
            expect_bounded: *expect_bounded,
            expect_slope: *expect_slope,
            slope_tol_rel: 0.05,
            expect_volumes: None,
            volume_tol_rel: cli.tol.unwrap_or(1e-4),
        }),
        Command::GapCheck {
            family,
            params,
            nu,
            center,
            radius,
            expect_pass,
        } => CheckSpec::GapCheck(GapSpec {
            kind: "gap-check".into(),
            name: None,
            seed: None,
            family: family.clone(),
            parameters: real_params(params),
            nu: *nu,
            center: [*center, 0.0],
            radius: *radius,
            expect_pass: *expect_pass,
        }),
    };
    spec.validate()
        .map_err(|message| format!("{}: {message}", spec.kind()))?;
    Ok(Scenario {
        version: SCENARIO_VERSION,
        seed: None,
        checks: vec![spec],
    })
}

fn main() {
    let cli = Cli::parse();
    let scenario = match build_scenario(&cli) {
        Ok(s) => s,
        Err(message) => {
            eprintln!("error: {message}");
            std::process::exit(2);
        }
    };
    let report = run_scenario(&scenario, cli.seed);
    let rendered = match cli.format {
        OutputFormat::Json => emit_json(&report),
        OutputFormat::Text => emit_text(&report),
    };
    print!("{rendered}");
    std::process::exit(if report.all_pass() { 0 } else { 1 });
}
