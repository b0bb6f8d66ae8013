use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use telescope_core::optimizers::{
    certified_constants, default_start, problem_by_name, Algorithm, HardInstanceObjective, Problem,
    RunParams,
};
use telescope_core::trace::{save_trace, OptimizationTrace};

use super::write_json;
use crate::config::{self, parse_settings, ConfigFile};
use crate::error::{CliError, Verdict};

#[derive(Debug, Args, Serialize)]
pub struct RunArgs {
    /// sd, tr, ar2 or ds.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    algo: Option<String>,
    /// quartic, rosenbrock, separable or hard-instance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    problem: Option<String>,
    /// Starting point as a comma list; defaults to the problem's usual start.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    x0: Option<Vec<f64>>,
    /// Dimension of the quartic and separable problems.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iter: Option<usize>,
    /// Stop once the gradient norm is at most this.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    /// Algorithm setting, e.g. `--set c=0.9`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    #[serde(skip)]
    set: Vec<String>,
    /// Hard-instance parameter alpha.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    /// Hard-instance parameter delta.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    /// Trace output path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    /// Summary JSON path; defaults to the trace path with a `.json` extension.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub algo: String,
    pub problem: String,
    pub x0: Option<Vec<f64>>,
    pub dim: Option<usize>,
    pub max_iter: usize,
    pub tol: f64,
    pub set: BTreeMap<String, f64>,
    pub alpha: f64,
    pub delta: f64,
    pub out: PathBuf,
    pub summary: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algo: "sd".into(),
            problem: "quartic".into(),
            x0: None,
            dim: None,
            max_iter: 10_000,
            tol: 1e-6,
            set: BTreeMap::new(),
            alpha: 0.1,
            delta: 0.25,
            out: PathBuf::from("trace.trc"),
            summary: None,
        }
    }
}

fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    if cfg.problem == "hard-instance" {
        if cfg.dim.is_some_and(|d| d != 1) {
            return Err(CliError::input("hard-instance is one-dimensional"));
        }
        let objective =
            HardInstanceObjective::from_params(cfg.alpha, cfg.delta).map_err(CliError::input)?;
        return Ok(Problem::new(objective));
    }
    problem_by_name(&cfg.problem, cfg.dim).map_err(CliError::input)
}

pub fn execute(args: RunArgs, file: &ConfigFile) -> Result<Verdict, CliError> {
    let mut flags = serde_json::to_value(&args).expect("flags serialize");
    flags["set"] = parse_settings(&args.set)?;
    let (cfg, echo): (RunConfig, Value) = config::resolve(file, "run", flags)?;

    let algorithm: Algorithm = cfg.algo.parse().map_err(CliError::input)?;
    let mut problem = build_problem(&cfg)?;
    let summary_path = cfg
        .summary
        .clone()
        .unwrap_or_else(|| config::sibling(&cfg.out, "json"));
    config::output_file(&cfg.out)?;
    config::output_file(&summary_path)?;

    let x0 = match &cfg.x0 {
        Some(x0) => x0.clone(),
        None => default_start(&cfg.problem, problem.dimension()).expect("registered problem"),
    };
    let mut options = cfg.set.clone();
    // Steepest descent on the hard instance defaults to the settings under
    // which every unit Armijo step lands on the next knot.
    if algorithm == Algorithm::SteepestDescent && cfg.problem == "hard-instance" {
        options.entry("t_init".into()).or_insert(cfg.alpha);
        options.entry("c".into()).or_insert(0.9);
    }
    let mut params = RunParams::new(x0, cfg.max_iter, cfg.tol);
    params.options = options;

    let outcome = algorithm.run(&mut problem, &params)?;
    let mut meta = outcome.trace.meta().clone();
    if cfg.problem == "hard-instance" {
        meta.params
            .insert("instance_alpha".into(), cfg.alpha.to_string());
        meta.params
            .insert("instance_delta".into(), cfg.delta.to_string());
    }
    let trace = OptimizationTrace::new(meta, outcome.trace.records().to_vec())
        .map_err(CliError::runtime)?;
    save_trace(&trace, &cfg.out).map_err(|e| CliError::write(&cfg.out, e))?;

    let certified = certified_constants(&outcome).ok();
    let report = json!({
        "config": echo,
        "trace": cfg.out,
        "summary": outcome.summary,
        "certified_constants": certified,
    });
    write_json(&summary_path, &report)?;
    println!(
        "{} on {}: {} iterations ({} successful), final omega {:e}, status {}",
        outcome.summary.algorithm,
        outcome.summary.problem,
        outcome.summary.iterations,
        outcome.summary.successful,
        outcome.summary.final_omega,
        serde_json::to_value(outcome.summary.status)
            .expect("status serializes")
            .as_str()
            .unwrap_or("?"),
    );
    println!(
        "trace written to {}, summary to {}",
        cfg.out.display(),
        summary_path.display()
    );
    Ok(Verdict::Pass)
}
