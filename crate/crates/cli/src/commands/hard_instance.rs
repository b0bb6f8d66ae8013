use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use telescope_core::hard_instance::{predicted_k_eps, write_curve_csv, HardInstance};
use telescope_core::optimizers::{as_problem, steepest_descent_armijo, RunParams};
use telescope_core::theorem::{audit, first_hit_index, EpsilonGrid};
use telescope_core::trace::{save_trace, TheoremConstants};

use super::{build_instance, figure, parse_grid, write_file, write_json, PlotRange};
use crate::config::{self, ConfigFile};
use crate::error::{CliError, Verdict};
use crate::svg;

#[derive(Debug, Args, Serialize)]
pub struct HardInstanceArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    /// `x0:x4` for knots, `a:b` for abscissae.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    plot_range: Option<PlotRange>,
    /// Evenly spaced samples per curve; knots in range are always added.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    /// Run steepest descent on the instance and compare k(eps) with the
    /// closed form.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    replicate: bool,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_grid: Option<String>,
    /// Last knot index in knots.csv.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    knots: Option<usize>,
    /// Decrease constant for the replication audit; defaults to 0.99 alpha.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_d: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardInstanceConfig {
    pub alpha: f64,
    pub delta: f64,
    pub plot_range: PlotRange,
    pub samples: usize,
    pub replicate: bool,
    pub eps_grid: String,
    pub knots: usize,
    pub kappa_d: Option<f64>,
    pub out_dir: PathBuf,
}

impl Default for HardInstanceConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            delta: 0.001,
            plot_range: "x0:x4".parse().expect("valid range"),
            samples: 401,
            replicate: false,
            eps_grid: "logspace:-1:-3:5".into(),
            knots: 100,
            kappa_d: None,
            out_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Serialize)]
struct GridRow {
    eps: f64,
    predicted: usize,
    measured: Option<usize>,
}

fn write_k_eps(path: &Path, rows: &[GridRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::write(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::write(path, e))?;
    write_file(path, bytes)
}

struct Replication {
    report: Value,
    rows: Vec<GridRow>,
    ok: bool,
}

fn replicate(
    instance: &HardInstance,
    cfg: &HardInstanceConfig,
    grid: &EpsilonGrid,
    predicted: &[usize],
) -> Result<Replication, CliError> {
    let eps_min = *grid.values().last().expect("grid is nonempty");
    let iterations = predicted.iter().copied().max().unwrap_or(0).max(1);
    let mut problem = as_problem(instance.clone());
    let params = RunParams::new(vec![0.0], iterations, eps_min)
        .with_option("t_init", cfg.alpha)
        .with_option("c", 0.9);
    let outcome = steepest_descent_armijo(&mut problem, &params)?;
    let trace_path = cfg.out_dir.join("replication.trc");
    save_trace(&outcome.trace, &trace_path).map_err(|e| CliError::write(&trace_path, e))?;

    let mut knots = instance.clone();
    let mut worst = 0.0f64;
    for r in outcome.trace.records() {
        let x = knots.iterate_value(r.k).map_err(CliError::runtime)?;
        worst = worst.max((r.x[0] - x).abs());
    }

    let rows: Vec<GridRow> = grid
        .values()
        .iter()
        .zip(predicted)
        .map(|(&eps, &predicted)| GridRow {
            eps,
            predicted,
            measured: first_hit_index(&outcome.trace, eps),
        })
        .collect();
    let all_match = rows.iter().all(|r| r.measured == Some(r.predicted));

    let kappa_d = cfg.kappa_d.unwrap_or(0.99 * cfg.alpha);
    let constants = TheoremConstants::new(kappa_d, 2.0, 1.0, 0.0, 0.0).map_err(CliError::input)?;
    let audit = audit(&outcome.trace, &constants, grid).map_err(CliError::runtime)?;
    let ok = all_match && audit.passed() && outcome.summary.backtracks == 0;

    println!(
        "replication: {} iterations, {} backtracks, max |x_k - knot| = {worst:e}",
        outcome.summary.iterations, outcome.summary.backtracks
    );
    for r in &rows {
        println!(
            "  eps {:<10.3e} predicted {:<9} measured {}",
            r.eps,
            r.predicted,
            r.measured
                .map(|k| k.to_string())
                .unwrap_or_else(|| "not reached".into())
        );
    }
    println!(
        "  k(eps) {}; audit with kappa_d = {kappa_d} {}",
        if all_match { "matches" } else { "MISMATCH" },
        if audit.passed() { "passed" } else { "FAILED" }
    );

    let report = json!({
        "trace": trace_path,
        "summary": outcome.summary,
        "max_iterate_error": worst,
        "k_eps": rows,
        "all_match": all_match,
        "audit": audit,
        "passed": ok,
    });
    Ok(Replication { report, rows, ok })
}

pub fn execute(args: HardInstanceArgs, file: &ConfigFile) -> Result<Verdict, CliError> {
    let flags = serde_json::to_value(&args).expect("flags serialize");
    let (cfg, echo): (HardInstanceConfig, Value) = config::resolve(file, "hard-instance", flags)?;
    if !cfg.out_dir.is_dir() {
        return Err(CliError::input(format!(
            "output directory {} does not exist",
            cfg.out_dir.display()
        )));
    }
    let grid = parse_grid(&cfg.eps_grid)?;
    let mut instance = build_instance(cfg.alpha, cfg.delta)?;
    let predicted = grid
        .values()
        .iter()
        .map(|&eps| predicted_k_eps(eps, cfg.delta).map_err(CliError::input))
        .collect::<Result<Vec<_>, _>>()?;

    let knots_path = cfg.out_dir.join("knots.csv");
    let mut table = Vec::new();
    instance
        .write_knot_table(cfg.knots, &mut table)
        .map_err(|e| CliError::write(&knots_path, e))?;
    write_file(&knots_path, table)?;

    let fig = figure(&mut instance, cfg.plot_range, cfg.samples)?;
    let curve_path = cfg.out_dir.join("curve.csv");
    let mut curve = Vec::new();
    write_curve_csv(&fig.samples, &mut curve).map_err(|e| CliError::write(&curve_path, e))?;
    write_file(&curve_path, curve)?;
    write_file(
        &cfg.out_dir.join("curve.svg"),
        svg::render(&fig.samples, &fig.knots),
    )?;

    println!(
        "instance alpha = {}, delta = {}: f_0 = {}, limit {}",
        cfg.alpha,
        cfg.delta,
        instance.f0(),
        instance.f_limit()
    );

    let k_eps_path = cfg.out_dir.join("k_eps.csv");
    let verdict = if cfg.replicate {
        let rep = replicate(&instance, &cfg, &grid, &predicted)?;
        write_k_eps(&k_eps_path, &rep.rows)?;
        let mut report = rep.report;
        report["config"] = echo;
        write_json(&cfg.out_dir.join("replication.json"), &report)?;
        Verdict::from_ok(rep.ok)
    } else {
        let rows: Vec<GridRow> = grid
            .values()
            .iter()
            .zip(&predicted)
            .map(|(&eps, &predicted)| GridRow {
                eps,
                predicted,
                measured: None,
            })
            .collect();
        write_k_eps(&k_eps_path, &rows)?;
        Verdict::Pass
    };
    println!("outputs written to {}", cfg.out_dir.display());
    Ok(verdict)
}
