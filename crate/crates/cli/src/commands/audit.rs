use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use telescope_core::theorem::{audit, AuditReport};
use telescope_core::trace::{load_trace, OptimizationTrace, TheoremConstants};

use super::{parse_grid, write_file, write_json};
use crate::config::{self, ConfigFile};
use crate::error::{CliError, Verdict};

#[derive(Debug, Args, Serialize)]
pub struct AuditArgs {
    /// Trace written by `run` or `hard-instance --replicate`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<PathBuf>,
    /// JSON object with any of kappa_d, beta, kappa_a, kappa_b, kappa_c.
    /// Individual flags override it.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    constants: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_d: Option<f64>,
    /// Defaults to the `beta` recorded in the trace, else 2.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_a: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_b: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_c: Option<f64>,
    /// Comma list or `logspace:a:b:n`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_grid: Option<String>,
    /// Audit report JSON path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<PathBuf>,
    /// k(eps) table CSV path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    pub trace: Option<PathBuf>,
    pub constants: Option<PathBuf>,
    pub kappa_d: Option<f64>,
    pub beta: Option<f64>,
    pub kappa_a: Option<f64>,
    pub kappa_b: Option<f64>,
    pub kappa_c: Option<f64>,
    pub eps_grid: String,
    pub report: PathBuf,
    pub table: PathBuf,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            trace: None,
            constants: None,
            kappa_d: None,
            beta: None,
            kappa_a: None,
            kappa_b: None,
            kappa_c: None,
            eps_grid: "logspace:-1:-3:5".into(),
            report: PathBuf::from("audit.json"),
            table: PathBuf::from("k_eps.csv"),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConstants {
    kappa_d: Option<f64>,
    beta: Option<f64>,
    kappa_a: Option<f64>,
    kappa_b: Option<f64>,
    kappa_c: Option<f64>,
}

fn trace_beta(trace: &OptimizationTrace) -> Option<f64> {
    trace.meta().params.get("beta").and_then(|b| b.parse().ok())
}

fn constants(cfg: &AuditConfig, trace: &OptimizationTrace) -> Result<TheoremConstants, CliError> {
    let file = match &cfg.constants {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::input(format!("cannot read constants {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("constants {}: {e}", path.display())))?
        }
        None => PartialConstants::default(),
    };
    let kappa_d = cfg
        .kappa_d
        .or(file.kappa_d)
        .ok_or_else(|| CliError::input("kappa_d is required (--kappa-d or a constants file)"))?;
    let beta = cfg
        .beta
        .or(file.beta)
        .or_else(|| trace_beta(trace))
        .unwrap_or(2.0);
    TheoremConstants::new(
        kappa_d,
        beta,
        cfg.kappa_a.or(file.kappa_a).unwrap_or(1.0),
        cfg.kappa_b.or(file.kappa_b).unwrap_or(0.0),
        cfg.kappa_c.or(file.kappa_c).unwrap_or(0.0),
    )
    .map_err(CliError::input)
}

fn print_report(report: &AuditReport) {
    let mark = |ok: bool| if ok { "ok" } else { "FAILED" };
    let at = |v: Option<usize>| {
        v.map(|k| format!(" (first at k = {k})"))
            .unwrap_or_default()
    };
    println!("{} on {}", report.algorithm, report.problem);
    println!(
        "  termination     {}{}",
        mark(report.kstop_ok),
        at(report.kstop_violation)
    );
    println!(
        "  decrease        {}{}  kappa_d_hat = {}",
        mark(report.succ_ok),
        at(report.succ_violation),
        report
            .kappa_d_hat
            .map(|v| format!("{v:.6e}"))
            .unwrap_or_else(|| "n/a".into())
    );
    println!(
        "  growth          {}{}",
        mark(report.growth_ok),
        at(report.growth_violation)
    );
    for row in &report.k_eps_table {
        match (row.k_eps, row.bound_rhs, row.card_lhs, row.card_rhs) {
            (Some(k), Some(rhs), Some(lhs), Some(card)) => println!(
                "  eps {:<10.3e} k = {k:<8} bound {:<7} {rhs:.4e}  successes {lhs} <= {card:.4e} {}",
                row.eps,
                mark(row.bound_ok == Some(true)),
                mark(row.card_ok == Some(true)),
            ),
            _ => println!(
                "  eps {:<10.3e} skipped: {}",
                row.eps,
                row.note.as_deref().unwrap_or("not evaluable")
            ),
        }
    }
    if let Some(fit) = report.fitted_exponent {
        println!(
            "  fitted exponent {:.4} (residual {:.2e})",
            fit.slope, fit.residual
        );
    }
}

pub fn execute(args: AuditArgs, file: &ConfigFile) -> Result<Verdict, CliError> {
    let flags = serde_json::to_value(&args).expect("flags serialize");
    let (cfg, echo): (AuditConfig, Value) = config::resolve(file, "audit", flags)?;

    let trace_path = cfg
        .trace
        .clone()
        .ok_or_else(|| CliError::input("--trace is required"))?;
    config::input_file(&trace_path, "trace")?;
    if let Some(c) = &cfg.constants {
        config::input_file(c, "constants file")?;
    }
    config::output_file(&cfg.report)?;
    config::output_file(&cfg.table)?;
    let grid = parse_grid(&cfg.eps_grid)?;

    let trace = load_trace(&trace_path)
        .map_err(|e| CliError::input(format!("cannot load trace {}: {e}", trace_path.display())))?;
    let constants = constants(&cfg, &trace)?;
    let report = audit(&trace, &constants, &grid).map_err(CliError::input)?;

    let mut out = serde_json::to_value(&report).expect("report serializes");
    out["passed"] = Value::Bool(report.passed());
    out["config"] = echo;
    write_json(&cfg.report, &out)?;
    let mut table = Vec::new();
    report
        .write_k_eps_csv(&mut table)
        .map_err(|e| CliError::write(&cfg.table, e))?;
    write_file(&cfg.table, table)?;

    print_report(&report);
    println!(
        "audit {}; report {}, table {}",
        if report.passed() { "passed" } else { "FAILED" },
        cfg.report.display(),
        cfg.table.display()
    );
    Ok(Verdict::from_ok(report.passed()))
}
