use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use telescope_core::theorem::{
    first_hit_index, fit_complexity_exponent, lookup_exponent, TheoremError,
};
use telescope_core::trace::load_trace;

use super::{parse_grid, write_json};
use crate::config::{self, ConfigFile};
use crate::error::{CliError, Verdict};

/// Columns tried, in order, when `--column` is not given.
const COUNT_COLUMNS: [&str; 4] = ["k_eps", "k", "measured", "predicted"];

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// CSV with an `eps` column and a count column.
    #[arg(long, conflicts_with = "trace")]
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<PathBuf>,
    /// Count column in the table; defaults to the first nonempty of
    /// k_eps, k, measured, predicted.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<String>,
    /// Trace to measure k(eps) from, with `--eps-grid`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_grid: Option<String>,
    /// Exponent to compare against.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    /// Look the exponent up in the registry by method family.
    #[arg(long, conflicts_with = "beta")]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    /// Pass while slope <= beta + tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    /// Also write the result as JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    json: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub table: Option<PathBuf>,
    pub column: Option<String>,
    pub trace: Option<PathBuf>,
    pub eps_grid: String,
    pub beta: Option<f64>,
    pub family: Option<String>,
    pub tolerance: f64,
    pub json: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            table: None,
            column: None,
            trace: None,
            eps_grid: "logspace:-1:-3:5".into(),
            beta: None,
            family: None,
            tolerance: 0.05,
            json: None,
        }
    }
}

fn read_table(path: &Path, column: Option<&str>) -> Result<Vec<(f64, f64)>, CliError> {
    let bad = |e: &dyn std::fmt::Display| CliError::input(format!("table {}: {e}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(&e))?;
    let headers = reader.headers().map_err(|e| bad(&e))?.clone();
    let rows: Vec<csv::StringRecord> = reader
        .records()
        .collect::<Result<_, _>>()
        .map_err(|e| bad(&e))?;
    let index = |name: &str| headers.iter().position(|h| h.trim() == name);
    let eps_col = index("eps").ok_or_else(|| bad(&"no eps column"))?;
    let k_col = match column {
        Some(c) => index(c).ok_or_else(|| bad(&format!("no column {c:?}")))?,
        None => COUNT_COLUMNS
            .iter()
            .filter_map(|c| index(c))
            .find(|&i| {
                rows.iter()
                    .any(|r| !r.get(i).unwrap_or("").trim().is_empty())
            })
            .ok_or_else(|| {
                bad(&format!(
                    "no nonempty count column ({})",
                    COUNT_COLUMNS.join(", ")
                ))
            })?,
    };
    let mut pairs = Vec::new();
    for (line, r) in rows.iter().enumerate() {
        let field = |i: usize| r.get(i).unwrap_or("").trim();
        // unreached tolerances have an empty count; k = 0 has no logarithm
        if field(k_col).is_empty() {
            continue;
        }
        let parse = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|_| bad(&format!("row {}: {:?} is not a number", line + 2, field(i))))
        };
        let (eps, k) = (parse(eps_col)?, parse(k_col)?);
        if k > 0.0 {
            pairs.push((eps, k));
        }
    }
    Ok(pairs)
}

pub fn execute(args: FitArgs, file: &ConfigFile) -> Result<Verdict, CliError> {
    let flags = serde_json::to_value(&args).expect("flags serialize");
    let (cfg, echo): (FitConfig, Value) = config::resolve(file, "fit", flags)?;
    if let Some(path) = &cfg.json {
        config::output_file(path)?;
    }

    let (pairs, trace_beta) = match (&cfg.table, &cfg.trace) {
        (Some(table), None) => {
            config::input_file(table, "table")?;
            (read_table(table, cfg.column.as_deref())?, None)
        }
        (None, Some(path)) => {
            config::input_file(path, "trace")?;
            let trace = load_trace(path).map_err(|e| {
                CliError::input(format!("cannot load trace {}: {e}", path.display()))
            })?;
            let grid = parse_grid(&cfg.eps_grid)?;
            let pairs = grid
                .values()
                .iter()
                .filter_map(|&eps| {
                    first_hit_index(&trace, eps)
                        .filter(|&k| k > 0)
                        .map(|k| (eps, k as f64))
                })
                .collect();
            let beta: Option<f64> = trace.meta().params.get("beta").and_then(|b| b.parse().ok());
            (pairs, beta)
        }
        _ => return Err(CliError::input("give exactly one of --table or --trace")),
    };

    let beta = match (&cfg.beta, &cfg.family) {
        (Some(b), _) => *b,
        (None, Some(family)) => lookup_exponent(family, 1, None).ok_or_else(|| {
            CliError::input(format!(
                "no first-order exponent registered for family {family:?}"
            ))
        })?,
        (None, None) => trace_beta.unwrap_or(2.0),
    };
    let fit = fit_complexity_exponent(&pairs).map_err(|e| match e {
        TheoremError::Fit(msg) => CliError::input(format!("degenerate grid: {msg}")),
        other => CliError::input(other),
    })?;
    let ok = fit.slope <= beta + cfg.tolerance;
    println!(
        "slope {:.4}  residual {:.3e}  points {}  beta {}  {}",
        fit.slope,
        fit.residual,
        fit.points,
        beta,
        if ok { "ok" } else { "EXCEEDS beta + tolerance" }
    );
    if let Some(path) = &cfg.json {
        write_json(
            path,
            &json!({ "config": echo, "fit": fit, "beta": beta, "passed": ok }),
        )?;
    }
    Ok(Verdict::from_ok(ok))
}
