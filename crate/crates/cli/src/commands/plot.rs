use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use telescope_core::hard_instance::{write_curve_csv, CurveSample};

use super::{build_instance, figure, write_file, Figure, PlotRange};
use crate::config::{self, ConfigFile};
use crate::error::{CliError, Verdict};
use crate::svg;

#[derive(Debug, Args, Serialize)]
pub struct PlotArgs {
    /// Sampled-curve CSV (`x,f,fprime,fsecond_left,fsecond_right`). Without
    /// it the curves are sampled from the instance parameters.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    curve: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    plot_range: Option<PlotRange>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    svg: Option<PathBuf>,
    /// Also write the sampled curves as CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<PathBuf>,
    /// Write only the CSV (to `--csv`, default curve.csv).
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    csv_only: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotConfig {
    pub curve: Option<PathBuf>,
    pub alpha: f64,
    pub delta: f64,
    pub plot_range: PlotRange,
    pub samples: usize,
    pub svg: PathBuf,
    pub csv: Option<PathBuf>,
    pub csv_only: bool,
}

impl Default for PlotConfig {
    fn default() -> Self {
        Self {
            curve: None,
            alpha: 0.1,
            delta: 0.001,
            plot_range: "x0:x4".parse().expect("valid range"),
            samples: 401,
            svg: PathBuf::from("curve.svg"),
            csv: None,
            csv_only: false,
        }
    }
}

fn read_curve(path: &Path) -> Result<Vec<CurveSample>, CliError> {
    let bad = |e: &dyn std::fmt::Display| CliError::input(format!("curve {}: {e}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(&e))?;
    let mut samples = Vec::new();
    for row in reader.deserialize::<[f64; 5]>() {
        let [x, f, fprime, fsecond_left, fsecond_right] = row.map_err(|e| bad(&e))?;
        if ![x, f, fprime, fsecond_left, fsecond_right]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(bad(&format!("non-finite value at x = {x}")));
        }
        samples.push(CurveSample {
            x,
            f,
            fprime,
            fsecond_left,
            fsecond_right,
        });
    }
    if samples.is_empty() {
        return Err(bad(&"no samples"));
    }
    if let Some(w) = samples.windows(2).find(|w| w[1].x <= w[0].x) {
        return Err(bad(&format!(
            "x must increase ({} then {})",
            w[0].x, w[1].x
        )));
    }
    Ok(samples)
}

pub fn execute(args: PlotArgs, file: &ConfigFile) -> Result<Verdict, CliError> {
    let flags = serde_json::to_value(&args).expect("flags serialize");
    let (cfg, _echo): (PlotConfig, Value) = config::resolve(file, "plot", flags)?;

    let csv_path = match (&cfg.csv, cfg.csv_only) {
        (Some(p), _) => Some(p.clone()),
        (None, true) => Some(PathBuf::from("curve.csv")),
        (None, false) => None,
    };
    if let Some(p) = &csv_path {
        config::output_file(p)?;
    }
    if !cfg.csv_only {
        config::output_file(&cfg.svg)?;
    }

    let fig = match &cfg.curve {
        Some(path) => {
            config::input_file(path, "curve file")?;
            Figure {
                samples: read_curve(path)?,
                knots: Vec::new(),
            }
        }
        None => {
            let mut instance = build_instance(cfg.alpha, cfg.delta)?;
            figure(&mut instance, cfg.plot_range, cfg.samples)?
        }
    };

    if let Some(p) = &csv_path {
        let mut bytes = Vec::new();
        write_curve_csv(&fig.samples, &mut bytes).map_err(|e| CliError::write(p, e))?;
        write_file(p, bytes)?;
        println!("curves written to {}", p.display());
    }
    if !cfg.csv_only {
        write_file(&cfg.svg, svg::render(&fig.samples, &fig.knots))?;
        println!("figure written to {}", cfg.svg.display());
    }
    Ok(Verdict::Pass)
}
