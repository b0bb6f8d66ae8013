pub mod audit;
pub mod fit;
pub mod hard_instance;
pub mod plot;
pub mod run;

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use telescope_core::hard_instance::{CurveSample, HardInstance, HardInstanceParams, Knot};
use telescope_core::theorem::EpsilonGrid;

use crate::error::CliError;

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::runtime)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::write(path, e))
}

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::write(path, e))
}

pub fn parse_grid(text: &str) -> Result<EpsilonGrid, CliError> {
    EpsilonGrid::parse(text).map_err(CliError::input)
}

pub fn build_instance(alpha: f64, delta: f64) -> Result<HardInstance, CliError> {
    let params = HardInstanceParams::new(alpha, delta).map_err(CliError::input)?;
    HardInstance::new(params).map_err(CliError::input)
}

/// One end of a plot range: a knot `x<k>` or a plain abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Knot(usize),
    Value(f64),
}

impl Endpoint {
    fn resolve(self, instance: &mut HardInstance) -> Result<f64, CliError> {
        match self {
            Endpoint::Knot(k) => instance.iterate_value(k).map_err(CliError::input),
            Endpoint::Value(v) => Ok(v),
        }
    }
}

/// `x0:x4` (knot indices) or `a:b` (abscissae), in any mix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotRange {
    pub start: Endpoint,
    pub end: Endpoint,
}

impl FromStr for PlotRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        fn endpoint(s: &str) -> Result<Endpoint, String> {
            let s = s.trim();
            if let Some(k) = s.strip_prefix('x') {
                k.parse()
                    .map(Endpoint::Knot)
                    .map_err(|_| format!("bad knot index in {s:?}"))
            } else {
                s.parse()
                    .map(Endpoint::Value)
                    .map_err(|_| format!("bad range endpoint {s:?}"))
            }
        }
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("plot range must look like x0:x4 or a:b, got {s:?}"))?;
        Ok(Self {
            start: endpoint(a)?,
            end: endpoint(b)?,
        })
    }
}

impl Serialize for PlotRange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let show = |e: Endpoint| match e {
            Endpoint::Knot(k) => format!("x{k}"),
            Endpoint::Value(v) => v.to_string(),
        };
        s.serialize_str(&format!("{}:{}", show(self.start), show(self.end)))
    }
}

impl<'de> Deserialize<'de> for PlotRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Sampled curves plus the knots inside the range.
pub struct Figure {
    pub samples: Vec<CurveSample>,
    pub knots: Vec<Knot>,
}

pub fn figure(
    instance: &mut HardInstance,
    range: PlotRange,
    samples: usize,
) -> Result<Figure, CliError> {
    let a = range.start.resolve(instance)?;
    let b = range.end.resolve(instance)?;
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(CliError::input(format!("empty plot range [{a}, {b}]")));
    }
    let curve = instance
        .sample_curve(a, b, samples)
        .map_err(CliError::input)?;
    let mut knots = Vec::new();
    for k in 0.. {
        let knot = instance.knot(k).map_err(CliError::input)?;
        if knot.x > b {
            break;
        }
        if knot.x >= a {
            knots.push(knot);
        }
    }
    Ok(Figure {
        samples: curve,
        knots,
    })
}
