//! Iteration histories and their `.trc` file format.
//!
//! A trace file is UTF-8 text. The first line is a JSON object carrying the
//! run metadata and the iterate dimension; every following line is one record
//! `k,f,omega,successful,x_1,...,x_n`. Reals are written in scientific
//! notation with 17 significant digits so a save/load cycle is bit-exact.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invariant violated at k={k}: {reason}")]
    Invariant { k: usize, reason: String },
}

/// State of one iteration: the iterate, its value, its optimality measure,
/// and whether the next iterate differs from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub omega: f64,
    pub successful: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TraceMeta {
    pub algorithm: String,
    pub problem: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    /// Name of the optimality measure, e.g. `gradient-norm`.
    pub measure: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    #[serde(flatten)]
    meta: TraceMeta,
    dimension: usize,
}

/// A validated, immutable iteration history.
///
/// Records with an empty `x` are allowed (value-only logs); in that case the
/// `successful` flags are taken as given instead of being derived from the
/// iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    meta: TraceMeta,
    records: Vec<IterationRecord>,
    dimension: usize,
}

/// Exact comparison of two stored iterates.
pub fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(u, v)| u.to_bits() == v.to_bits())
}

impl OptimizationTrace {
    pub fn new(meta: TraceMeta, records: Vec<IterationRecord>) -> Result<Self, TraceError> {
        let dimension = records.first().map_or(0, |r| r.x.len());
        validate(&records, dimension)?;
        Ok(Self {
            meta,
            records,
            dimension,
        })
    }

    pub fn meta(&self) -> &TraceMeta {
        &self.meta
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Length of every stored iterate (0 for value-only traces).
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn f(&self, k: usize) -> f64 {
        self.records[k].f
    }

    pub fn omega(&self, k: usize) -> f64 {
        self.records[k].omega
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header = Header {
            meta: self.meta.clone(),
            dimension: self.dimension,
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for r in &self.records {
            write!(
                out,
                "{},{:.16e},{:.16e},{}",
                r.k,
                r.f,
                r.omega,
                if r.successful { 1 } else { 0 }
            )?;
            for xi in &r.x {
                write!(out, ",{xi:.16e}")?;
            }
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self, TraceError> {
        let mut lines = input.lines();
        let header_line = lines.next().ok_or(TraceError::Parse {
            line: 1,
            message: "missing header".into(),
        })??;
        let header: Header = serde_json::from_str(&header_line).map_err(|e| TraceError::Parse {
            line: 1,
            message: format!("bad header: {e}"),
        })?;

        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(parse_record(&line, line_no, header.dimension)?);
        }
        if records
            .first()
            .is_some_and(|r| r.x.len() != header.dimension)
        {
            return Err(TraceError::Parse {
                line: 2,
                message: "dimension mismatch".into(),
            });
        }
        validate(&records, header.dimension)?;
        Ok(Self {
            meta: header.meta,
            records,
            dimension: header.dimension,
        })
    }
}

fn parse_record(
    line: &str,
    line_no: usize,
    dimension: usize,
) -> Result<IterationRecord, TraceError> {
    let err = |message: String| TraceError::Parse {
        line: line_no,
        message,
    };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 4 + dimension {
        return Err(err(format!(
            "expected {} fields, found {}",
            4 + dimension,
            fields.len()
        )));
    }
    let real = |s: &str, name: &str| -> Result<f64, TraceError> {
        s.parse::<f64>()
            .map_err(|e| err(format!("field {name}: {e} ({s:?})")))
    };
    let k = fields[0]
        .parse::<usize>()
        .map_err(|e| err(format!("field k: {e}")))?;
    let f = real(fields[1], "f")?;
    let omega = real(fields[2], "omega")?;
    let successful = match fields[3] {
        "1" | "true" => true,
        "0" | "false" => false,
        other => return Err(err(format!("field successful: {other:?}"))),
    };
    let x = fields[4..]
        .iter()
        .enumerate()
        .map(|(i, s)| real(s, &format!("x_{}", i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IterationRecord {
        k,
        x,
        f,
        omega,
        successful,
    })
}

fn validate(records: &[IterationRecord], dimension: usize) -> Result<(), TraceError> {
    let fail = |k: usize, reason: String| Err(TraceError::Invariant { k, reason });
    for (i, r) in records.iter().enumerate() {
        if r.k != i {
            return fail(i, format!("index {} out of sequence", r.k));
        }
        if r.x.len() != dimension {
            return fail(
                i,
                format!("iterate has {} entries, expected {dimension}", r.x.len()),
            );
        }
        if !r.f.is_finite() || r.x.iter().any(|v| !v.is_finite()) {
            return fail(i, "non-finite value".into());
        }
        if !(r.omega.is_finite() && r.omega >= 0.0) {
            return fail(
                i,
                format!("omega must be finite and nonnegative, got {}", r.omega),
            );
        }
        let Some(next) = records.get(i + 1) else {
            if dimension > 0 && r.successful {
                return fail(i, "last record cannot be successful".into());
            }
            continue;
        };
        if dimension > 0 {
            let moved = !same_point(&r.x, &next.x);
            if moved != r.successful {
                return fail(
                    i,
                    format!(
                        "success flag {} disagrees with stored iterates",
                        r.successful
                    ),
                );
            }
        }
        if next.f > r.f {
            return fail(i, format!("f increases: {} -> {}", r.f, next.f));
        }
        if r.successful {
            if next.f >= r.f {
                return fail(i, "successful iteration without decrease".into());
            }
        } else if next.f != r.f || next.omega != r.omega {
            return fail(
                i,
                "unsuccessful iteration must carry f and omega over".into(),
            );
        }
    }
    Ok(())
}

/// Reads a `.trc` file, rejecting any trace that breaks the record invariants.
pub fn load_trace(path: impl AsRef<Path>) -> Result<OptimizationTrace, TraceError> {
    let file = File::open(path)?;
    OptimizationTrace::read_from(BufReader::new(file))
}

pub fn save_trace(trace: &OptimizationTrace, path: impl AsRef<Path>) -> Result<(), TraceError> {
    let file = File::create(path)?;
    trace.write_to(BufWriter::new(file))?;
    Ok(())
}

/// Incremental construction of a trace from the iterates an optimizer visits.
///
/// Success flags are derived by comparing each pushed iterate to the
/// previous one, so they always agree with the stored points.
#[derive(Debug, Default)]
pub struct TraceBuilder {
    records: Vec<IterationRecord>,
}

impl TraceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: &[f64], f: f64, omega: f64) {
        if let Some(prev) = self.records.last_mut() {
            prev.successful = !same_point(&prev.x, x);
        }
        let k = self.records.len();
        self.records.push(IterationRecord {
            k,
            x: x.to_vec(),
            f,
            omega,
            successful: false,
        });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn finish(self, meta: TraceMeta) -> Result<OptimizationTrace, TraceError> {
        OptimizationTrace::new(meta, self.records)
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq)]
pub enum ConstantsError {
    #[error("kappa_d must lie in (0, 1], got {0}")]
    KappaD(f64),
    #[error("beta must be positive, got {0}")]
    Beta(f64),
    #[error("kappa_a must be at least 1, got {0}")]
    KappaA(f64),
    #[error("kappa_b must be nonnegative, got {0}")]
    KappaB(f64),
    #[error("kappa_c must be nonnegative, got {0}")]
    KappaC(f64),
}

/// Constants of the sufficient-decrease and iteration-growth hypotheses.
///
/// Decrease on successful iterations: `f_k - f_{k+1} >= kappa_d * omega_k^beta`.
/// Growth: `k <= kappa_a |S_k| + kappa_b |ln omega_k| + kappa_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremConstants {
    kappa_d: f64,
    beta: f64,
    kappa_a: f64,
    kappa_b: f64,
    kappa_c: f64,
}

impl TheoremConstants {
    pub fn new(
        kappa_d: f64,
        beta: f64,
        kappa_a: f64,
        kappa_b: f64,
        kappa_c: f64,
    ) -> Result<Self, ConstantsError> {
        if !(kappa_d > 0.0 && kappa_d <= 1.0) {
            return Err(ConstantsError::KappaD(kappa_d));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(ConstantsError::Beta(beta));
        }
        if !(kappa_a >= 1.0 && kappa_a.is_finite()) {
            return Err(ConstantsError::KappaA(kappa_a));
        }
        if !(kappa_b >= 0.0 && kappa_b.is_finite()) {
            return Err(ConstantsError::KappaB(kappa_b));
        }
        if !(kappa_c >= 0.0 && kappa_c.is_finite()) {
            return Err(ConstantsError::KappaC(kappa_c));
        }
        Ok(Self {
            kappa_d,
            beta,
            kappa_a,
            kappa_b,
            kappa_c,
        })
    }

    pub fn kappa_d(&self) -> f64 {
        self.kappa_d
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn kappa_a(&self) -> f64 {
        self.kappa_a
    }
    pub fn kappa_b(&self) -> f64 {
        self.kappa_b
    }
    pub fn kappa_c(&self) -> f64 {
        self.kappa_c
    }

    /// Same constants with a different decrease constant.
    pub fn with_kappa_d(&self, kappa_d: f64) -> Result<Self, ConstantsError> {
        Self::new(kappa_d, self.beta, self.kappa_a, self.kappa_b, self.kappa_c)
    }
}

impl<'de> Deserialize<'de> for TheoremConstants {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            kappa_d: f64,
            beta: f64,
            kappa_a: f64,
            kappa_b: f64,
            kappa_c: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        TheoremConstants::new(raw.kappa_d, raw.beta, raw.kappa_a, raw.kappa_b, raw.kappa_c)
            .map_err(serde::de::Error::custom)
    }
}
