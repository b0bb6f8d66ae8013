//! Layered configuration: built-in defaults, then the command's section of
//! the JSON config file, then command-line flags.
//!
//! A config file is an object keyed by subcommand name:
//!
//! ```json
//! { "run": { "algo": "tr", "set": { "eta1": 0.2 } }, "audit": { "kappa_d": 0.05 } }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

pub const SUBCOMMANDS: [&str; 5] = ["run", "audit", "hard-instance", "fit", "plot"];

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    root: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("config {}: {e}", path.display())))?;
        let Value::Object(root) = value else {
            return Err(CliError::input(format!(
                "config {} must be a JSON object keyed by subcommand",
                path.display()
            )));
        };
        if let Some(bad) = root.keys().find(|k| !SUBCOMMANDS.contains(&k.as_str())) {
            return Err(CliError::input(format!(
                "config {}: unknown section {bad:?}; valid: {}",
                path.display(),
                SUBCOMMANDS.join(", ")
            )));
        }
        Ok(Self { root })
    }

    fn section(&self, name: &str) -> Result<Option<&Value>, CliError> {
        match self.root.get(name) {
            None => Ok(None),
            Some(v @ Value::Object(_)) => Ok(Some(v)),
            Some(_) => Err(CliError::input(format!(
                "config section {name:?} must be an object"
            ))),
        }
    }
}

/// Objects merge key by key; anything else in `top` replaces `base`.
pub fn merge(base: &mut Value, top: &Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, t) => *b = t.clone(),
    }
}

/// Resolves the effective config for one subcommand. Returns the typed
/// config and its JSON form for echoing into outputs.
pub fn resolve<C>(file: &ConfigFile, name: &str, flags: Value) -> Result<(C, Value), CliError>
where
    C: Default + Serialize + DeserializeOwned,
{
    let mut value = serde_json::to_value(C::default()).expect("defaults serialize");
    if let Some(section) = file.section(name)? {
        merge(&mut value, section);
    }
    merge(&mut value, &flags);
    let config: C = serde_json::from_value(value)
        .map_err(|e| CliError::input(format!("{name} config: {e}")))?;
    let echo = serde_json::to_value(&config).expect("config serializes");
    Ok((config, echo))
}

/// Parses repeated `key=value` flags into a JSON object of numbers.
pub fn parse_settings(pairs: &[String]) -> Result<Value, CliError> {
    let mut out = Map::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("--set expects key=value, got {pair:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("--set {k}: {v:?} is not a number")))?;
        let v = serde_json::Number::from_f64(v)
            .ok_or_else(|| CliError::input(format!("--set {k}: value must be finite")))?;
        out.insert(k.trim().to_string(), Value::Number(v));
    }
    Ok(Value::Object(out))
}

/// Fails unless `path` exists and is a file.
pub fn input_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::input(format!(
            "{what} {} not found",
            path.display()
        )))
    }
}

/// Fails unless the directory `path` would be written into exists.
pub fn output_file(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::input(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

/// `out` with its extension replaced.
pub fn sibling(out: &Path, extension: &str) -> PathBuf {
    out.with_extension(extension)
}
