//! Experiment configuration: a versioned JSON file merged with flags.

use std::path::{Path, PathBuf};

use clap::Args;
use disorder_rmt::ensembles::EnsembleSpec;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const SCHEMA: u64 = 1;

/// Flags shared by every experiment.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON experiment file (`"schema": 1`); flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model tag, e.g. `frisch-lloyd`, with default parameters.
    #[arg(long)]
    pub model: Option<String>,
    /// Override one model parameter, `key=value` with a JSON value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to write the JSON summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write CSV data (stdout for grid experiments when absent).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Settings resolved from the file and the flags.
#[derive(Debug, Clone)]
pub struct Resolved<A> {
    pub model: Option<EnsembleSpec>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub args: A,
}

impl<A> Resolved<A> {
    pub fn model(&self) -> Result<&EnsembleSpec, CliError> {
        self.model.as_ref().ok_or_else(|| CliError::Validation("a model is required (--model or \"model\" in the config)".into()))
    }
}

/// Parameters used by `--model TAG` before `--set` overrides.
pub fn default_model(tag: &str) -> Result<Value, CliError> {
    let exp1 = json!({"law": "exponential", "mean": 1.0});
    let params = match tag {
        "dyson-string" => json!({"mass": exp1, "spacing": exp1, "lambda": 1.0}),
        "dyson-type-i" => json!({"p": 1.0, "q": 1.0, "lambda": -1.0}),
        "frisch-lloyd" => json!({"coupling": exp1, "mean_spacing": 1.0, "energy": 1.0}),
        "kronig-penney" => json!({"coupling": 1.0, "spacing": 1.0, "energy": 1.0}),
        "anderson" => json!({"potential": {"law": "uniform", "low": -0.5, "high": 0.5}, "energy": 0.0}),
        "ising-chain" => json!({"beta": 1.0, "coupling": 1.0, "field": {"law": "normal", "mean": 0.0, "std": 1.0}}),
        "fibonacci" | "random-fibonacci" => json!({}),
        "bougerol-lacroix" => json!({"alpha": 2.0, "p": 0.5}),
        "cohen-newman" => json!({"alpha": 2.0, "beta": 1.0}),
        other => return Err(CliError::Validation(format!("unknown model `{other}`"))),
    };
    Ok(json!({"model": tag, "params": params}))
}

fn apply_sets(model: &mut Value, sets: &[String]) -> Result<(), CliError> {
    let params = model
        .get_mut("params")
        .and_then(Value::as_object_mut)
        .ok_or_else(|| CliError::Validation("model has no parameter object".into()))?;
    for s in sets {
        let (k, v) = s.split_once('=').ok_or_else(|| CliError::Validation(format!("--set expects KEY=VALUE, got `{s}`")))?;
        let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        params.insert(k.to_string(), v);
    }
    Ok(())
}

fn read_config(path: &Path, experiment: &str) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let mut map: Map<String, Value> = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    match map.remove("schema") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA) => {}
        Some(other) => return Err(CliError::Validation(format!("unsupported config schema {other}; expected {SCHEMA}"))),
        None => return Err(CliError::Validation("config file lacks \"schema\"".into())),
    }
    if let Some(e) = map.remove("experiment") {
        if e.as_str() != Some(experiment) {
            return Err(CliError::Validation(format!("config is for experiment {e}, not `{experiment}`")));
        }
    }
    Ok(map)
}

fn take<T: DeserializeOwned>(map: &mut Map<String, Value>, key: &str) -> Result<Option<T>, CliError> {
    match map.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v).map(Some).map_err(|e| CliError::Validation(format!("config field `{key}`: {e}"))),
    }
}

/// Merges the config file (if any) with the flags. Experiment-specific
/// fields are matched by name, flags winning, and unknown fields rejected.
pub fn resolve<A>(experiment: &str, common: &Common, flags: &A) -> Result<Resolved<A>, CliError>
where
    A: Serialize + DeserializeOwned,
{
    let mut file = match &common.config {
        Some(p) => read_config(p, experiment)?,
        None => Map::new(),
    };
    let mut model: Option<Value> = take(&mut file, "model")?;
    if let Some(tag) = &common.model {
        let same_tag = model.as_ref().and_then(|m| m.get("model")).and_then(Value::as_str) == Some(tag.as_str());
        if !same_tag {
            model = Some(default_model(tag)?);
        }
    }
    if !common.set.is_empty() {
        match model.as_mut() {
            Some(m) => apply_sets(m, &common.set)?,
            None => return Err(CliError::Validation("--set needs a model".into())),
        }
    }
    let model = match model {
        Some(m) => {
            let spec: EnsembleSpec = serde_json::from_value(m).map_err(|e| CliError::Validation(format!("model: {e}")))?;
            spec.validate()?;
            Some(spec)
        }
        None => None,
    };
    let seed = common.seed.or(take(&mut file, "seed")?).unwrap_or(1);
    let out = common.out.clone().or(take(&mut file, "out")?);
    let csv = common.csv.clone().or(take(&mut file, "csv")?);
    if let Value::Object(f) = serde_json::to_value(flags).expect("flags serialize") {
        for (k, v) in f {
            if !v.is_null() {
                file.insert(k, v);
            }
        }
    }
    let args = serde_json::from_value(Value::Object(file)).map_err(|e| CliError::Validation(format!("config: {e}")))?;
    Ok(Resolved { model, seed, out, csv, args })
}

/// `lo:hi:n` (inclusive, `n` points) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Validation(format!("bad grid `{s}`; use lo:hi:n or a comma list"));
    let parts: Vec<&str> = s.split(':').collect();
    let values = if parts.len() == 3 {
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n = count(parts[2].trim().parse().map_err(|_| bad())?, "grid size")?;
        match n {
            0 => return Err(bad()),
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    } else if parts.len() == 1 {
        s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?
    } else {
        return Err(bad());
    };
    if values.iter().any(|v: &f64| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

/// Counts are accepted in float notation (`1e7`) and must be whole.
pub fn count(x: f64, what: &str) -> Result<u64, CliError> {
    if !(x >= 0.0) || x.fract() != 0.0 || x > 2f64.powi(53) {
        return Err(CliError::Validation(format!("{what} must be a non-negative integer, got {x}")));
    }
    Ok(x as u64)
}
