//! JSON summaries and CSV tables.

use std::io::Write;
use std::path::Path;

use disorder_rmt::ensembles::EnsembleSpec;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::SCHEMA;
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct Summary {
    pub schema: u64,
    pub experiment: String,
    pub model: Option<String>,
    pub params: Value,
    pub seed: u64,
    pub n: Option<u64>,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub extra: Map<String, Value>,
}

impl Summary {
    pub fn new(experiment: &str, model: Option<&EnsembleSpec>, seed: u64) -> Self {
        let (tag, params) = match model {
            Some(m) => {
                let v = serde_json::to_value(m).expect("models serialize");
                (Some(m.tag().to_string()), v.get("params").cloned().unwrap_or(Value::Null))
            }
            None => (None, Value::Null),
        };
        Summary {
            schema: SCHEMA,
            experiment: experiment.to_string(),
            model: tag,
            params,
            seed,
            n: None,
            value: None,
            stderr: None,
            extra: Map::new(),
        }
    }

    pub fn estimate(mut self, value: f64, stderr: f64, n: u64) -> Self {
        self.value = Some(value);
        self.stderr = Some(stderr);
        self.n = Some(n);
        self
    }

    pub fn with(mut self, key: &str, v: impl Serialize) -> Self {
        self.extra.insert(key.to_string(), serde_json::to_value(v).expect("extra fields serialize"));
        self
    }

    /// Writes to `out`, or prints when there is none.
    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("summary serializes");
        match out {
            Some(p) => std::fs::write(p, text + "\n")?,
            None => print_line(&text)?,
        }
        Ok(())
    }
}

/// Prints one line; a closed pipe downstream (`| head`) is not an error.
pub fn print_line(text: &str) -> Result<(), CliError> {
    quiet_pipe(writeln!(std::io::stdout().lock(), "{text}"))
}

fn quiet_pipe(r: std::io::Result<()>) -> Result<(), CliError> {
    match r {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

/// A table with a fixed header; cells are written with `{}` so floats
/// come out as shortest round-trip decimals.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: &[Option<f64>]) {
        self.rows.push(row.iter().map(|c| c.map(|x| x.to_string()).unwrap_or_default()).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(e) => e,
            other => std::io::Error::other(format!("{other:?}")),
        };
        let mut write = || -> std::io::Result<()> {
            out.write_record(&self.header).map_err(io)?;
            for r in &self.rows {
                out.write_record(r).map_err(io)?;
            }
            out.flush()
        };
        quiet_pipe(write())
    }

    /// Writes to `path`, or to stdout when there is none.
    pub fn emit(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(p) => self.write_to(std::fs::File::create(p)?),
            None => self.write_to(std::io::stdout().lock()),
        }
    }
}
