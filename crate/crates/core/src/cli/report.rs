//! JSON reports and CSV tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::CliError;

/// Version tag written at the top of every CSV file.
pub const CSV_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub threshold: f64,
}

impl Verdict {
    pub fn at_most(name: &str, residual: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            pass: residual <= threshold,
            residual,
            threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeRow {
    pub omega: f64,
    pub occupation: f64,
    pub coupling: f64,
    pub loss_rate: f64,
    pub gain_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub pass: bool,
    pub verdicts: Vec<Verdict>,
    pub residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<ModeRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub data: serde_json::Map<String, serde_json::Value>,
}

impl Report {
    pub fn new(command: Vec<String>, seed: Option<u64>) -> Self {
        Self {
            command,
            pass: true,
            verdicts: Vec::new(),
            residuals: BTreeMap::new(),
            modes: Vec::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
            provenance: Provenance {
                version: env!("CARGO_PKG_VERSION"),
                tolerances: BTreeMap::new(),
                seed,
            },
            data: serde_json::Map::new(),
        }
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.provenance.tolerances.insert(name.to_string(), value);
    }

    pub fn residual(&mut self, name: &str, value: f64) {
        self.residuals.insert(name.to_string(), value);
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.residuals.insert(v.name.clone(), v.residual);
        self.pass &= v.pass;
        self.verdicts.push(v);
    }

    pub fn insert<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).expect("report data serializes");
        self.data.insert(key.to_string(), v);
    }

    pub fn write(&self, out: Option<&Path>) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        match out {
            Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::io(p, e)),
            None => print_stdout(&text),
        }
    }
}

/// Prints to standard output; a closed pipe is not an error.
pub fn print_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::semantic(format!("write failed: {e}")))
        }
        _ => Ok(()),
    }
}

/// `{:.16e}`, i.e. 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a versioned CSV table to `out` or standard output.
pub fn write_csv(out: Option<&Path>, kind: &str, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| CliError::io(p, e))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut sink = std::io::BufWriter::new(sink);
    let err = |e: std::io::Error| CliError::semantic(format!("write failed: {e}"));
    match writeln!(sink, "# gds-{kind} v{CSV_FORMAT_VERSION}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return Ok(()),
        r => r.map_err(err)?,
    }
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| CliError::semantic(format!("write failed: {e}"));
    let result = w.write_record(header).and_then(|_| {
        rows.iter()
            .try_for_each(|row| w.write_record(row.iter().map(|x| fmt_num(*x))))
    });
    match result {
        Err(e) if matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe) => {
            return Ok(())
        }
        r => r.map_err(csv_err)?,
    }
    match w.flush() {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(err(e)),
        _ => Ok(()),
    }
}
