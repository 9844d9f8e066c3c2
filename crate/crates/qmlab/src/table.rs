//! Result tables and their CSV/JSON files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::error::{CliError, CliResult};

/// Provenance block attached to every table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    /// Experiment name.
    pub experiment: String,
    /// Parameters in their config syntax.
    pub parameters: BTreeMap<String, String>,
    /// RNG seed.
    pub seed: u64,
    /// Crate version that produced the table.
    pub version: String,
    /// Wall time in seconds, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    /// Physical constants used by the run.
    pub constants: BTreeMap<String, f64>,
    /// Scalar results (fit exponents, chemical potentials, p-values, …).
    pub results: BTreeMap<String, f64>,
}

/// A rectangular numeric table with named columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    /// Column names.
    pub columns: Vec<String>,
    /// Row-major data; every row has one entry per column.
    pub rows: Vec<Vec<f64>>,
    /// Provenance.
    pub metadata: Metadata,
}

impl ResultTable {
    /// Empty table with the given columns.
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), ..Self::default() }
    }

    /// Appends a row; its length must match the columns.
    pub fn push(&mut self, row: Vec<f64>) -> CliResult<()> {
        if row.len() != self.columns.len() {
            return Err(CliError::Format(format!("row has {} entries, table has {} columns", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Records a scalar result in the metadata.
    pub fn result(&mut self, key: &str, value: f64) {
        self.metadata.results.insert(key.to_string(), value);
    }

    /// Index of a column by name.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of a column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Checks that every row has one entry per column.
    pub fn is_rectangular(&self) -> bool {
        self.rows.iter().all(|r| r.len() == self.columns.len())
    }

    /// CSV text: header row, `\n` line endings, reals with 17 significant
    /// digits (integers are written exactly, without an exponent).
    pub fn to_csv(&self) -> CliResult<String> {
        if !self.is_rectangular() {
            return Err(CliError::Format("table is not rectangular".into()));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format_real(*x)))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Format(e.to_string()))
    }

    /// JSON text: columns, rows and metadata. Non-finite entries have no
    /// JSON representation and are rejected.
    pub fn to_json(&self) -> CliResult<String> {
        if !self.is_rectangular() {
            return Err(CliError::Format("table is not rectangular".into()));
        }
        let finite = self.rows.iter().flatten().chain(self.metadata.results.values()).all(|x| x.is_finite());
        if !finite {
            return Err(CliError::Format("non-finite values cannot be written as JSON".into()));
        }
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses the JSON form.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let t: Self = serde_json::from_str(text)?;
        if !t.is_rectangular() {
            return Err(CliError::Format("table is not rectangular".into()));
        }
        Ok(t)
    }

    /// Parses the CSV form (columns and rows; CSV carries no metadata).
    pub fn from_csv(text: &str) -> CliResult<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let mut t = Self::new(r.headers()?.iter());
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| CliError::Format(format!("'{f}' is not a number"))))
                .collect::<CliResult<Vec<f64>>>()?;
            t.push(row)?;
        }
        Ok(t)
    }

    /// Serialized form in `format`.
    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Shortest exact form for integers, 17 significant digits otherwise.
pub fn format_real(x: f64) -> String {
    if x.is_finite() && x == x.trunc() && x.abs() < 9.007_199_254_740_992e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.16e}")
    }
}

/// Writes `t` to `path` in `format`, creating parent directories.
pub fn write_table(t: &ResultTable, path: &Path, format: Format) -> CliResult<()> {
    let text = t.render(format)?;
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)?;
    Ok(())
}

/// Reads a table written by [`write_table`].
pub fn read_table(path: &Path, format: Format) -> CliResult<ResultTable> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    match format {
        Format::Csv => ResultTable::from_csv(&text),
        Format::Json => ResultTable::from_json(&text),
    }
}
