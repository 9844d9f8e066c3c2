//! Experiment configuration: typed parameters, `min:max:step` ranges and the
//! flat `key = value` file format.
//!
//! Values are layered: schema defaults, then the config file, then `--set`
//! overrides, then dedicated command-line flags. Every layer is checked
//! against the experiment's schema, so a misspelled key is an error rather
//! than a silently ignored setting.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Seed used when none is given, so that runs are reproducible by default.
pub const DEFAULT_SEED: u64 = 0;

/// Keys every config file may contain besides the experiment's parameters.
pub const RESERVED_KEYS: [&str; 4] = ["experiment", "seed", "out", "format"];

/// Type of a parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Finite real number.
    Real,
    /// Signed integer.
    Int,
    /// Non-negative integer.
    Count,
    /// `min:max:step` range of reals (a single number is a one-point range).
    Range,
    /// Two reals, written `a,b` (or as two values after the flag).
    Pair,
    /// One of a fixed set of words.
    Choice(&'static [&'static str]),
    /// Free text, e.g. a file path.
    Text,
}

/// One entry of an experiment schema.
#[derive(Clone, Copy, Debug)]
pub struct ParamSpec {
    /// Key in config files and long flag name.
    pub key: &'static str,
    /// Value type.
    pub kind: Kind,
    /// Default, written in the config syntax.
    pub default: &'static str,
    /// One-line description for `--help`.
    pub help: &'static str,
}

impl ParamSpec {
    /// Schema entry.
    pub const fn new(key: &'static str, kind: Kind, default: &'static str, help: &'static str) -> Self {
        Self { key, kind, default, help }
    }
}

/// Inclusive arithmetic range min, min+step, …, ≤ max.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    /// First point.
    pub min: f64,
    /// Upper end (included when it lies on the lattice).
    pub max: f64,
    /// Positive spacing.
    pub step: f64,
}

impl Range {
    /// Validated range; it always contains at least `min`.
    pub fn new(min: f64, max: f64, step: f64) -> CliResult<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(CliError::config("range bounds must be finite"));
        }
        if max < min {
            return Err(CliError::config(format!("empty range {min}:{max}:{step} (max < min)")));
        }
        if !(step > 0.0) {
            return Err(CliError::config(format!("range step must be positive, got {step}")));
        }
        Ok(Self { min, max, step })
    }

    /// One-point range.
    pub fn single(x: f64) -> CliResult<Self> {
        Self::new(x, x, 1.0)
    }

    /// Number of points; the end point is kept when it is within 10⁻⁹ steps
    /// of the lattice so that `-3:3:0.015625` has 385 points.
    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    /// Never empty.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The points, computed as min + k·step (no accumulated round-off).
    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.min + k as f64 * self.step).collect()
    }

    /// The points as counts; every point must be a non-negative integer.
    pub fn counts(&self) -> CliResult<Vec<usize>> {
        self.points()
            .into_iter()
            .map(|x| {
                let r = x.round();
                if (x - r).abs() > 1e-9 || r < 0.0 {
                    Err(CliError::config(format!("range point {x} is not a non-negative integer")))
                } else {
                    Ok(r as usize)
                }
            })
            .collect()
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.step)
    }
}

/// A parsed parameter value.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    /// See [`Kind::Real`].
    Real(f64),
    /// See [`Kind::Int`].
    Int(i64),
    /// See [`Kind::Count`].
    Count(usize),
    /// See [`Kind::Range`].
    Range(Range),
    /// See [`Kind::Pair`].
    Pair(f64, f64),
    /// See [`Kind::Choice`] and [`Kind::Text`].
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(x) => write!(f, "{x}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Count(n) => write!(f, "{n}"),
            Value::Range(r) => write!(f, "{r}"),
            Value::Pair(a, b) => write!(f, "{a},{b}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

fn parse_real(key: &str, s: &str) -> CliResult<f64> {
    let x: f64 = s.trim().parse().map_err(|_| CliError::config(format!("{key}: '{s}' is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::config(format!("{key}: '{s}' is not finite")));
    }
    Ok(x)
}

/// Parses `text` as a value of type `kind`.
pub fn parse_value(key: &str, kind: Kind, text: &str) -> CliResult<Value> {
    let s = text.trim();
    Ok(match kind {
        Kind::Real => Value::Real(parse_real(key, s)?),
        Kind::Int => Value::Int(s.parse().map_err(|_| CliError::config(format!("{key}: '{s}' is not an integer")))?),
        Kind::Count => {
            Value::Count(s.parse().map_err(|_| CliError::config(format!("{key}: '{s}' is not a non-negative integer")))?)
        }
        Kind::Range => {
            let parts: Vec<&str> = s.split(':').collect();
            let r = match parts.as_slice() {
                [x] => Range::single(parse_real(key, x)?),
                [a, b, c] => Range::new(parse_real(key, a)?, parse_real(key, b)?, parse_real(key, c)?),
                _ => return Err(CliError::config(format!("{key}: '{s}' is not a number or min:max:step range"))),
            };
            Value::Range(r.map_err(|e| CliError::config(format!("{key}: {e}")))?)
        }
        Kind::Pair => {
            let parts: Vec<&str> = s.split([',', ' ']).filter(|p| !p.is_empty()).collect();
            match parts.as_slice() {
                [a, b] => Value::Pair(parse_real(key, a)?, parse_real(key, b)?),
                _ => return Err(CliError::config(format!("{key}: '{s}' is not a pair 'a,b'"))),
            }
        }
        Kind::Choice(options) => {
            if !options.contains(&s) {
                return Err(CliError::config(format!("{key}: '{s}' is not one of {}", options.join(", "))));
            }
            Value::Text(s.to_string())
        }
        Kind::Text => Value::Text(s.to_string()),
    })
}

/// Output file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// Comma-separated values with a header row.
    Csv,
    /// Columns, rows and metadata as one JSON object.
    Json,
}

impl Format {
    /// Parses `csv` or `json`.
    pub fn parse(s: &str) -> CliResult<Self> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(CliError::config(format!("format: '{other}' is not csv or json"))),
        }
    }

    /// Format implied by a file extension (JSON for `.json`, CSV otherwise).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Csv,
        }
    }

    /// File extension without the dot.
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// A fully resolved experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Experiment name, e.g. `ising-scan` or `gpe-ground 3d`.
    pub experiment: String,
    /// Every schema key with its value.
    pub params: BTreeMap<String, Value>,
    /// RNG seed.
    pub seed: u64,
    /// Primary output path; standard output when absent.
    pub output: Option<PathBuf>,
    /// Explicit output format; otherwise taken from the output extension.
    pub format: Option<Format>,
    /// Record the wall time in the output metadata (makes outputs differ
    /// between runs).
    pub record_time: bool,
}

impl ExperimentConfig {
    /// Configuration holding the schema defaults.
    pub fn defaults(experiment: &str, schema: &[ParamSpec]) -> CliResult<Self> {
        let mut params = BTreeMap::new();
        for p in schema {
            params.insert(p.key.to_string(), parse_value(p.key, p.kind, p.default)?);
        }
        Ok(Self {
            experiment: experiment.to_string(),
            params,
            seed: DEFAULT_SEED,
            output: None,
            format: None,
            record_time: false,
        })
    }

    /// Sets `key` from its textual form; unknown keys are rejected.
    pub fn set(&mut self, schema: &[ParamSpec], key: &str, text: &str) -> CliResult<()> {
        match key {
            "seed" => {
                self.seed = text.trim().parse().map_err(|_| CliError::config(format!("seed: '{text}' is not a u64")))?;
            }
            "out" => self.output = Some(PathBuf::from(text.trim())),
            "format" => self.format = Some(Format::parse(text)?),
            "experiment" => {
                if text.trim() != self.experiment {
                    return Err(CliError::config(format!(
                        "config is for experiment '{}', not '{}'",
                        text.trim(),
                        self.experiment
                    )));
                }
            }
            _ => {
                let spec = schema.iter().find(|p| p.key == key).ok_or_else(|| {
                    let known: Vec<&str> = schema.iter().map(|p| p.key).collect();
                    CliError::config(format!(
                        "unknown key '{key}' for {} (known: {})",
                        self.experiment,
                        known.join(", ")
                    ))
                })?;
                self.params.insert(key.to_string(), parse_value(key, spec.kind, text)?);
            }
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, schema: &[ParamSpec], assignment: &str) -> CliResult<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("override '{assignment}' is not key=value")))?;
        self.set(schema, k.trim(), v)
    }

    /// Applies every entry of a config file's text: `key = value` lines,
    /// `#` comments and blank lines.
    pub fn apply_file_text(&mut self, schema: &[ParamSpec], text: &str) -> CliResult<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: '{raw}' is not key = value", lineno + 1)))?;
            self.set(schema, k.trim(), v).map_err(|e| match e {
                CliError::Config(m) => CliError::config(format!("line {}: {m}", lineno + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    fn get(&self, key: &str) -> CliResult<&Value> {
        self.params.get(key).ok_or_else(|| CliError::config(format!("missing parameter '{key}'")))
    }

    fn mismatch(&self, key: &str, want: &str) -> CliError {
        CliError::config(format!("parameter '{key}' is not {want}"))
    }

    /// Real parameter (integers are accepted).
    pub fn real(&self, key: &str) -> CliResult<f64> {
        match self.get(key)? {
            Value::Real(x) => Ok(*x),
            Value::Int(i) => Ok(*i as f64),
            Value::Count(n) => Ok(*n as f64),
            _ => Err(self.mismatch(key, "a real number")),
        }
    }

    /// Signed integer parameter.
    pub fn int(&self, key: &str) -> CliResult<i64> {
        match self.get(key)? {
            Value::Int(i) => Ok(*i),
            _ => Err(self.mismatch(key, "an integer")),
        }
    }

    /// Count parameter.
    pub fn count(&self, key: &str) -> CliResult<usize> {
        match self.get(key)? {
            Value::Count(n) => Ok(*n),
            _ => Err(self.mismatch(key, "a count")),
        }
    }

    /// Range parameter.
    pub fn range(&self, key: &str) -> CliResult<Range> {
        match self.get(key)? {
            Value::Range(r) => Ok(*r),
            _ => Err(self.mismatch(key, "a range")),
        }
    }

    /// Pair parameter.
    pub fn pair(&self, key: &str) -> CliResult<(f64, f64)> {
        match self.get(key)? {
            Value::Pair(a, b) => Ok((*a, *b)),
            _ => Err(self.mismatch(key, "a pair")),
        }
    }

    /// Text or choice parameter.
    pub fn text(&self, key: &str) -> CliResult<&str> {
        match self.get(key)? {
            Value::Text(s) => Ok(s),
            _ => Err(self.mismatch(key, "text")),
        }
    }

    /// Parameters in their textual form, for output metadata.
    pub fn describe(&self) -> BTreeMap<String, String> {
        self.params.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
    }
}

/// Domain checks shared by the experiments; each returns a configuration
/// error naming the key.
pub mod check {
    use super::*;

    /// x > 0.
    pub fn positive(key: &str, x: f64) -> CliResult<f64> {
        if x > 0.0 {
            Ok(x)
        } else {
            Err(CliError::config(format!("{key} must be > 0, got {x}")))
        }
    }

    /// x ≥ 0.
    pub fn non_negative(key: &str, x: f64) -> CliResult<f64> {
        if x >= 0.0 {
            Ok(x)
        } else {
            Err(CliError::config(format!("{key} must be >= 0, got {x}")))
        }
    }

    /// n ≥ min.
    pub fn at_least(key: &str, n: usize, min: usize) -> CliResult<usize> {
        if n >= min {
            Ok(n)
        } else {
            Err(CliError::config(format!("{key} must be >= {min}, got {n}")))
        }
    }

    /// lo ≤ x ≤ hi.
    pub fn within(key: &str, x: f64, lo: f64, hi: f64) -> CliResult<f64> {
        if (lo..=hi).contains(&x) {
            Ok(x)
        } else {
            Err(CliError::config(format!("{key} must lie in [{lo}, {hi}], got {x}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: [ParamSpec; 4] = [
        ParamSpec::new("n", Kind::Count, "10", ""),
        ParamSpec::new("b", Kind::Range, "-3:3:0.015625", ""),
        ParamSpec::new("bracket", Kind::Pair, "0.5,6", ""),
        ParamSpec::new("kind", Kind::Choice(&["ising", "xy"]), "ising", ""),
    ];

    #[test]
    fn range_counts_include_the_end_point() {
        let r = Range::new(-3.0, 3.0, 0.015625).unwrap();
        assert_eq!(r.len(), 385);
        assert_eq!(*r.points().last().unwrap(), 3.0);
        assert_eq!(Range::new(8.0, 32.0, 2.0).unwrap().counts().unwrap().len(), 13);
        assert_eq!(Range::new(0.0, 1.0, 0.3).unwrap().len(), 4);
        assert!(Range::new(1.0, 0.0, 0.1).is_err());
        assert!(Range::new(0.0, 1.0, 0.0).is_err());
        assert!(Range::new(0.0, 1.0, 0.5).unwrap().counts().is_err());
    }

    #[test]
    fn layered_settings() {
        let mut c = ExperimentConfig::defaults("demo", &SCHEMA).unwrap();
        assert_eq!(c.count("n").unwrap(), 10);
        c.apply_file_text(&SCHEMA, "# comment\n n = 12 \n\nseed=5\nformat = json\n").unwrap();
        c.apply_override(&SCHEMA, "bracket=1 2").unwrap();
        assert_eq!(c.count("n").unwrap(), 12);
        assert_eq!(c.seed, 5);
        assert_eq!(c.format, Some(Format::Json));
        assert_eq!(c.pair("bracket").unwrap(), (1.0, 2.0));
        assert_eq!(c.describe()["b"], "-3:3:0.015625");
    }

    #[test]
    fn bad_input_is_a_config_error() {
        let mut c = ExperimentConfig::defaults("demo", &SCHEMA).unwrap();
        for bad in ["m=3", "n=-1", "n=x", "b=1:0:1", "b=1:2", "kind=heisenberg", "bracket=1", "nokey", "seed=-2"] {
            let e = c.apply_override(&SCHEMA, bad).unwrap_err();
            assert!(matches!(e, CliError::Config(_)), "{bad}");
        }
        let e = c.apply_file_text(&SCHEMA, "n = 3\nwhat = 4\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(c.apply_file_text(&SCHEMA, "experiment = other\n").is_err());
        assert!(parse_value("x", Kind::Real, "nan").is_err());
    }
}
