//! Flat key=value experiment configs. Values are strings; rationals are
//! written exactly ("355/113") so exact code paths never see a binary float
//! unless the user wrote a decimal literal (which is then converted to its
//! exact binary value).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use latflow::{Dims, QMat, Rat};
use num_traits::FromPrimitive;

/// A config error: maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// A parsed config: ordered key -> raw string value.
#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value", lineno + 1));
            };
            let key = k.trim().to_string();
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return err(format!("duplicate key {key}"));
            }
        }
        Ok(Config { entries })
    }

    /// Canonical serialization used for the config hash: sorted
    /// "key=value" lines.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError(format!("{key}: bad integer {v:?}"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError(format!("{key}: bad integer {v:?}"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError(format!("{key}: bad number {v:?}"))),
        }
    }

    pub fn dims(&self, default_n: usize, default_d: usize) -> Result<Dims, ConfigError> {
        let n = self.usize_or("n", default_n)?;
        let d = self.usize_or("d", default_d)?;
        Dims::new(n, d).map_err(|e| ConfigError(e.to_string()))
    }

    /// Required rational vector, entries separated by whitespace or commas.
    pub fn rat_vec(&self, key: &str) -> Result<Vec<Rat>, ConfigError> {
        let Some(v) = self.get(key) else {
            return err(format!("missing required key {key}"));
        };
        parse_rat_list(v).map_err(|m| ConfigError(format!("{key}: {m}")))
    }

    /// Required rational matrix: rows separated by ';', entries by
    /// whitespace or commas.
    pub fn rat_matrix(&self, key: &str) -> Result<QMat, ConfigError> {
        let Some(v) = self.get(key) else {
            return err(format!("missing required key {key}"));
        };
        let rows = v
            .split(';')
            .map(parse_rat_list)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|m| ConfigError(format!("{key}: {m}")))?;
        QMat::from_rows(rows).map_err(|e| ConfigError(format!("{key}: {e}")))
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| ConfigError(format!("{key}: bad number {s:?}"))))
                .collect(),
        }
    }

    pub fn u64_list_or(&self, key: &str, default: &[u64]) -> Result<Vec<u64>, ConfigError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| ConfigError(format!("{key}: bad integer {s:?}"))))
                .collect(),
        }
    }
}

fn parse_rat_list(s: &str) -> Result<Vec<Rat>, String> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(parse_rat)
        .collect()
}

/// One exact scalar: "p/q", an integer, or a decimal literal taken at its
/// exact binary f64 value.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator {p:?}"))?;
        let q: i64 = q.trim().parse().map_err(|_| format!("bad denominator {q:?}"))?;
        if q == 0 {
            return Err("zero denominator".into());
        }
        return Ok(Rat::new(p.into(), q.into()));
    }
    if let Ok(i) = s.parse::<i64>() {
        return Ok(Rat::from_integer(i.into()));
    }
    let f: f64 = s.parse().map_err(|_| format!("bad number {s:?}"))?;
    if !f.is_finite() {
        return Err(format!("non-finite value {s:?}"));
    }
    Rat::from_f64(f).ok_or_else(|| format!("cannot represent {s:?}"))
}
