//! File formats: flat key-value configs, CSV tables and JSON manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

/// Shortest round-trip formatting of a float (`%.17g`-equivalent precision
/// without trailing noise). Non-finite values print as `nan`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        let s = format!("{x:?}");
        s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
    }
}

/// A CSV table built row by row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    body: String,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            body: String::new(),
        }
    }

    pub fn columns(&self) -> usize {
        self.header.len()
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(self.body, "{}", cells.join(","));
    }

    /// Pushes a row whose first cell is an integer label.
    pub fn push_indexed(&mut self, index: usize, row: &[f64]) {
        assert_eq!(row.len() + 1, self.header.len(), "row width differs from header");
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(self.body, "{index},{}", cells.join(","));
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", self.header.join(","), self.body)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Column names `prefix_1..prefix_d`.
pub fn indexed_columns(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}_{i}")).collect()
}

/// Parses a CSV with one header line into (header, rows).
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::input(format!("{} is empty", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        let row = l
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::input(format!("{} row {}: {e}", path.display(), i + 2)))?;
        if row.len() != header.len() {
            return Err(Error::input(format!("{} row {} has {} cells", path.display(), i + 2, row.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Flat `key = value` configuration. `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let k = k.trim().replace('-', "_");
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", i + 1)));
            }
            if entries.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", i + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets or overrides a key; dashes are normalised to underscores.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.replace('-', "_"), value.into());
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for k in self.entries.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::Config(format!("`{key}` = `{v}`: {e}"))))
            .transpose()
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parsed(key)?;
        match v {
            Some(x) if !x.is_finite() => Err(Error::Config(format!("`{key}` must be finite"))),
            _ => Ok(v),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(v) => Err(Error::Config(format!("`{key}` = `{v}` is not a boolean"))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// Comma-separated floats.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Config(format!("`{key}` entry `{}`: {e}", s.trim())))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Renders back to the file format (sorted keys).
    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
