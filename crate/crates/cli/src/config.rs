//! Flat `key=value` configuration, parameter schemas and the canonical config hash.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};

/// Keys handled by the runner itself rather than by a command.
pub const RESERVED: [&str; 5] = ["command", "seed", "tolerance", "format", "out"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(ConfigError(format!("format must be csv, json or svg, got {other:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Reads a config file: one `key=value` per line, `#` starts a comment line.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = parse_assignment(line).map_err(|e| ConfigError(format!("line {}: {}", lineno + 1, e.0)))?;
        if out.insert(k.clone(), v).is_some() {
            return Err(ConfigError(format!("line {}: duplicate key {k:?}", lineno + 1)));
        }
    }
    Ok(out)
}

pub fn parse_assignment(s: &str) -> Result<(String, String), ConfigError> {
    let (k, v) = s.split_once('=').ok_or_else(|| ConfigError(format!("expected key=value, got {s:?}")))?;
    let k = k.trim();
    if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(ConfigError(format!("invalid key {k:?}")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// One documented parameter of a command.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

/// Effective parameter values of a command after defaults and overrides.
#[derive(Debug, Clone)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    /// Fills defaults from `schema`, then applies `overrides`. Unknown keys are rejected.
    pub fn resolve(schema: &[ParamSpec], overrides: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<String, String> =
            schema.iter().map(|p| (p.key.to_string(), p.default.to_string())).collect();
        for (k, v) in overrides {
            if RESERVED.contains(&k.as_str()) {
                continue;
            }
            if !values.contains_key(k) {
                let known: Vec<&str> = schema.iter().map(|p| p.key).collect();
                return Err(ConfigError(format!("unknown parameter {k:?}; expected one of {known:?}")));
            }
            values.insert(k.clone(), v.clone());
        }
        Ok(Self { values })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("parameter {key} missing from schema"))
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        parse_f64(key, self.raw(key))
    }

    pub fn int<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let s = self.raw(key);
        s.parse().map_err(|_| ConfigError(format!("{key}: expected an integer, got {s:?}")))
    }

    pub fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        match self.raw(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            s => Err(ConfigError(format!("{key}: expected a boolean, got {s:?}"))),
        }
    }

    /// Comma separated reals; the empty string is the empty list.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        split_list(self.raw(key), ',').map(|s| parse_f64(key, s)).collect()
    }

    /// Comma separated complex numbers written `re:im`.
    pub fn complex_list(&self, key: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
        complex_list(key, self.raw(key))
    }

    /// Semicolon separated groups of `re:im` lists.
    pub fn complex_groups(&self, key: &str) -> Result<Vec<Vec<(f64, f64)>>, ConfigError> {
        split_list(self.raw(key), ';').map(|g| complex_list(key, g)).collect()
    }
}

fn split_list(s: &str, sep: char) -> impl Iterator<Item = &str> {
    s.split(sep).map(str::trim).filter(|x| !x.is_empty())
}

fn parse_f64(key: &str, s: &str) -> Result<f64, ConfigError> {
    match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ConfigError(format!("{key}: expected a finite number, got {s:?}"))),
    }
}

/// Semicolon separated groups of comma separated reals.
pub fn f64_groups(key: &str, s: &str) -> Result<Vec<Vec<f64>>, ConfigError> {
    split_list(s, ';').map(|g| split_list(g, ',').map(|x| parse_f64(key, x)).collect()).collect()
}

pub fn complex_list(key: &str, s: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
    split_list(s, ',')
        .map(|z| match z.split_once(':') {
            Some((re, im)) => Ok((parse_f64(key, re)?, parse_f64(key, im)?)),
            None => Ok((parse_f64(key, z)?, 0.0)),
        })
        .collect()
}

/// SHA-256 of the canonical text `key=value\n` over all effective settings, sorted by key.
///
/// The output path is excluded so that the same experiment hashes the same wherever it is written.
pub fn config_hash(command: &str, seed: u64, tolerance: f64, format: Format, params: &Params) -> String {
    let mut all: BTreeMap<String, String> = params.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    all.insert("command".into(), command.into());
    all.insert("seed".into(), seed.to_string());
    all.insert("tolerance".into(), format!("{tolerance:e}"));
    all.insert("format".into(), format.as_str().into());
    let mut h = Sha256::new();
    for (k, v) in &all {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: [ParamSpec; 2] = [
        ParamSpec { key: "x", default: "1,2", help: "" },
        ParamSpec { key: "mu", default: "0:5,0:-5", help: "" },
    ];

    #[test]
    fn parses_files_and_lists() {
        let m = parse_config("# comment\nx = 3, 4\n\nseed=7\n").unwrap();
        assert_eq!(m["x"], "3, 4");
        let p = Params::resolve(&SCHEMA, &m).unwrap();
        assert_eq!(p.f64_list("x").unwrap(), vec![3.0, 4.0]);
        assert_eq!(p.complex_list("mu").unwrap(), vec![(0.0, 5.0), (0.0, -5.0)]);
        assert!(parse_config("x=1\nx=2").is_err());
        assert!(parse_config("novalue").is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_numbers() {
        let mut m = BTreeMap::new();
        m.insert("y".to_string(), "1".to_string());
        assert!(Params::resolve(&SCHEMA, &m).is_err());
        m.clear();
        m.insert("x".to_string(), "1,nan".to_string());
        assert!(Params::resolve(&SCHEMA, &m).unwrap().f64_list("x").is_err());
    }

    #[test]
    fn hash_depends_on_effective_values_only() {
        let p = Params::resolve(&SCHEMA, &BTreeMap::new()).unwrap();
        let mut m = BTreeMap::new();
        m.insert("x".to_string(), "1,2".to_string());
        let q = Params::resolve(&SCHEMA, &m).unwrap();
        let h = config_hash("toy", 1, 0.1, Format::Json, &p);
        assert_eq!(h, config_hash("toy", 1, 0.1, Format::Json, &q));
        assert_eq!(h.len(), 64);
        assert_ne!(h, config_hash("toy", 2, 0.1, Format::Json, &p));
    }
}
