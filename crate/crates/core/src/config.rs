//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are dotted
//! names such as `flow.nu`; values are parsed on access.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct KeyValueConfig {
    entries: BTreeMap<String, String>,
}

impl KeyValueConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("cannot parse value '{v}' for key '{key}'"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("cannot parse list item '{s}' for key '{key}'")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_types() {
        let c = KeyValueConfig::parse("# run\nflow.nu = 4\n\nflow.kind=random_cellular\nkappas = 1e-3, 3e-4\n").unwrap();
        assert_eq!(c.get::<f64>("flow.nu").unwrap(), Some(4.0));
        assert_eq!(c.raw("flow.kind"), Some("random_cellular"));
        assert_eq!(c.get_list::<f64>("kappas").unwrap(), Some(vec![1e-3, 3e-4]));
        assert_eq!(c.get_or("missing", 7usize).unwrap(), 7);
        assert!(c.get::<usize>("flow.kind").is_err());
    }

    #[test]
    fn rejects_malformed() {
        assert!(KeyValueConfig::parse("novalue").is_err());
        assert!(KeyValueConfig::parse("a=1\na=2").is_err());
        assert!(KeyValueConfig::parse("=3").is_err());
    }
}
