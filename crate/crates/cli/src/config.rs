//! Flat key-value config files mirroring the flag names, e.g.
//!
//! ```text
//! # defaults for the sc sweeps
//! state = sc
//! setup = 1
//! phi = pi
//! preset = sc-pi
//! ```
//!
//! Explicit command-line flags always win over config values.

use anyhow::{bail, Context, Result};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (number, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected `key = value`, got `{line}`",
                    path.display(),
                    number + 1
                );
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { values })
    }

    /// Flag value if given, else the config entry under the flag's name.
    pub fn merge<'a>(&'a self, flag: Option<&'a str>, key: &str) -> Option<&'a str> {
        flag.or_else(|| self.values.get(key).map(String::as_str))
    }

    pub fn merge_parsed<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(raw) => match raw.parse() {
                Ok(value) => Ok(Some(value)),
                Err(e) => bail!("config key `{key}`: {e}"),
            },
            None => Ok(None),
        }
    }
}
