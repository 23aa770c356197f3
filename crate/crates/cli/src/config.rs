//! Flat key = value configuration files.
//!
//! One `key = value` pair per line, `#` starts a comment, blank lines are
//! skipped. `meta.*` keys are ignored so a run manifest can be fed straight
//! back as a config file. The `axis` key may repeat (sweep specifications);
//! every other key must be unique.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    axes: Vec<String>,
}

impl Config {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        let mut axes = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(format!("line {}: empty key or value", lineno + 1));
            }
            if key.starts_with("meta.") {
                continue;
            }
            if key == "axis" {
                axes.push(value.to_string());
                continue;
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(format!("line {}: duplicate key `{key}`", lineno + 1));
            }
        }
        Ok(Self { values, axes })
    }

    pub fn axes(&self) -> &[String] {
        &self.axes
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if present, else config value parsed as `T`.
    pub fn resolve<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}` = `{s}`: {e}"))),
        }
    }

    /// Like [`Config::resolve`] but the key must end up with a value.
    pub fn require<T>(&self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.resolve(key, flag)?.ok_or_else(|| {
            CliError::Usage(format!(
                "missing required parameter `--{key}` (or config key `{key}`)"
            ))
        })
    }

    /// Reject keys this command does not understand.
    pub fn check_keys(&self, allowed: &[&str], allow_axes: bool) -> Result<(), CliError> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "unknown config key `{key}` (allowed: {})",
                    allowed.join(", ")
                )));
            }
        }
        if !allow_axes && !self.axes.is_empty() {
            return Err(CliError::Usage(
                "`axis` keys are only valid in sweep specifications".into(),
            ));
        }
        Ok(())
    }
}
