//! Flat `key = value` experiment configuration.
//!
//! Values are resolved with this precedence (highest first): explicit
//! overrides (`--set key=value` on the command line), environment variables
//! named `SEST_` followed by the key upper-cased with `.` and `-` replaced by
//! `_` (so `train.lr` becomes `SEST_TRAIN_LR`), then the config file.
//! Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

pub const ENV_PREFIX: &str = "SEST_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("missing config key '{0}'")]
    Missing(String),
    #[error("config key '{key}': cannot parse '{value}': {msg}")]
    Invalid { key: String, value: String, msg: String },
    #[error("config line {line}: expected 'key = value'")]
    Syntax { line: usize },
    #[error("reading config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
    env: bool,
}

/// Environment variable consulted for `key`.
pub fn env_var_name(key: &str) -> String {
    let mut name = String::from(ENV_PREFIX);
    name.extend(key.chars().map(|c| match c {
        '.' | '-' => '_',
        c => c.to_ascii_uppercase(),
    }));
    name
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Config { values, env: false })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Config::parse(&text)
    }

    /// Enables environment-variable overrides.
    pub fn with_env(mut self) -> Config {
        self.env = true;
        self
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair.split_once('=').ok_or(ConfigError::Syntax { line: 0 })?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.values.insert(key.to_string(), value.to_string());
    }

    /// Raw value after environment overrides.
    pub fn raw(&self, key: &str) -> Option<String> {
        if self.env {
            if let Ok(v) = std::env::var(env_var_name(key)) {
                return Some(v);
            }
        }
        self.values.get(key).cloned()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: Display,
    {
        let value = self.raw(key).ok_or_else(|| ConfigError::Missing(key.to_string()))?;
        value.parse().map_err(|e: T::Err| ConfigError::Invalid {
            key: key.to_string(),
            value,
            msg: e.to_string(),
        })
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(_) => self.get(key),
        }
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: Display,
    {
        let value = self.raw(key).ok_or_else(|| ConfigError::Missing(key.to_string()))?;
        value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|e: T::Err| ConfigError::Invalid {
                    key: key.to_string(),
                    value: value.clone(),
                    msg: e.to_string(),
                })
            })
            .collect()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// Sorted `key = value` lines with overrides applied, suitable for
    /// rerunning the experiment.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for key in self.values.keys() {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&self.raw(key).unwrap_or_default());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let mut c = Config::parse("# comment\ngame = hex5\ntrain.lr=0.01\n\nseed = 3\n").unwrap();
        assert_eq!(c.get::<String>("game").unwrap(), "hex5");
        assert_eq!(c.get::<f64>("train.lr").unwrap(), 0.01);
        c.set_pair("seed=9").unwrap();
        assert_eq!(c.get::<u64>("seed").unwrap(), 9);
        assert_eq!(c.get_or("missing", 4usize).unwrap(), 4);
        let err = c.get::<u64>("train.steps").unwrap_err();
        assert!(err.to_string().contains("train.steps"));
        assert!(matches!(c.get::<u64>("game"), Err(ConfigError::Invalid { .. })));
        assert!(Config::parse("novalue\n").is_err());
        assert_eq!(c.snapshot(), "game = hex5\nseed = 9\ntrain.lr = 0.01\n");
    }

    #[test]
    fn lists_and_env_names() {
        let c = Config::parse("ns = 1, 2,5\n").unwrap();
        assert_eq!(c.get_list::<usize>("ns").unwrap(), vec![1, 2, 5]);
        assert_eq!(env_var_name("train.lr"), "SEST_TRAIN_LR");
        assert_eq!(env_var_name("opening-plies"), "SEST_OPENING_PLIES");
    }
}
