//! Budgets and limits shared by every module, with environment overrides.
//!
//! | variable              | field             |
//! |-----------------------|-------------------|
//! | `DEHN_MAX_DEPTH`      | `max_level_depth` |
//! | `DEHN_WORD_BUDGET`    | `word_budget`     |
//! | `DEHN_CELL_BUDGET`    | `cell_budget`     |
//! | `DEHN_BIT_BUDGET`     | `bit_budget`      |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Invalid configuration values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{name} must be a positive integer, got {value:?}")]
    BadValue { name: &'static str, value: String },
    #[error("unknown output format {0:?}")]
    BadFormat(String),
}

/// Output formats understood by the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
    Dot,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "dot" => Ok(OutputFormat::Dot),
            "svg" => Ok(OutputFormat::Svg),
            _ => Err(ConfigError::BadFormat(s.to_string())),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OutputFormat::Text => "text",
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Dot => "dot",
            OutputFormat::Svg => "svg",
        };
        f.write_str(s)
    }
}

/// Limits applied by constructors and the command-line front end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    /// Largest `n` accepted for `G_n`, `H_n`.
    pub max_level_depth: u32,
    /// Largest word (in letters) that may be materialised.
    pub word_budget: u64,
    /// Largest number of 2-cells an explicit complex may have.
    pub cell_budget: u64,
    /// Largest bit length of an exact integer (lengths, areas, volumes).
    pub bit_budget: u64,
    /// Largest `r` for explicit sphere realisation, keyed by level name (`G0`, `H1`).
    pub explicit_caps: BTreeMap<String, u32>,
    pub output_format: OutputFormat,
}

impl Default for Config {
    fn default() -> Self {
        let mut explicit_caps = BTreeMap::new();
        explicit_caps.insert("G0".to_string(), 2);
        explicit_caps.insert("H1".to_string(), 2);
        Config {
            max_level_depth: 4,
            word_budget: 10_000_000,
            cell_budget: 2_000_000,
            bit_budget: 1 << 23,
            explicit_caps,
            output_format: OutputFormat::Text,
        }
    }
}

fn parse_positive(name: &'static str, value: &str) -> Result<u64, ConfigError> {
    match value.trim().parse::<u64>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(ConfigError::BadValue { name, value: value.to_string() }),
    }
}

impl Config {
    /// Defaults with environment overrides applied.
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::default().with_overrides(|k| std::env::var(k).ok())
    }

    /// Applies overrides from an arbitrary lookup (environment, test map, …).
    pub fn with_overrides<F: Fn(&str) -> Option<String>>(mut self, lookup: F) -> Result<Self, ConfigError> {
        if let Some(v) = lookup("DEHN_MAX_DEPTH") {
            let d = parse_positive("DEHN_MAX_DEPTH", &v)?;
            self.max_level_depth = u32::try_from(d)
                .map_err(|_| ConfigError::BadValue { name: "DEHN_MAX_DEPTH", value: v.clone() })?;
        }
        if let Some(v) = lookup("DEHN_WORD_BUDGET") {
            self.word_budget = parse_positive("DEHN_WORD_BUDGET", &v)?;
        }
        if let Some(v) = lookup("DEHN_CELL_BUDGET") {
            self.cell_budget = parse_positive("DEHN_CELL_BUDGET", &v)?;
        }
        if let Some(v) = lookup("DEHN_BIT_BUDGET") {
            self.bit_budget = parse_positive("DEHN_BIT_BUDGET", &v)?;
        }
        Ok(self)
    }

    /// Largest `r` allowed for explicit realisation at `level` (e.g. `"H1"`).
    pub fn explicit_cap(&self, level: &str) -> Option<u32> {
        self.explicit_caps.get(level).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = Config::default();
        assert_eq!(c.max_level_depth, 4);
        assert_eq!(c.word_budget, 10_000_000);
        assert_eq!(c.explicit_cap("H1"), Some(2));
        assert_eq!(c.explicit_cap("G3"), None);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let c = Config::default()
            .with_overrides(|k| (k == "DEHN_WORD_BUDGET").then(|| "42".to_string()))
            .unwrap();
        assert_eq!(c.word_budget, 42);
        let bad = Config::default().with_overrides(|k| (k == "DEHN_BIT_BUDGET").then(|| "0".to_string()));
        assert!(matches!(bad, Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn output_format_parse() {
        assert_eq!("JSON".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
        assert!("xml".parse::<OutputFormat>().is_err());
    }
}
