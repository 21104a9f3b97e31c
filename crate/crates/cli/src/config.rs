//! Plain-text `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long
//! flag names without dashes (`tau-l` and `tau_l` are equivalent).

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

pub const KEYS: [&str; 14] = [
    "e0", "lambda", "v", "temp", "tau-l", "s", "rel-tol", "delta-t", "axis", "log", "lin", "axis2",
    "log2", "lin2",
];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "line {}: expected key = value, got `{line}`",
                    number + 1
                ))
            })?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "line {}: unknown key `{key}` (known: {})",
                    number + 1,
                    KEYS.join(", ")
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    CliError::Usage(format!("config key `{key}`: `{v}` is not a number"))
                })
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_aliases() {
        let c = Config::parse("# reference\n e0 = -3\ntau_l=0.5\n\nlog = 1e-3:1:5\n").unwrap();
        assert_eq!(c.number("e0").unwrap(), Some(-3.0));
        assert_eq!(c.number("tau-l").unwrap(), Some(0.5));
        assert_eq!(c.get("log"), Some("1e-3:1:5"));
        assert_eq!(c.number("v").unwrap(), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(Config::parse("e0 -3"), Err(CliError::Usage(_))));
        assert!(matches!(
            Config::parse("colour = red"),
            Err(CliError::Usage(_))
        ));
        let c = Config::parse("v = strong").unwrap();
        assert!(matches!(c.number("v"), Err(CliError::Usage(_))));
    }
}
