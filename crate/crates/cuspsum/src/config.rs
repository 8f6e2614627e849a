//! Flat JSON config files whose keys mirror the long flag names.
//! Precedence: command-line flag, then config file, then built-in default.

use std::path::Path;

use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    map: Map<String, Value>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text, allowed).map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))
    }

    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self, String> {
        let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let Value::Object(map) = value else {
            return Err("expected a flat JSON object".into());
        };
        if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(format!("unknown key \"{key}\""));
        }
        Ok(FileConfig { map })
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.map
            .get(key)
            .map(|v| v.as_f64().ok_or_else(|| bad_type(key, "a number")))
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.map
            .get(key)
            .map(|v| v.as_u64().ok_or_else(|| bad_type(key, "a non-negative integer")))
            .transpose()
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.map
            .get(key)
            .map(|v| v.as_bool().ok_or_else(|| bad_type(key, "true or false")))
            .transpose()
    }

    pub fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        self.map
            .get(key)
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| bad_type(key, "a string")))
            .transpose()
    }

    /// An integer or an array of integers.
    pub fn u64_list(&self, key: &str) -> Result<Option<Vec<u64>>, CliError> {
        let Some(v) = self.map.get(key) else {
            return Ok(None);
        };
        let err = || bad_type(key, "an integer or an array of integers");
        match v {
            Value::Array(items) => items.iter().map(|i| i.as_u64().ok_or_else(err)).collect::<Result<_, _>>().map(Some),
            other => other.as_u64().map(|k| Some(vec![k])).ok_or_else(err),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(v) = self.map.get(key) else {
            return Ok(None);
        };
        let err = || bad_type(key, "a number or an array of numbers");
        match v {
            Value::Array(items) => items.iter().map(|i| i.as_f64().ok_or_else(err)).collect::<Result<_, _>>().map(Some),
            other => other.as_f64().map(|x| Some(vec![x])).ok_or_else(err),
        }
    }
}

fn bad_type(key: &str, what: &str) -> CliError {
    CliError::Usage(format!("config key \"{key}\" must be {what}"))
}

/// Flag, else file value, else `None`.
pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn require<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_objects() {
        let c = FileConfig::parse(r#"{"M": 1e4, "k": [1, 2], "h": 1, "format": "json"}"#, &["M", "k", "h", "format"]).unwrap();
        assert_eq!(c.f64("M").unwrap(), Some(1e4));
        assert_eq!(c.u64_list("k").unwrap(), Some(vec![1, 2]));
        assert_eq!(c.u64_list("h").unwrap(), Some(vec![1]));
        assert_eq!(c.string("format").unwrap().as_deref(), Some("json"));
        assert_eq!(c.f64("eps").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_keys_and_types() {
        assert!(FileConfig::parse(r#"{"bogus": 1}"#, &["M"]).is_err());
        assert!(FileConfig::parse("[1]", &["M"]).is_err());
        let c = FileConfig::parse(r#"{"M": "big"}"#, &["M"]).unwrap();
        assert!(matches!(c.f64("M"), Err(CliError::Usage(_))));
    }

    #[test]
    fn flags_win() {
        assert_eq!(pick(Some(2), Some(3)), Some(2));
        assert_eq!(pick(None, Some(3)), Some(3));
        assert_eq!(pick::<u8>(None, None), None);
    }
}
