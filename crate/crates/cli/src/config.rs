//! Parameter resolution: command-line flag, then `--config` file, then default.
//!
//! Config keys are the long flag names (`tau-max`; `tau_max` is accepted too).
//! A run manifest is itself a valid config file: its `parameters` object is
//! used and its `command` must match.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path, command: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let root: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config {} is not valid JSON: {e}", path.display())))?;
        let Value::Object(mut obj) = root else {
            return Err(CliError::Validation(format!("config {} must be a JSON object", path.display())));
        };
        if let Some(Value::Object(params)) = obj.remove("parameters") {
            match obj.get("command").and_then(Value::as_str) {
                Some(c) if c != command => {
                    return Err(CliError::Validation(format!("manifest was written by `{c}`, not `{command}`")))
                }
                _ => {}
            }
            return Ok(ConfigFile { values: params });
        }
        Ok(ConfigFile { values: obj })
    }

    fn lookup(&self, key: &str) -> Option<(&str, &Value)> {
        let snake = key.replace('-', "_");
        let found = self.values.get_key_value(key).or_else(|| self.values.get_key_value(&snake));
        found.map(|(k, v)| (k.as_str(), v))
    }
}

/// Collects resolved parameters in key order for the manifest.
pub struct Resolver<'a> {
    config: Option<&'a ConfigFile>,
    consumed: BTreeSet<String>,
    params: BTreeMap<String, Value>,
}

impl<'a> Resolver<'a> {
    pub fn new(config: Option<&'a ConfigFile>) -> Self {
        Resolver { config, consumed: BTreeSet::new(), params: BTreeMap::new() }
    }

    fn from_config<T: DeserializeOwned>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        let Some((found, value)) = self.config.and_then(|c| c.lookup(key)) else {
            return Ok(None);
        };
        self.consumed.insert(found.to_string());
        if value.is_null() {
            return Ok(None);
        }
        serde_json::from_value(value.clone())
            .map(Some)
            .map_err(|e| CliError::Validation(format!("config key `{key}`: {e}")))
    }

    fn record<T: Serialize>(&mut self, key: &str, value: &T) {
        self.params.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn take<T>(&mut self, key: &str, flag: Option<T>, default: impl FnOnce() -> T) -> Result<T, CliError>
    where
        T: DeserializeOwned + Serialize,
    {
        let from_file = self.from_config(key)?;
        let value = flag.or(from_file).unwrap_or_else(default);
        self.record(key, &value);
        Ok(value)
    }

    pub fn take_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: DeserializeOwned + Serialize,
    {
        let from_file = self.from_config(key)?;
        let value = flag.or(from_file);
        self.record(key, &value);
        Ok(value)
    }

    /// Resolved parameters; rejects config keys the command does not know.
    pub fn finish(self) -> Result<BTreeMap<String, Value>, CliError> {
        if let Some(cfg) = self.config {
            let unknown: Vec<&str> =
                cfg.values.keys().filter(|k| !self.consumed.contains(*k)).map(String::as_str).collect();
            if !unknown.is_empty() {
                return Err(CliError::Validation(format!("unknown config keys: {}", unknown.join(", "))));
            }
        }
        Ok(self.params)
    }
}

pub fn required<T>(name: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Validation(format!("--{name} is required")))
}

pub fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("--{name} must be positive, got {v}")))
    }
}

pub fn at_least<T: PartialOrd + std::fmt::Display>(name: &str, v: T, min: T) -> Result<T, CliError> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("--{name} must be at least {min}, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn config(v: Value) -> ConfigFile {
        let Value::Object(values) = v else { unreachable!() };
        ConfigFile { values }
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let cfg = config(json!({"n": 5, "tau_max": 0.5}));
        let mut r = Resolver::new(Some(&cfg));
        assert_eq!(r.take("n", Some(7u64), || 1).unwrap(), 7);
        assert_eq!(r.take("tau-max", None, || 9.0).unwrap(), 0.5);
        assert_eq!(r.take("seed", None, || 3u64).unwrap(), 3);
        let params = r.finish().unwrap();
        assert_eq!(params["n"], json!(7));
        assert_eq!(params["tau-max"], json!(0.5));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let cfg = config(json!({"n": 5, "tua-max": 0.5}));
        let mut r = Resolver::new(Some(&cfg));
        r.take("n", None, || 1u64).unwrap();
        assert!(matches!(r.finish(), Err(CliError::Validation(_))));
    }

    #[test]
    fn wrong_type_is_a_validation_error() {
        let cfg = config(json!({"n": "ten"}));
        let mut r = Resolver::new(Some(&cfg));
        assert!(matches!(r.take("n", None, || 1u64), Err(CliError::Validation(_))));
    }

    #[test]
    fn manifest_parameters_are_used() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, r#"{"command":"exact","parameters":{"n":4}}"#).unwrap();
        let cfg = ConfigFile::load(&path, "exact").unwrap();
        assert_eq!(Resolver::new(Some(&cfg)).take("n", None, || 1u64).unwrap(), 4);
        assert!(ConfigFile::load(&path, "pplus").is_err());
    }
}
