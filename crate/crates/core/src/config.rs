//! Experiment configuration files (TOML) with `key=value` overrides.
//!
//! Every configuration struct rejects unknown keys. Overrides address nested
//! tables with dotted paths (`grid.points=5`); the value is read as a TOML
//! literal and falls back to a plain string.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

fn parse_literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `key=value` overrides in order.
pub fn apply_overrides(root: &mut toml::Value, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {item:?} is not of the form key=value")))?;
        let path: Vec<&str> = key.trim().split('.').collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(Error::Config(format!("override key {key:?} is malformed")));
        }
        let mut node = &mut *root;
        for part in &path[..path.len() - 1] {
            let table = node
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("override {key:?}: {part:?} is not inside a table")))?;
            node = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
        let table =
            node.as_table_mut().ok_or_else(|| Error::Config(format!("override {key:?} does not address a table")))?;
        table.insert(path[path.len() - 1].to_string(), parse_literal(raw.trim()));
    }
    Ok(())
}

/// Parses a configuration from TOML text after applying overrides.
pub fn from_toml_str<T: DeserializeOwned>(text: &str, overrides: &[String]) -> Result<T> {
    let mut root: toml::Value =
        toml::from_str::<toml::Table>(text).map(toml::Value::Table).map_err(|e| Error::Config(e.to_string()))?;
    apply_overrides(&mut root, overrides)?;
    root.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

/// Reads and parses a configuration file.
pub fn load_config<T: DeserializeOwned>(path: &Path, overrides: &[String]) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    from_toml_str(&text, overrides)
}

/// Serde adapter for types with `Display` and `FromStr` (body and test
/// function specifications such as `ellipsoid:2,1,1` or `bump:1,0;0.5`).
pub mod display_fromstr {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Inner {
        points: usize,
    }

    #[derive(Debug, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Demo {
        seed: u64,
        name: String,
        grid: Inner,
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let text = "seed = 1\nname = \"a\"\n[grid]\npoints = 3\n";
        let cfg: Demo = from_toml_str(text, &["grid.points=7".into(), "name=disk".into()]).unwrap();
        assert_eq!(cfg, Demo { seed: 1, name: "disk".into(), grid: Inner { points: 7 } });
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let err = from_toml_str::<Demo>("seed = 1\nname = \"a\"\nextra = 2\n[grid]\npoints = 3\n", &[]).unwrap_err();
        assert!(err.is_config());
        let err = from_toml_str::<Demo>("seed = 1\nname = \"a\"\n[grid]\npoints = 3\n", &["nokey".into()]).unwrap_err();
        assert!(err.is_config());
    }
}
