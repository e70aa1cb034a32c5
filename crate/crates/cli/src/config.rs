//! Flat `key = value` configuration: embedded defaults, an optional file
//! overlay, then command-line overrides.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

pub const DEFAULTS: &str = include_str!("defaults.conf");

fn parse_text(text: &str, origin: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{origin}:{}: expected `key = value`", i + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

#[derive(Clone, Debug)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(file: Option<&Path>) -> Result<Self, CliError> {
        let values = parse_text(DEFAULTS, "defaults")?;
        let mut cfg = Self { values };
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (k, v) in parse_text(&text, &path.display().to_string())? {
                cfg.set(&k, v)?;
            }
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: String) -> Result<(), CliError> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(CliError::Usage(format!("unknown config key {key:?}"))),
        }
    }

    pub fn set_opt<T: ToString>(&mut self, key: &str, value: &Option<T>) -> Result<(), CliError> {
        match value {
            Some(v) => self.set(key, v.to_string()),
            None => Ok(()),
        }
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("config key {key} has a default"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .parse()
            .map_err(|e| CliError::Usage(format!("config {key} = {:?}: {e}", self.raw(key))))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key);
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|e| CliError::Usage(format!("config {key}: bad entry {t:?}: {e}")))
            })
            .collect()
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_override() {
        let mut c = Config::load(None).unwrap();
        assert_eq!(c.raw("curve"), "bosonic");
        assert_eq!(c.raw("potential"), "");
        assert!(c.list::<f64>("potential").unwrap().is_empty());
        c.set("N", "17".into()).unwrap();
        assert_eq!(c.get::<usize>("N").unwrap(), 17);
        assert!(c.set("no_such_key", "1".into()).is_err());
        assert_eq!(c.list::<f64>("betas").unwrap(), vec![0.5, 1.0, 2.0]);
    }

    #[test]
    fn file_overlay() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.conf");
        std::fs::write(&p, "# comment\nseed = 99   # trailing\n").unwrap();
        let c = Config::load(Some(&p)).unwrap();
        assert_eq!(c.get::<u64>("seed").unwrap(), 99);
        std::fs::write(&p, "bogus = 1\n").unwrap();
        assert!(Config::load(Some(&p)).is_err());
        std::fs::write(&p, "no equals sign\n").unwrap();
        assert!(Config::load(Some(&p)).is_err());
    }
}
