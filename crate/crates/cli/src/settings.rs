//! key=value configuration files. Keys are long option names without the
//! leading dashes; `_` and `-` are interchangeable.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn canonical(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
            values.insert(canonical(k), v.trim().to_string());
        }
        Ok(Settings { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The config file's value for `key`, if any.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(&canonical(key)) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key {key}: cannot parse {raw:?}"))),
        }
    }

    /// Flag value, else config value, else `default`.
    pub fn pick<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// Flag value, else config value.
    pub fn pick_opt<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let s = Settings::parse("# defaults\nn = 5\nbin_width=0.5\n\n").unwrap();
        assert_eq!(s.pick("n", None, 8u32).unwrap(), 5);
        assert_eq!(s.pick("n", Some(3), 8u32).unwrap(), 3);
        assert_eq!(s.pick("bin-width", None, 0.25).unwrap(), 0.5);
        assert_eq!(s.pick("t", None, 0.3).unwrap(), 0.3);
        assert!(s.pick::<u32>("bin-width", None, 1).is_err());
        assert!(Settings::parse("novalue\n").is_err());
    }
}
