//! `key=value` configuration files merged under command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Parameters read from a config file; every key must be consumed.
#[derive(Debug, Default, Clone)]
pub struct Params {
    entries: BTreeMap<String, String>,
    source: String,
}

impl Params {
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{source}:{}: expected key=value, got {line:?}", n + 1)))?;
            let key = k.trim().replace('_', "-");
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("{source}:{}: duplicate key {key}", n + 1)));
            }
        }
        Ok(Params { entries, source: source.to_string() })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Params::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Params::parse(&text, &p.display().to_string())
            }
        }
    }

    /// The flag value if given, else the config value, else `default`.
    pub fn pick<T>(&mut self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let stored = self.entries.remove(key);
        if let Some(v) = flag {
            return Ok(v);
        }
        match stored {
            None => Ok(default),
            Some(s) => s.parse().map_err(|e| CliError::Usage(format!("{}: {key}={s}: {e}", self.source))),
        }
    }

    /// Like [`Params::pick`] without a default.
    pub fn pick_opt<T>(&mut self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let stored = self.entries.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        stored.map(|s| s.parse().map_err(|e| CliError::Usage(format!("{}: {key}={s}: {e}", self.source)))).transpose()
    }

    /// Like [`Params::pick`] for comma-separated lists.
    pub fn pick_list<T>(&mut self, flag: Option<Vec<T>>, key: &str, default: Vec<T>) -> Result<Vec<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let stored = self.entries.remove(key);
        if let Some(v) = flag {
            return Ok(v);
        }
        match stored {
            None => Ok(default),
            Some(s) => s
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| p.trim().parse().map_err(|e| CliError::Usage(format!("{}: {key}={s}: {e}", self.source))))
                .collect(),
        }
    }

    /// Reject keys no flag consumed.
    pub fn finish(self) -> Result<(), CliError> {
        match self.entries.keys().next() {
            None => Ok(()),
            Some(k) => Err(CliError::Usage(format!("{}: unknown key {k}", self.source))),
        }
    }
}

/// Range check on a physical parameter.
pub fn check(ok: bool, flag: &str, value: impl Display, expected: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{flag} {value}: expected {expected}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let mut p = Params::parse("t_final = 50\nlevels=0.1, 0.9 # comment\n", "cfg").unwrap();
        assert_eq!(p.pick(Some(10.0), "t-final", 1.0).unwrap(), 10.0);
        assert_eq!(p.pick_list::<f64>(None, "levels", vec![]).unwrap(), vec![0.1, 0.9]);
        p.finish().unwrap();
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let p = Params::parse("bogus=1\n", "cfg").unwrap();
        assert!(matches!(p.finish(), Err(CliError::Usage(m)) if m.contains("bogus")));
        assert!(Params::parse("no equals sign\n", "cfg").is_err());
        let mut p = Params::parse("h=abc\n", "cfg").unwrap();
        assert!(p.pick::<f64>(None, "h", 0.02).is_err());
    }
}
