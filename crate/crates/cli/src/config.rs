//! Resolved run parameters: flags layered over an optional `key = value`
//! config file, plus parsers for the list and range syntaxes.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Parameters of one invocation. Keys are the long flag names without the
/// leading dashes.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// `flags` lists every key the command understands together with the
    /// value given on the command line, if any. Config-file keys must be
    /// among them.
    pub fn resolve(
        flags: Vec<(&'static str, Option<String>)>,
        file: Option<&Path>,
    ) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("cannot read config file {}: {e}", path.display()))
            })?;
            for (n, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::usage(format!(
                        "{}:{}: expected key = value",
                        path.display(),
                        n + 1
                    ))
                })?;
                let key = key.trim();
                if !flags.iter().any(|(k, _)| *k == key) {
                    return Err(CliError::usage(format!(
                        "{}:{}: unknown key '{key}' for this command",
                        path.display(),
                        n + 1
                    )));
                }
                if values
                    .insert(key.to_string(), value.trim().to_string())
                    .is_some()
                {
                    return Err(CliError::usage(format!(
                        "{}: key '{key}' given twice",
                        path.display()
                    )));
                }
            }
        }
        for (key, value) in flags {
            if let Some(v) = value {
                values.insert(key.to_string(), v);
            }
        }
        Ok(Settings { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    pub fn parse<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::usage(format!("--{key} '{v}': {e}")))
            })
            .transpose()
    }

    pub fn parse_or<T>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.get(key) {
            None => Ok(false),
            Some(v) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(CliError::usage(format!(
                    "--{key}: expected a boolean, got '{v}'"
                ))),
            },
        }
    }

    /// The values that were actually set, for the manifest.
    pub fn explicit(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

/// Ring sizes: comma-separated items, each `n`, `a..b` or `a..=b`
/// (both forms inclusive). Returned sorted and deduplicated.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = |item: &str| CliError::usage(format!("invalid ring size or range '{item}'"));
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let a: usize = a.trim().parse().map_err(|_| bad(item))?;
            let b: usize = b.trim().parse().map_err(|_| bad(item))?;
            if a > b {
                return Err(bad(item));
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("empty list of ring sizes"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Comma-separated real numbers.
pub fn parse_reals(key: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let out: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::usage(format!("--{key}: '{s}' is not a finite number")))
        })
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(CliError::usage(format!("--{key}: empty list")));
    }
    Ok(out)
}

/// Time selection, in µs.
#[derive(Debug, Clone, PartialEq)]
pub enum Times {
    /// `[0, 1.3 t_F]` in steps of `0.02 / J`.
    Window,
    /// The surge time of each ring.
    Surge,
    Explicit(Vec<f64>),
}

impl FromStr for Times {
    type Err = String;

    /// `window`, `surge`, `start:stop:step` or a comma-separated list.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match s {
            "window" => return Ok(Times::Window),
            "surge" => return Ok(Times::Surge),
            _ => {}
        }
        let times = if let [a, b, step] = s.split(':').collect::<Vec<_>>()[..] {
            let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0 && b >= a) {
                return Err("range needs start <= stop and a positive step".into());
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| a + i as f64 * step).collect()
        } else {
            s.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
                .collect::<Result<Vec<_>, _>>()?
        };
        if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err("times must be finite and non-negative".into());
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err("times must be strictly increasing".into());
        }
        Ok(Times::Explicit(times))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_syntax() {
        assert_eq!(parse_sizes("6..9").unwrap(), vec![6, 7, 8, 9]);
        assert_eq!(parse_sizes("4, 8..=9,4").unwrap(), vec![4, 8, 9]);
        assert!(parse_sizes("9..6").is_err());
        assert!(parse_sizes("x").is_err());
    }

    #[test]
    fn time_syntax() {
        assert_eq!("surge".parse::<Times>().unwrap(), Times::Surge);
        assert_eq!(
            "0:1:0.25".parse::<Times>().unwrap(),
            Times::Explicit(vec![0.0, 0.25, 0.5, 0.75, 1.0])
        );
        assert_eq!(
            "0.5,1.5".parse::<Times>().unwrap(),
            Times::Explicit(vec![0.5, 1.5])
        );
        assert!("1,0.5".parse::<Times>().is_err());
        assert!("-1".parse::<Times>().is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "# comment\nL = 6..8\ng=0.5\n").unwrap();
        let s = Settings::resolve(vec![("L", None), ("g", Some("1".into()))], Some(&path)).unwrap();
        assert_eq!(s.get("L"), Some("6..8"));
        assert_eq!(s.get("g"), Some("1"));
        fs::write(&path, "shots = 10\n").unwrap();
        assert!(Settings::resolve(vec![("L", None)], Some(&path)).is_err());
    }
}
