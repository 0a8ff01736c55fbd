use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// `key = value` settings from an optional config file. Blank lines and
/// lines starting with `#` are ignored.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                Self::parse(&text, allowed)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))
            }
        }
    }

    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            let k = k.trim();
            if !allowed.contains(&k) {
                return Err(format!("line {}: unknown key `{k}`", i + 1));
            }
            if values.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key `{k}`", i + 1));
            }
        }
        Ok(Self { values })
    }

    /// Flag value if given, else the config value, else `default`.
    pub fn resolve<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(match (flag, self.values.get(key)) {
            (Some(v), _) => v,
            (None, Some(s)) => s
                .parse()
                .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))?,
            (None, None) => default,
        })
    }

    pub fn resolve_opt<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self
                .values
                .get(key)
                .map(|s| {
                    s.parse()
                        .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))
                })
                .transpose(),
        }
    }
}

/// Comma-separated list of signed arrival angles in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaList(pub Vec<f64>);

impl FromStr for DoaList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self(Vec::new()));
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad angle `{t}`: {e}"))
            })
            .collect::<Result<_, _>>()
            .map(Self)
    }
}

impl Display for DoaList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let c = ConfigFile::parse("# comment\nmu = 0.5\n\nlen=8\n", &["mu", "len"]).unwrap();
        assert_eq!(c.resolve("mu", None, 1.0).unwrap(), 0.5);
        assert_eq!(c.resolve("mu", Some(2.0), 1.0).unwrap(), 2.0);
        assert_eq!(c.resolve("step", None, 3usize).unwrap(), 3);
        assert_eq!(c.resolve("len", None, 16usize).unwrap(), 8);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ConfigFile::parse("bogus=1", &["mu"]).is_err());
        assert!(ConfigFile::parse("mu", &["mu"]).is_err());
        assert!(ConfigFile::parse("mu=1\nmu=2", &["mu"]).is_err());
        let c = ConfigFile::parse("mu=abc", &["mu"]).unwrap();
        assert!(matches!(
            c.resolve("mu", None, 1.0),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn doa_list() {
        assert_eq!(
            "30,-20".parse::<DoaList>().unwrap(),
            DoaList(vec![30.0, -20.0])
        );
        assert_eq!("".parse::<DoaList>().unwrap(), DoaList(vec![]));
        assert!("30,x".parse::<DoaList>().is_err());
        assert_eq!(DoaList(vec![30.0, -20.5]).to_string(), "30,-20.5");
    }
}
