//! Simple `key=value` config files. Any long flag can be supplied by key;
//! command-line flags always win over config values.

use anyhow::{anyhow, Context, Result};
use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut values = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {} is not key=value: {line:?}", idx + 1))?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("config key {key}={raw:?}: {e}")),
        }
    }

}

/// Command-line value if present, else config value, else the default.
pub fn resolve<T: FromStr + Clone>(
    cli: Option<T>,
    config: &FileConfig,
    key: &str,
    default: T,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    Ok(cli.or(config.get(key)?).unwrap_or(default))
}

/// Like [`resolve`] but with no default.
pub fn resolve_opt<T: FromStr + Clone>(
    cli: Option<T>,
    config: &FileConfig,
    key: &str,
) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    Ok(cli.or(config.get(key)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_and_merges() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# comment\nseed=42\ncoverage=0.9\n\nnetwork=B").unwrap();
        let cfg = FileConfig::load(file.path()).unwrap();
        assert_eq!(cfg.get::<u64>("seed").unwrap(), Some(42));
        // CLI wins.
        assert_eq!(resolve(Some(7u64), &cfg, "seed", 0).unwrap(), 7);
        // Config fills in.
        assert_eq!(resolve(None, &cfg, "seed", 0).unwrap(), 42);
        // Default as last resort.
        assert_eq!(resolve(None::<u64>, &cfg, "trials", 10).unwrap(), 10);
        assert_eq!(cfg.get::<String>("network").unwrap().as_deref(), Some("B"));
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "not a pair").unwrap();
        assert!(FileConfig::load(file.path()).is_err());

        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "seed=banana").unwrap();
        let cfg = FileConfig::load(file.path()).unwrap();
        assert!(cfg.get::<u64>("seed").is_err());
    }
}
