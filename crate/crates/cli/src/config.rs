//! Shared config file: defaults for flags that apply across subcommands.
//! Flags always win over the file. Unknown keys are rejected.

use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub layout: Option<String>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let src = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&src).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "seed = 7\nlayout = \"qwerty\"\n").unwrap();
        let config = FileConfig::load(&path).unwrap();
        assert_eq!(config.seed, Some(7));
        assert_eq!(config.layout.as_deref(), Some("qwerty"));

        std::fs::write(&path, "seed = 7\nmystery = true\n").unwrap();
        assert!(FileConfig::load(&path).is_err());
    }
}
