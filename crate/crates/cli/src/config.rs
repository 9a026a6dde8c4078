//! Optional TOML config: one table per subcommand whose keys mirror the
//! long flags (with `_` for `-`). Flags given on the command line win.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub fn load(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Fills every flag left unset (absent option or `false` switch) from the
/// command's config table.
pub fn merge<T: Serialize + DeserializeOwned>(args: T, config: Option<&toml::Table>, section: &str) -> Result<T> {
    let Some(table) = config.and_then(|c| c.get(section)) else {
        return Ok(args);
    };
    let Some(table) = table.as_table() else {
        bail!("config entry [{section}] must be a table");
    };
    let mut merged = serde_json::to_value(&args)?;
    let fields = merged.as_object_mut().expect("command arguments serialize as a struct");
    for (key, value) in table {
        let Some(current) = fields.get_mut(key) else {
            bail!("unknown key `{key}` in config section [{section}]");
        };
        if matches!(current, Value::Null | Value::Bool(false)) {
            *current = serde_json::to_value(value)?;
        }
    }
    serde_json::from_value(merged).with_context(|| format!("invalid value in config section [{section}]"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Args {
        quality: Option<u8>,
        seed: Option<u64>,
        strict: bool,
    }

    #[test]
    fn flags_override_config() {
        let cfg: toml::Table = toml::from_str("[cmd]\nquality = 70\nseed = 3\nstrict = true\n").unwrap();
        let args = Args {
            quality: Some(95),
            seed: None,
            strict: false,
        };
        let merged = merge(args, Some(&cfg), "cmd").unwrap();
        assert_eq!(
            merged,
            Args {
                quality: Some(95),
                seed: Some(3),
                strict: true
            }
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        let cfg: toml::Table = toml::from_str("[cmd]\nqualty = 70\n").unwrap();
        let args = Args {
            quality: None,
            seed: None,
            strict: false,
        };
        assert!(merge(args, Some(&cfg), "cmd").is_err());
    }
}
