//! Flat JSON config files. Each subcommand reads the same keys as its flags
//! (snake_case) plus a `version` tag; flags win over file values, which win
//! over built-in defaults.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::failure::{CliResult, Context, Failure};

pub const CONFIG_VERSION: u64 = 1;

/// Reads `path`, checks the version tag and deserializes the remaining keys.
/// Unknown keys are rejected by the target type.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).context(format!("reading {}", path.display()))?;
    parse(&text).context(format!("config {}", path.display()))
}

pub fn parse<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let mut map: Map<String, Value> = serde_json::from_str(text)?;
    match map.remove("version") {
        Some(Value::Number(n)) if n.as_u64() == Some(CONFIG_VERSION) => {}
        Some(other) => {
            return Err(Failure::usage(format!(
                "unsupported config version {other}; this binary reads version {CONFIG_VERSION}"
            )))
        }
        None => return Err(Failure::usage("config lacks a `version` field")),
    }
    Ok(serde_json::from_value(Value::Object(map))?)
}

/// Fills every `None` field of `$args` from `$file`.
macro_rules! overlay {
    ($args:expr, $file:expr; $($field:ident),+ $(,)?) => {{
        let file = $file;
        $( if $args.$field.is_none() { $args.$field = file.$field; } )+
    }};
}
pub(crate) use overlay;

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields, default)]
    struct Probe {
        n: Option<usize>,
        name: Option<String>,
    }

    #[test]
    fn reads_known_keys() {
        let p: Probe = parse(r#"{"version": 1, "n": 3}"#).unwrap();
        assert_eq!(
            p,
            Probe {
                n: Some(3),
                name: None
            }
        );
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        assert!(parse::<Probe>(r#"{"version": 1, "m": 3}"#).is_err());
        assert!(parse::<Probe>(r#"{"version": 2}"#).is_err());
        assert!(parse::<Probe>(r#"{"n": 2}"#).is_err());
    }

    #[test]
    fn flags_win() {
        let mut args = Probe {
            n: Some(5),
            name: None,
        };
        overlay!(args, Probe { n: Some(1), name: Some("x".into()) }; n, name);
        assert_eq!(
            args,
            Probe {
                n: Some(5),
                name: Some("x".into())
            }
        );
    }
}
