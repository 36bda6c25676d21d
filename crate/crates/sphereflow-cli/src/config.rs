//! Structured-text configuration documents (JSON, or TOML by file extension).

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::CliError;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, path.extension().and_then(|e| e.to_str()) == Some("toml"))
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn parse<T: DeserializeOwned>(text: &str, toml_syntax: bool) -> Result<T, String> {
    if toml_syntax {
        toml::from_str(text).map_err(|e| e.to_string())
    } else {
        let de = &mut serde_json::Deserializer::from_str(text);
        T::deserialize(de).map_err(|e| e.to_string())
    }
}
