use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Merges command-line options over the command's record in the config file, then parses the
/// result strictly. Unset flags (`None`, `false`, empty lists) never override the file.
pub fn resolve<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Path>) -> Result<T, CliError> {
    let mut base = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::parse(format!("{}: {e}", p.display())))?;
            match serde_json::from_str::<Value>(&text).map_err(|e| CliError::parse(format!("{}: {e}", p.display())))? {
                Value::Object(m) => m,
                _ => return Err(CliError::parse(format!("{}: config must be a JSON object", p.display()))),
            }
        }
        None => Map::new(),
    };
    let Value::Object(cli) = serde_json::to_value(flags).map_err(|e| CliError::parse(e.to_string()))? else {
        unreachable!("argument records serialise to objects")
    };
    for (k, v) in cli {
        let unset = v.is_null() || v == Value::Bool(false) || v.as_array().is_some_and(|a| a.is_empty());
        if !unset {
            base.insert(k, v);
        }
    }
    let ctx = file.map(|p| format!("{}: ", p.display())).unwrap_or_default();
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::parse(format!("{ctx}{e}")))
}

/// Strict JSON from a file, with the path in the error.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;
    use std::io::Write;

    #[derive(Serialize, Deserialize, Debug, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Rec {
        a: Option<f64>,
        #[serde(default)]
        b: Vec<f64>,
    }

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn flags_override_file() {
        let f = file(r#"{"a": 1.0, "b": [2.0]}"#);
        let r = resolve(&Rec { a: Some(3.0), b: vec![] }, Some(f.path())).unwrap();
        assert_eq!(r, Rec { a: Some(3.0), b: vec![2.0] });
        let r = resolve(&Rec { a: None, b: vec![] }, Some(f.path())).unwrap();
        assert_eq!(r, Rec { a: Some(1.0), b: vec![2.0] });
    }

    #[test]
    fn unknown_key_is_named() {
        let f = file(r#"{"a": 1.0, "alpah": 2}"#);
        let e = resolve(&Rec { a: None, b: vec![] }, Some(f.path())).unwrap_err();
        assert!(e.message.contains("alpah"), "{}", e.message);
    }
}
