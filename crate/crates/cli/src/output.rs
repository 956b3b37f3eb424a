//! CSV/JSON writing with a fixed numeric precision.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

/// Significant digits of every real number written.
const DIGITS: usize = 12;

/// Rounds to 12 significant digits, keeping the shortest representation.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", DIGITS - 1, x).parse().unwrap_or(x)
}

pub fn num(x: f64) -> String {
    format!("{}", round_sig(x))
}

/// Rounds every non-integer number in a JSON value.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// The invocation, quoted where needed, for provenance lines.
pub fn command_line() -> String {
    std::env::args()
        .map(|a| {
            if a.is_empty() || a.contains(|c: char| c.is_whitespace() || c == '"' || c == '\'') {
                format!("'{}'", a.replace('\'', r"'\''"))
            } else {
                a
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn provenance() -> String {
    format!(
        "# lexgrowth {}: {}",
        env!("CARGO_PKG_VERSION"),
        command_line()
    )
}

/// CSV document: provenance comment, header, rows.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = provenance();
        text.push('\n');
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn json_string(value: &impl serde::Serialize) -> Result<String, CliError> {
    let mut value = serde_json::to_value(value).map_err(|e| CliError::Data(e.to_string()))?;
    round_json(&mut value);
    let mut text =
        serde_json::to_string_pretty(&value).map_err(|e| CliError::Data(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes to `path`, or standard output when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| CliError::Io(format!("standard output: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(num(4.473), "4.473");
        assert_eq!(num(0.1 + 0.2), "0.3");
        assert_eq!(num(2.9999857095384215), "2.99998570954");
        assert_eq!(num(1e14), "100000000000000");
        assert_eq!(num(0.0), "0");
        let mut v = serde_json::json!({"a": 1.0000000000004, "b": [3, 0.30000000000000004]});
        round_json(&mut v);
        assert_eq!(v.to_string(), r#"{"a":1.0,"b":[3,0.3]}"#);
    }
}
