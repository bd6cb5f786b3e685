//! Quantizer spec files.
//!
//! Two JSON shapes are accepted:
//!
//! ```json
//! {"name": "b2", "K": 2, "thresholds": [0.9957], "levels": [0.4979, 1.4936]}
//! {"name": "b2", "uniform": {"K": 2, "step": 0.9957}}
//! ```
//!
//! Errors carry `path:line:column` so they can be jumped to from an editor.

use std::fmt;
use std::path::Path;

use qrate_core::quantizer::make_uniform;
use qrate_core::{Error, QuantizerSpec, SpecError};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub name: Option<String>,
    pub spec: QuantizerSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.path, self.line, self.column, self.message)
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Explicit {
    name: Option<String>,
    #[serde(rename = "K")]
    k: usize,
    thresholds: Vec<f64>,
    levels: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Uniform {
    name: Option<String>,
    uniform: UniformBody,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UniformBody {
    #[serde(rename = "K")]
    k: usize,
    step: f64,
}

/// Position of the first `"key"` in `text`, 1-based.
fn locate(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    for (i, line) in text.lines().enumerate() {
        if let Some(col) = line.find(&needle) {
            return (i + 1, col + 1);
        }
    }
    (1, 1)
}

fn offending_key(e: &SpecError) -> &'static str {
    match e {
        SpecError::ZeroHalfLevels => "K",
        SpecError::LevelCountMismatch { .. } | SpecError::InvalidLevel { .. } => "levels",
        SpecError::ThresholdCountMismatch { .. }
        | SpecError::NonPositiveThreshold { .. }
        | SpecError::NonIncreasingThresholds { .. } => "thresholds",
    }
}

pub fn parse(text: &str, path: &str) -> Result<SpecFile, Diagnostic> {
    let diag = |(line, column): (usize, usize), message: String| Diagnostic {
        path: path.to_string(),
        line,
        column,
        message,
    };
    let json = |e: serde_json::Error| diag((e.line().max(1), e.column().max(1)), e.to_string());

    let value: serde_json::Value = serde_json::from_str(text).map_err(json)?;
    if !value.is_object() {
        return Err(diag((1, 1), "expected a JSON object".into()));
    }
    if value.get("uniform").is_some() {
        let u: Uniform = serde_json::from_str(text).map_err(json)?;
        let spec = make_uniform(u.uniform.k, u.uniform.step).map_err(|e| {
            let key = match &e {
                Error::InvalidSpec(s) => offending_key(s),
                Error::InvalidArgument { name, .. } if *name == "K" => "K",
                _ => "step",
            };
            diag(locate(text, key), e.to_string())
        })?;
        Ok(SpecFile { name: u.name, spec })
    } else {
        let x: Explicit = serde_json::from_str(text).map_err(json)?;
        let spec = QuantizerSpec::new(x.k, x.thresholds, x.levels)
            .map_err(|e| diag(locate(text, offending_key(&e)), format!("invalid quantizer: {e}")))?;
        Ok(SpecFile { name: x.name, spec })
    }
}

pub fn read(path: &Path) -> anyhow::Result<SpecFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("{}: cannot read spec file: {e}", path.display()))?;
    Ok(parse(&text, &path.display().to_string())?)
}
