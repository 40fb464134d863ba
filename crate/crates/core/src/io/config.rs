//! `key=value` overrides for [`AdaptConfig`]. Nested fields use dotted keys
//! (`dr.max_iterations=8000`, `rotation.initial_step=0.25`).
//!
//! Two keys take shorthand values: `epsilon` accepts `auto` or a number, and
//! `crossval_grid` accepts `auto`, `auto:<count>` or a comma-separated list.

use std::path::Path;

use serde_json::Value;

use crate::adaptation::AdaptConfig;
use crate::error::{Error, Result};

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_overrides(text: &str, origin: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.to_path_buf(),
            line: i as u64 + 1,
            column: 1,
            message: format!("expected key=value, found `{line}`"),
        })?;
        out.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

fn shorthand(key: &str, value: &str) -> Result<Option<Value>> {
    let bad = || Error::Config(format!("cannot interpret `{value}` for `{key}`"));
    match key {
        "epsilon" => {
            if value.eq_ignore_ascii_case("auto") {
                return Ok(Some(Value::from("auto")));
            }
            let v: f64 = value.parse().map_err(|_| bad())?;
            Ok(Some(serde_json::json!({ "fixed": v })))
        }
        "crossval_grid" => {
            if value.eq_ignore_ascii_case("auto") {
                return Ok(Some(serde_json::json!({ "relative_to_data": { "count": crate::crossval::DEFAULT_GRID_SIZE } })));
            }
            if let Some(n) = value.strip_prefix("auto:") {
                let count: usize = n.trim().parse().map_err(|_| bad())?;
                return Ok(Some(serde_json::json!({ "relative_to_data": { "count": count } })));
            }
            let list: Vec<f64> = value
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            Ok(Some(serde_json::json!({ "explicit": list })))
        }
        _ => Ok(None),
    }
}

/// Sets one field. Unknown keys and ill-typed values are errors.
pub fn apply_override(config: &mut AdaptConfig, key: &str, value: &str) -> Result<()> {
    let mut tree = serde_json::to_value(&*config)?;
    let mut slot = &mut tree;
    for part in key.split('.') {
        slot = slot
            .as_object_mut()
            .and_then(|o| o.get_mut(part))
            .ok_or_else(|| Error::Config(format!("unknown config key `{key}`")))?;
    }
    let parsed = match shorthand(key, value)? {
        Some(v) => v,
        None => serde_json::from_str(value).unwrap_or_else(|_| Value::from(value)),
    };
    if slot.is_object() && !parsed.is_object() && !matches!(key, "epsilon" | "crossval_grid") {
        return Err(Error::Config(format!("`{key}` is a section; set its fields with dotted keys")));
    }
    *slot = parsed;
    let updated: AdaptConfig =
        serde_json::from_value(tree).map_err(|e| Error::Config(format!("bad value `{value}` for `{key}`: {e}")))?;
    updated.validate()?;
    *config = updated;
    Ok(())
}

pub fn apply_overrides(config: &mut AdaptConfig, pairs: &[(String, String)]) -> Result<()> {
    for (k, v) in pairs {
        apply_override(config, k, v)?;
    }
    Ok(())
}
