use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use tempfile::NamedTempFile;

use crate::error::{CliError, Result};

pub const OUT_ENV: &str = "DARKWATCH_OUT";
const FALLBACK_ROOT: &str = "darkwatch-out";

/// `--out` if given, else `$DARKWATCH_OUT/<command>`, else `darkwatch-out/<command>`.
pub fn resolve_out(out: Option<PathBuf>, command: &str) -> PathBuf {
    if let Some(out) = out {
        return out;
    }
    let root = std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(FALLBACK_ROOT));
    root.join(command.replace(' ', "-"))
}

/// Writes through a temp file in the same directory, then renames it over `dir/name`.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let target = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents)
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::io(&target, e))?;
    tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
    Ok(target)
}

/// Accumulates the one-line JSON run summary.
#[derive(Debug, Default)]
pub struct Summary {
    fields: Map<String, Value>,
    outputs: Vec<String>,
}

impl Summary {
    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.insert(key.to_string(), value.into());
    }

    pub fn write(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
        let path = write_atomic(dir, name, contents)?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn finish(mut self, command: &str, result: &Result<()>) -> (String, i32) {
        let code = match result {
            Ok(()) => 0,
            Err(e) => e.exit_code(),
        };
        self.fields.insert("command".into(), command.into());
        self.fields.insert("exit_code".into(), code.into());
        self.fields
            .insert("status".into(), if code == 0 { "ok" } else { "error" }.into());
        if let Err(e) = result {
            self.fields.insert("error".into(), e.to_string().into());
        }
        if !self.outputs.is_empty() {
            self.fields.insert("outputs".into(), self.outputs.into());
        }
        (Value::Object(self.fields).to_string(), code)
    }
}

pub fn pretty(value: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s.into_bytes()
}
