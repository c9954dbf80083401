//! `--config` files: one `key = value` per line, `#` starts a comment.
//! Entries become `--key value` flags placed before the command-line flags,
//! so anything given on the command line wins.

use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::error::{CliError, Result};
use crate::Cli;

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut entries = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", n + 1)));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

/// Value of `--config` anywhere in `args`, if present.
fn config_path(args: &[OsString]) -> Result<Option<OsString>> {
    let mut iter = args.iter().skip(1);
    while let Some(a) = iter.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return iter
                .next()
                .cloned()
                .map(Some)
                .ok_or_else(|| CliError::Usage("--config needs a file path".into()));
        }
        if let Some(rest) = a.to_str().and_then(|s| s.strip_prefix("--config=")) {
            return Ok(Some(rest.into()));
        }
    }
    Ok(None)
}

/// Leading subcommand tokens, e.g. `["img", "train"]`, with their end index.
fn subcommand_path(args: &[OsString]) -> (Vec<String>, usize) {
    let mut path = Vec::new();
    let mut i = 1;
    let mut cmd = Cli::command();
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            i += 2;
            continue;
        }
        if a.starts_with('-') {
            i += 1;
            continue;
        }
        match cmd.find_subcommand(a.as_ref()) {
            Some(sub) => {
                path.push(a.to_string());
                let sub = sub.clone();
                i += 1;
                if sub.get_subcommands().next().is_none() {
                    break;
                }
                cmd = sub;
            }
            None => break,
        }
    }
    (path, i)
}

fn known_flags(path: &[String]) -> Vec<String> {
    let mut cmd = Cli::command();
    for name in path {
        match cmd.find_subcommand(name) {
            Some(sub) => cmd = sub.clone(),
            None => return Vec::new(),
        }
    }
    cmd.get_arguments()
        .filter(|a| !a.is_positional())
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|l| l != "config" && l != "help" && l != "version")
        .collect()
}

/// Expands `--config FILE` into explicit flags for the selected subcommand.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let entries = parse_config(&text)?;
    let (sub, at) = subcommand_path(&args);
    if sub.is_empty() {
        return Ok(args);
    }
    let known = known_flags(&sub);
    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if !known.contains(&key) {
            return Err(CliError::Usage(format!(
                "unknown config key {key:?} for `{}` (known: {})",
                sub.join(" "),
                known.join(", ")
            )));
        }
        injected.push(format!("--{key}").into());
        injected.push(value.into());
    }
    let mut out = args[..at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}
