//! Flat `key = value` configuration files merged under explicit flags.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::CommandFactory;

use crate::cli::Cli;
use crate::CliError;

/// Parses `key = value` lines; `#` starts a comment. Keys are flag names
/// without the leading dashes, with `_` accepted for `-`.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "line {}: expected key = value, got '{line}'",
                i + 1
            ));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(format!("line {}: empty key or value", i + 1));
        }
        out.push((key, value.to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Result<Option<OsString>, CliError> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it
                .next()
                .cloned()
                .map(Some)
                .ok_or_else(|| CliError::Usage("--config needs a path".into()));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some(p.into()));
        }
    }
    Ok(None)
}

/// Flag names that take values for the subcommand, plus global ones.
fn flags_for(subcommand: &str) -> (HashSet<String>, HashSet<String>) {
    let cmd = Cli::command();
    let long = |a: &clap::Arg| a.get_long().map(str::to_string);
    let globals: HashSet<String> = cmd.get_arguments().filter_map(long).collect();
    let own = cmd
        .get_subcommands()
        .find(|s| s.get_name() == subcommand)
        .map(|s| s.get_arguments().filter_map(long).collect())
        .unwrap_or_default();
    (own, globals)
}

fn all_flags() -> HashSet<String> {
    let cmd = Cli::command();
    let mut all: HashSet<String> = cmd
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    for s in cmd.get_subcommands() {
        all.extend(
            s.get_arguments()
                .filter_map(|a| a.get_long().map(str::to_string)),
        );
    }
    all
}

/// Appends `--key value` for every configured key that the command line
/// does not already set. Keys valid for some other subcommand are skipped;
/// keys valid for none are a usage error.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("reading config {}: {e}", path.display())))?;
    let entries = parse_config(&text)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;

    let names: Vec<String> = Cli::command()
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .collect();
    let subcommand = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .find(|a| names.contains(a));
    let (own, globals) = flags_for(subcommand.as_deref().unwrap_or(""));
    let known = all_flags();
    let explicit: HashSet<String> = args
        .iter()
        .filter_map(|a| {
            a.to_str()?
                .strip_prefix("--")
                .map(|s| s.split('=').next().unwrap_or(s).to_string())
        })
        .collect();

    let mut merged = args;
    for (key, value) in entries {
        if key == "config" {
            return Err(CliError::Usage(
                "config files cannot name another config file".into(),
            ));
        }
        if !known.contains(&key) {
            return Err(CliError::Usage(format!(
                "config {}: unknown key '{key}'",
                path.display()
            )));
        }
        if explicit.contains(&key) || !(own.contains(&key) || globals.contains(&key)) {
            continue;
        }
        merged.push(format!("--{key}").into());
        merged.push(value.into());
    }
    Ok(merged)
}
