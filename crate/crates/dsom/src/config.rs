//! `key = value` defaults files.
//!
//! Each key names a long flag of the subcommand (`grid-side = 20`). The
//! entries are spliced in front of the real command-line arguments, so any
//! flag given explicitly wins.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key = value", n + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            bail!("line {}: invalid key {:?}", n + 1, k.trim());
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<(usize, usize, OsString)> {
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return args.get(i + 1).map(|p| (i, 2, p.clone()));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some((i, 1, p.into()));
        }
    }
    None
}

/// Replaces `--config PATH` with the file's entries, placed right after the
/// subcommand name (`args[1]`).
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some((at, width, path)) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path)).with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let entries = parse(&text).with_context(|| format!("in config {}", path.to_string_lossy()))?;
    let mut rest = args;
    rest.drain(at..at + width);
    let split = rest.len().min(2);
    let mut out: Vec<OsString> = rest[..split].to_vec();
    out.extend(entries.into_iter().map(|(k, v)| OsString::from(format!("--{k}={v}"))));
    out.extend_from_slice(&rest[split..]);
    Ok(out)
}
