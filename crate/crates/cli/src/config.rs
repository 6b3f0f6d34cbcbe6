//! Flat `key = value` option files.
//!
//! Entries become `--key value` flags inserted right after the subcommand
//! words, so anything given on the command line overrides them.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key = value", path.display(), n + 1);
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            bail!("{}:{}: invalid key {key:?}", path.display(), n + 1);
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn to_flags(entries: &[(String, String)]) -> Vec<OsString> {
    let mut flags = Vec::new();
    for (key, value) in entries {
        match value.as_str() {
            "true" => flags.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                flags.push(format!("--{key}").into());
                flags.push(value.into());
            }
        }
    }
    flags
}

/// Rebuilds argv with config flags placed after the last subcommand word.
pub fn merge_args(args: &[OsString], subcommands: &[&str], entries: &[(String, String)]) -> Vec<OsString> {
    let mut cut = 1;
    let mut want = subcommands.iter();
    let mut next = want.next();
    for (i, a) in args.iter().enumerate().skip(1) {
        match next {
            Some(name) if a == *name => {
                cut = i + 1;
                next = want.next();
            }
            Some(_) => {}
            None => break,
        }
    }
    let mut out: Vec<OsString> = args[..cut].to_vec();
    out.extend(to_flags(entries));
    out.extend_from_slice(&args[cut..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn flags_follow_subcommands() {
        let args = os(&["obpe", "--threads", "2", "stats", "overlap", "--p", "0"]);
        let merged = merge_args(&args, &["stats", "overlap"], &[("p".into(), "-1".into())]);
        assert_eq!(
            merged,
            os(&[
                "obpe",
                "--threads",
                "2",
                "stats",
                "overlap",
                "--p",
                "-1",
                "--p",
                "0"
            ])
        );
    }

    #[test]
    fn booleans_and_underscores() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(
            &path,
            "# comment\nseed_tokens = ab\nindependent = true\nquiet = false\n",
        )
        .unwrap();
        let entries = read_config(&path).unwrap();
        assert_eq!(to_flags(&entries), os(&["--seed-tokens", "ab", "--independent"]));
        fs::write(&path, "oops\n").unwrap();
        assert!(read_config(&path).is_err());
    }
}
