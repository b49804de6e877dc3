//! Run manifests: flat `key=value` text, keys sorted.
//!
//! * `subcommand` and `version` identify the run.
//! * `arg.<flag>` holds every flag value, defaults included, as clap saw it.
//! * `resolved.<name>` holds values derived at run time (the default `k`,
//!   the twoNN window, ...).
//! * `input.<flag>.sha256` is the digest of each input file.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: BTreeMap<String, String>,
}

impl Manifest {
    /// Records the subcommand and every argument it was invoked with.
    pub fn from_matches(cmd: &Command, name: &str, matches: &ArgMatches) -> Self {
        let mut m = Manifest::default();
        m.set("subcommand", name);
        m.set("version", VERSION);
        let Some(sub) = cmd.find_subcommand(name) else { return m };
        for arg in sub.get_arguments() {
            let Some(long) = arg.get_long() else { continue };
            let id = arg.get_id().as_str();
            match matches.value_source(id) {
                Some(ValueSource::CommandLine | ValueSource::DefaultValue | ValueSource::EnvVariable) => {}
                _ => continue,
            }
            let Some(raw) = matches.get_raw(id) else { continue };
            let values: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
            if let Some(v) = values.last() {
                m.set(&format!("arg.{long}"), v);
            }
        }
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        debug_assert!(!key.contains('=') && !key.contains('\n') && !value.contains('\n'));
        self.entries.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn resolve(&mut self, name: &str, value: impl ToString) {
        self.set(&format!("resolved.{name}"), value);
    }

    /// Digests `path` and records it under the flag that named it.
    pub fn add_input(&mut self, flag: &str, path: &Path) -> Result<(), CliError> {
        self.set(&format!("input.{flag}.sha256"), sha256_file(path)?);
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut m = Manifest::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("manifest line {}: expected key=value", i + 1)))?;
            m.entries.insert(k.to_string(), v.to_string());
        }
        if m.get("subcommand").is_none() {
            return Err(CliError::Usage("manifest has no subcommand".into()));
        }
        Ok(m)
    }

    /// Command line that reproduces the recorded run.
    pub fn to_argv(&self, cmd: &Command) -> Result<Vec<String>, CliError> {
        let name = self.get("subcommand").expect("checked on parse");
        let sub = cmd
            .find_subcommand(name)
            .ok_or_else(|| CliError::Usage(format!("manifest names unknown subcommand {name:?}")))?;
        let mut argv = vec![cmd.get_name().to_string(), name.to_string()];
        for (key, value) in &self.entries {
            let Some(long) = key.strip_prefix("arg.") else { continue };
            let arg = sub
                .get_arguments()
                .find(|a| a.get_long() == Some(long))
                .ok_or_else(|| CliError::Usage(format!("manifest flag --{long} is not accepted by {name}")))?;
            if arg.get_action().takes_values() {
                argv.push(format!("--{long}"));
                argv.push(value.clone());
            } else if value == "true" {
                argv.push(format!("--{long}"));
            }
        }
        Ok(argv)
    }

    /// Checks the recorded version and input digests against the files on
    /// disk.
    pub fn verify_inputs(&self) -> Result<(), CliError> {
        if self.get("version") != Some(VERSION) {
            return Err(CliError::Domain(format!(
                "manifest was written by version {}, this is {VERSION}",
                self.get("version").unwrap_or("?")
            )));
        }
        for (key, digest) in &self.entries {
            let Some(flag) = key.strip_prefix("input.").and_then(|k| k.strip_suffix(".sha256")) else { continue };
            let path = self
                .get(&format!("arg.{flag}"))
                .ok_or_else(|| CliError::Usage(format!("manifest digests --{flag} but does not record its path")))?;
            let now = sha256_file(Path::new(path))?;
            if &now != digest {
                return Err(CliError::Domain(format!("input {path} changed since the manifest was written")));
            }
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.render()).map_err(|e| CliError::Domain(format!("writing {}: {e}", path.display())))
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut file = fs::File::open(path).map_err(|e| CliError::Domain(format!("reading {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| CliError::Domain(format!("reading {}: {e}", path.display())))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_round_trip() {
        let mut m = Manifest::default();
        m.set("subcommand", "volume");
        m.set("arg.r", 0.1);
        m.set("arg.d", 10);
        let text = m.render();
        assert_eq!(text, "arg.d=10\narg.r=0.1\nsubcommand=volume\n");
        assert_eq!(Manifest::parse(&text).unwrap(), m);
        assert!(Manifest::parse("arg.d=1\n").is_err());
        assert!(Manifest::parse("subcommand=x\nnot a pair\n").is_err());
    }
}
