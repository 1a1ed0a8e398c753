//! Resolved run configuration and the `key=value` config file.
//!
//! File keys are the long flag names. They are spliced into the argument
//! list before parsing, so anything given on the command line wins.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;
use lagfib_core::models::FibrationModel;
use lagfib_core::ode::OdeOptions;
use lagfib_core::poly_geometry::TOL_ROOT;
use lagfib_core::quadrature::QuadOptions;
use serde::Serialize;

use crate::args::{Cli, CommonArgs, FamilyArg, Format};
use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub family: &'static str,
    pub n: usize,
    pub tol_root: f64,
    /// `None` means the scale-aware default of the polynomial module.
    pub tol_disc: Option<f64>,
    pub quad_rel: f64,
    pub ode_rel: f64,
    pub seed: u64,
    pub format: &'static str,
    /// Subcommand flags after defaults and config merging.
    pub args: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn resolve(common: &CommonArgs, args: BTreeMap<String, String>) -> CliResult<Self> {
        let family = common.family.unwrap_or(FamilyArg::Hl);
        let n = match family {
            FamilyArg::Ff22 => {
                if common.n.is_some_and(|n| n != 3) {
                    return Err(CliError::usage("the ff22 family has n = 3"));
                }
                3
            }
            FamilyArg::Hl => common.n.unwrap_or(3),
        };
        if n < 2 {
            return Err(CliError::usage("n must be at least 2"));
        }
        let quad_rel = common.quad_rel.unwrap_or(QuadOptions::default().rel_tol);
        let ode_rel = common.ode_rel.unwrap_or(OdeOptions::default().rtol);
        let tol_root = common.tol_root.unwrap_or(TOL_ROOT);
        for (name, v) in [("quad-rel", quad_rel), ("ode-rel", ode_rel), ("tol-root", tol_root)]
            .into_iter()
            .chain(common.tol_disc.map(|v| ("tol-disc", v)))
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::usage(format!("--{name} must be a positive number")));
            }
        }
        Ok(RunConfig {
            family: match family {
                FamilyArg::Hl => "hl",
                FamilyArg::Ff22 => "ff22",
            },
            n,
            tol_root,
            tol_disc: common.tol_disc,
            quad_rel,
            ode_rel,
            seed: common.seed.unwrap_or(DEFAULT_SEED),
            format: match common.format.unwrap_or(Format::Json) {
                Format::Json => "json",
                Format::Csv => "csv",
            },
            args,
        })
    }

    pub fn is_hl(&self) -> bool {
        self.family == "hl"
    }

    pub fn model(&self) -> CliResult<FibrationModel> {
        Ok(if self.is_hl() {
            FibrationModel::harvey_lawson(self.n)?
        } else {
            FibrationModel::focus_focus22()
        })
    }

    pub fn quad(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.quad_rel,
            ..QuadOptions::default()
        }
    }

    pub fn ode(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.ode_rel,
            ..OdeOptions::default()
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::config(format!("line {}: expected key=value", lineno + 1)));
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        let value = v.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(CliError::config(format!("line {}: empty key", lineno + 1)));
        }
        if out.insert(key.clone(), value).is_some() {
            return Err(CliError::config(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn given_flags(args: &[OsString]) -> BTreeSet<String> {
    args.iter()
        .filter_map(|a| {
            let s = a.to_string_lossy();
            let name = s.strip_prefix("--")?;
            Some(name.split('=').next().unwrap_or(name).to_string())
        })
        .collect()
}

struct FlagInfo {
    takes_value: bool,
}

/// Long flags of the top level (globals) and of each subcommand.
fn flag_table() -> (BTreeMap<String, FlagInfo>, BTreeMap<String, BTreeMap<String, FlagInfo>>) {
    let cmd = Cli::command();
    let collect = |c: &clap::Command| {
        c.get_arguments()
            .filter_map(|a| {
                let long = a.get_long()?;
                Some((
                    long.to_string(),
                    FlagInfo {
                        takes_value: a.get_action().takes_values(),
                    },
                ))
            })
            .collect::<BTreeMap<_, _>>()
    };
    let globals = collect(&cmd);
    let subs = cmd
        .get_subcommands()
        .map(|s| (s.get_name().to_string(), collect(s)))
        .collect();
    (globals, subs)
}

/// Appends config-file settings not already present on the command line.
pub fn merge_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let file = read_config_file(Path::new(&path))?;
    let (globals, subs) = flag_table();
    let sub = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().to_string())
        .find(|a| subs.contains_key(a));
    let given = given_flags(&args);
    let mut out = args;
    for (key, value) in file {
        if key == "config" {
            return Err(CliError::config("config files cannot include other config files"));
        }
        let local = sub.as_ref().and_then(|s| subs[s].get(&key));
        let info = match (globals.get(&key), local) {
            (Some(i), _) | (None, Some(i)) => i,
            (None, None) => {
                if subs.values().any(|m| m.contains_key(&key)) {
                    continue;
                }
                return Err(CliError::config(format!("unknown config key {key:?}")));
            }
        };
        if given.contains(&key) {
            continue;
        }
        if info.takes_value {
            out.push(format!("--{key}").into());
            out.push(value.into());
        } else {
            match value.as_str() {
                "true" | "1" | "yes" => out.push(format!("--{key}").into()),
                "false" | "0" | "no" => {}
                _ => return Err(CliError::config(format!("{key}: expected a boolean, got {value:?}"))),
            }
        }
    }
    Ok(out)
}

/// The subcommand's own flags as resolved by clap, for the output envelope.
pub fn subcommand_settings(matches: &clap::ArgMatches) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let Some((name, sub)) = matches.subcommand() else {
        return out;
    };
    let cmd = Cli::command();
    let Some(def) = cmd.find_subcommand(name) else {
        return out;
    };
    for arg in def.get_arguments().filter(|a| !a.is_global_set()) {
        let Some(long) = arg.get_long() else { continue };
        if let Ok(Some(vals)) = sub.try_get_raw(arg.get_id().as_str()) {
            let v: Vec<String> = vals.map(|s| s.to_string_lossy().to_string()).collect();
            out.insert(long.to_string(), v.join(","));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text() {
        let m = parse_config_text("# comment\nfamily = ff22\nradius=0.5 # trailing\n\n").unwrap();
        assert_eq!(m["family"], "ff22");
        assert_eq!(m["radius"], "0.5");
        assert!(parse_config_text("nonsense").is_err());
        assert!(parse_config_text("a=1\na=2").is_err());
    }
}
