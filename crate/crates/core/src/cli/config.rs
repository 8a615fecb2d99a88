//! Run configuration: an optional TOML key-value file overridden by flags.
//!
//! Recognised keys (all optional):
//!
//! ```toml
//! age_min = 30
//! age_max = 34
//! edu_map = "edu_map.csv"      # code,level CSV
//! countries = ["US", "RO"]
//! waves = [1980, 1990]
//! strict = false
//! scheme = "path-independent"  # or a list, or "all"
//! horizon = "short"            # short | long | both
//! ipf_tol = 1e-10
//! ipf_max_iter = 10000
//! zero_adjust = 0.5
//! ```

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::Error;
use crate::ingest::TabulationConfig;
use crate::market::{IpfConfig, OddsRatioIpf, SchemeName, DEFAULT_ZERO_ADJUST};

use super::{CliError, ExitStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Short,
    Long,
    Both,
}

impl Horizon {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "short" => Ok(Horizon::Short),
            "long" => Ok(Horizon::Long),
            "both" => Ok(Horizon::Both),
            other => Err(CliError::usage(format!(
                "unknown horizon {other:?}; expected short, long or both"
            ))),
        }
    }

    pub fn short(self) -> bool {
        matches!(self, Horizon::Short | Horizon::Both)
    }

    pub fn long(self) -> bool {
        matches!(self, Horizon::Long | Horizon::Both)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SchemeList {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub age_min: Option<u32>,
    pub age_max: Option<u32>,
    pub edu_map: Option<PathBuf>,
    pub countries: Option<Vec<String>>,
    pub waves: Option<Vec<i32>>,
    pub strict: Option<bool>,
    pub scheme: Option<SchemeList>,
    pub horizon: Option<String>,
    pub ipf_tol: Option<f64>,
    pub ipf_max_iter: Option<usize>,
    pub zero_adjust: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| {
            CliError::from(Error::Io {
                path: path.to_path_buf(),
                source,
            })
        })?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: invalid config: {e}", path.display())))
    }

    /// Relative paths inside the file resolve against the file's directory.
    pub fn resolve_paths(mut self, config_path: &Path) -> Self {
        if let (Some(map), Some(dir)) = (&self.edu_map, config_path.parent()) {
            if map.is_relative() {
                self.edu_map = Some(dir.join(map));
            }
        }
        self
    }
}

/// Fully resolved settings for one subcommand run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tabulation: TabulationConfig,
    pub schemes: Vec<SchemeName>,
    pub horizon: Horizon,
    pub model: OddsRatioIpf,
}

/// Flag values; `None` defers to the config file, then to defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub age_min: Option<u32>,
    pub age_max: Option<u32>,
    pub edu_map: Option<PathBuf>,
    pub countries: Vec<String>,
    pub waves: Vec<i32>,
    pub strict: bool,
    pub scheme: Vec<String>,
    pub horizon: Option<String>,
    pub ipf_tol: Option<f64>,
    pub ipf_max_iter: Option<usize>,
    pub zero_adjust: Option<f64>,
}

impl RunConfig {
    pub fn resolve(flags: Overrides) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?.resolve_paths(path),
            None => FileConfig::default(),
        };

        let mut tabulation = TabulationConfig::default();
        if let Some(path) = flags.edu_map.or(file.edu_map) {
            let reader = File::open(&path).map_err(|source| CliError::from(Error::Io { path, source }))?;
            tabulation = tabulation
                .with_edu_map_csv(reader)
                .map_err(|e| CliError::usage(format!("edu map: {e}")))?;
        }
        if let Some(v) = flags.age_min.or(file.age_min) {
            tabulation.age_min = v;
        }
        if let Some(v) = flags.age_max.or(file.age_max) {
            tabulation.age_max = v;
        }
        let countries = if flags.countries.is_empty() {
            file.countries.unwrap_or_default()
        } else {
            flags.countries
        };
        tabulation.countries = countries.into_iter().collect();
        let waves = if flags.waves.is_empty() {
            file.waves.unwrap_or_default()
        } else {
            flags.waves
        };
        tabulation.waves = waves.into_iter().collect();
        tabulation.strict = flags.strict || file.strict.unwrap_or(false);
        tabulation.validate().map_err(|e| CliError::usage(e.to_string()))?;

        let scheme_names = if !flags.scheme.is_empty() {
            flags.scheme
        } else {
            match file.scheme {
                Some(SchemeList::One(s)) => vec![s],
                Some(SchemeList::Many(v)) => v,
                None => vec![SchemeName::PathIndependent.as_str().to_string()],
            }
        };
        let schemes = parse_schemes(&scheme_names)?;

        let horizon = Horizon::parse(flags.horizon.or(file.horizon).as_deref().unwrap_or("short"))?;

        let defaults = IpfConfig::default();
        let ipf = IpfConfig {
            tol: flags.ipf_tol.or(file.ipf_tol).unwrap_or(defaults.tol),
            max_iter: flags.ipf_max_iter.or(file.ipf_max_iter).unwrap_or(defaults.max_iter),
        };
        ipf.validate().map_err(|e| CliError::usage(e.to_string()))?;
        let zero_adjust = flags.zero_adjust.or(file.zero_adjust).unwrap_or(DEFAULT_ZERO_ADJUST);
        if !(zero_adjust >= 0.0 && zero_adjust.is_finite()) {
            return Err(CliError::usage(format!(
                "--zero-adjust must be nonnegative, got {zero_adjust}"
            )));
        }

        Ok(RunConfig {
            tabulation,
            schemes,
            horizon,
            model: OddsRatioIpf { zero_adjust, ipf },
        })
    }
}

/// Accepts names, comma-separated lists and `all`; keeps canonical order.
fn parse_schemes(names: &[String]) -> Result<Vec<SchemeName>, CliError> {
    let mut out = Vec::new();
    for name in names.iter().flat_map(|n| n.split(',')).map(str::trim) {
        if name == "all" {
            out.extend(SchemeName::ALL);
        } else {
            out.push(
                name.parse::<SchemeName>()
                    .map_err(|e| CliError::new(ExitStatus::Usage, e.to_string()))?,
            );
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}
