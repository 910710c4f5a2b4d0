//! Run configuration shared by the CLI and config files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{Experiment, ExperimentSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Parse(format!(
                "unknown format `{s}` (expected csv or json)"
            ))),
        }
    }
}

/// Every setting a run can take. Absent fields fall back to per-command
/// defaults; values given on the command line override the file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_ladder: Option<Vec<f64>>,
    /// Degrees.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! take {
    ($base:ident, $over:ident, $($f:ident),*) => {
        $( if $over.$f.is_some() { $base.$f = $over.$f; } )*
    };
}

impl RunConfig {
    /// `self` with every field set in `over` replaced.
    pub fn overlay(mut self, over: RunConfig) -> RunConfig {
        take!(self, over, experiment, seed, n, horizon, window, reps, r_ladder, alpha, out, format);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.horizon {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::Domain {
                    name: "T",
                    value: t,
                });
            }
        }
        if let Some(w) = self.window {
            if w <= 0 {
                return Err(Error::InvalidArgument(format!(
                    "window must be positive, got {w}"
                )));
            }
        }
        if let Some(a) = self.alpha {
            check_alpha(a)?;
        }
        if let Some(l) = &self.r_ladder {
            check_ladder(l)?;
        }
        Ok(())
    }

    /// Experiment parameters, with `defaults` filling what the config leaves open.
    pub fn to_spec(&self, experiment: Experiment, defaults: &ExperimentSpec) -> ExperimentSpec {
        ExperimentSpec {
            experiment,
            seed_base: self.seed.unwrap_or(defaults.seed_base),
            reps: self.reps.unwrap_or(defaults.reps),
            n: self.n.unwrap_or(defaults.n),
            horizon: self.horizon.unwrap_or(defaults.horizon),
            window: self.window.unwrap_or(defaults.window),
            ladder: self
                .r_ladder
                .clone()
                .unwrap_or_else(|| defaults.ladder.clone()),
            alpha_deg: self.alpha.unwrap_or(defaults.alpha_deg),
            tolerance: defaults.tolerance,
        }
    }
}

pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_run_config(&text)
}

fn check_ladder(l: &[f64]) -> Result<()> {
    if l.is_empty() {
        return Err(Error::Parse("empty ladder".into()));
    }
    if let Some(&r) = l.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::Domain {
            name: "r",
            value: r,
        });
    }
    Ok(())
}

fn check_alpha(a: f64) -> Result<()> {
    if !(0.0..=90.0).contains(&a) {
        return Err(Error::Domain {
            name: "alpha",
            value: a,
        });
    }
    Ok(())
}

/// Parses a comma-separated list of positive radii such as `500,1000,2000`.
pub fn parse_r_ladder(s: &str) -> Result<Vec<f64>> {
    let l = s
        .split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad ladder entry `{p}`")))
        })
        .collect::<Result<Vec<f64>>>()?;
    check_ladder(&l)?;
    Ok(l)
}

/// Parses an angle in degrees within `[0, 90]`.
pub fn parse_alpha_degrees(s: &str) -> Result<f64> {
    let a: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad angle `{s}`")))?;
    check_alpha(a)?;
    Ok(a)
}
