use std::path::PathBuf;

use crate::error::{Error, Result};

use super::ExperimentSpec;

/// Optional settings layered over [`ExperimentSpec::defaults`]. Keys mirror
/// the CLI flags: `nu`, `tau`, `halvings`, `T`, `grid`, `trunc`,
/// `picard-tol`, `picard-max`, `out`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub nu: Option<Vec<f64>>,
    pub tau: Option<f64>,
    pub halvings: Option<usize>,
    pub horizon: Option<f64>,
    pub grid: Option<usize>,
    pub trunc: Option<usize>,
    pub picard_tol: Option<f64>,
    pub picard_max: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ConfigOverrides {
    /// `other` wins wherever it is set.
    pub fn overridden_by(self, other: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            nu: other.nu.or(self.nu),
            tau: other.tau.or(self.tau),
            halvings: other.halvings.or(self.halvings),
            horizon: other.horizon.or(self.horizon),
            grid: other.grid.or(self.grid),
            trunc: other.trunc.or(self.trunc),
            picard_tol: other.picard_tol.or(self.picard_tol),
            picard_max: other.picard_max.or(self.picard_max),
            out: other.out.or(self.out),
        }
    }

    pub fn apply(&self, mut spec: ExperimentSpec) -> ExperimentSpec {
        if let Some(v) = &self.nu {
            spec.nu_list = v.clone();
        }
        if let Some(v) = self.tau {
            spec.tau_base = v;
        }
        if let Some(v) = self.halvings {
            spec.halvings = v;
        }
        if let Some(v) = self.horizon {
            spec.horizon = v;
        }
        if let Some(v) = self.grid {
            spec.n_points = v;
            if self.trunc.is_none() {
                spec.truncation = (v / 3).min(v / 2 - 1).max(1);
            }
        }
        if let Some(v) = self.trunc {
            spec.truncation = v;
        }
        if let Some(v) = self.picard_tol {
            spec.picard_tol = v;
        }
        if let Some(v) = self.picard_max {
            spec.picard_max = v;
        }
        if let Some(v) = &self.out {
            spec.out = Some(v.clone());
        }
        spec
    }
}

/// Comma-separated list of reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<f64>()
                .map_err(|_| Error::Config(format!("invalid number {x:?} in list {s:?}")))
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("invalid value {v:?} for key {key:?}")))
}

/// Parses flat `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<ConfigOverrides> {
    let mut c = ConfigOverrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got {raw:?}", lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        match key.replace('_', "-").as_str() {
            "nu" => c.nu = Some(parse_list(value)?),
            "tau" => c.tau = Some(parse_num(key, value)?),
            "halvings" => c.halvings = Some(parse_num(key, value)?),
            "T" | "horizon" => c.horizon = Some(parse_num(key, value)?),
            "grid" => c.grid = Some(parse_num(key, value)?),
            "trunc" => c.trunc = Some(parse_num(key, value)?),
            "picard-tol" => c.picard_tol = Some(parse_num(key, value)?),
            "picard-max" => c.picard_max = Some(parse_num(key, value)?),
            "out" => c.out = Some(PathBuf::from(value)),
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown key {other:?}",
                    lineno + 1
                )))
            }
        }
    }
    Ok(c)
}
