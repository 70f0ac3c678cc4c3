//! Experiment settings: global flags layered over an optional TOML file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use wga_core::group::{GroupConfig, DEFAULT_BALL_CAP};
use wga_core::sample::DEFAULT_SEED;
use wga_core::spectral::DEFAULT_GROUP_CAPS;
use wga_core::GroupSpec;

/// Contents of a `--config` file. Every key is optional; flags win over
/// the file, the file wins over built-in defaults.
///
/// ```toml
/// seed = 7
/// caps = [2, 4]
/// cache_dir = "balls"
/// rho_grid = [1.0, 2.0, 4.0]
///
/// [group]
/// family = "free-abelian"
/// rank = 2
/// generators = ["(1,0)", "(-1,0)", "(0,1)", "(0,-1)", "(1,1)", "(-1,-1)"]
/// ```
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: Option<GroupConfig>,
    pub sigma: Option<String>,
    pub radius: Option<u32>,
    pub rho_grid: Option<Vec<f64>>,
    pub r_grid: Option<Vec<f64>>,
    pub truncation: Option<u32>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
    pub caps: Option<[u32; 2]>,
    pub max_elements: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| wga_core::Error::Parse(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if let Some(g) = &self.group {
            GroupSpec::from_config(g)?;
        }
        if let Some(s) = &self.sigma {
            s.parse::<wga_core::GrowthFunction>()?;
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                bail!(wga_core::Error::Parse(format!("tolerance must be positive, got {t}")));
            }
        }
        if let Some([c, k]) = self.caps {
            if c == 0 || k == 0 {
                bail!(wga_core::Error::Parse("caps must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Resolved settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Settings {
    pub file: ExperimentConfig,
    pub seed: u64,
    pub tolerance: f64,
    pub caps: (u32, u32),
    pub max_elements: usize,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl Settings {
    pub fn new(
        file: ExperimentConfig,
        seed: Option<u64>,
        tolerance: Option<f64>,
        caps: Option<(u32, u32)>,
        max_elements: Option<usize>,
        cache_dir: Option<PathBuf>,
        out_dir: Option<PathBuf>,
    ) -> Self {
        Settings {
            seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            tolerance: tolerance.or(file.tolerance).unwrap_or(wga_core::EQUALITY_TOLERANCE),
            caps: caps.or(file.caps.map(|[c, k]| (c, k))).unwrap_or(DEFAULT_GROUP_CAPS),
            max_elements: max_elements.or(file.max_elements).unwrap_or(DEFAULT_BALL_CAP),
            cache_dir: cache_dir.or_else(|| file.cache_dir.clone()),
            out_dir: out_dir.or_else(|| file.out_dir.clone()),
            file,
        }
    }

    /// A group argument is a short name such as `f2`, a path to a TOML group
    /// file, or `@config` for the `[group]` table of the config file.
    pub fn group(&self, token: &str) -> Result<GroupSpec> {
        if token == "@config" {
            let Some(g) = &self.file.group else {
                bail!(wga_core::Error::Parse("`@config` used but the config has no [group] table".into()));
            };
            return Ok(GroupSpec::from_config(g)?);
        }
        if token.ends_with(".toml") {
            let text = std::fs::read_to_string(token).with_context(|| format!("reading {token}"))?;
            return Ok(GroupSpec::from_toml_str(&text)?);
        }
        Ok(GroupSpec::parse_short(token)?)
    }

    /// Group from `--group`, falling back to the config file.
    pub fn group_or_config(&self, token: Option<&str>) -> Result<GroupSpec> {
        match token {
            Some(t) => self.group(t),
            None if self.file.group.is_some() => self.group("@config"),
            None => bail!(wga_core::Error::Parse("no group given: pass --group or a config with [group]".into())),
        }
    }

    pub fn sigma(&self, arg: Option<&str>) -> Result<wga_core::GrowthFunction> {
        match arg.or(self.file.sigma.as_deref()) {
            Some(s) => Ok(s.parse()?),
            None => bail!(wga_core::Error::Parse("no growth function given".into())),
        }
    }
}

/// Parses `c,k`.
pub fn parse_caps(s: &str) -> std::result::Result<(u32, u32), String> {
    let (c, k) = s.split_once(',').ok_or_else(|| format!("expected `c,k`, got {s:?}"))?;
    let c: u32 = c.trim().parse().map_err(|e| format!("bad c: {e}"))?;
    let k: u32 = k.trim().parse().map_err(|e| format!("bad k: {e}"))?;
    if c == 0 || k == 0 {
        return Err("caps must be at least 1".into());
    }
    Ok((c, k))
}

/// Parses a comma-separated list of positive reals.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let grid: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad grid value {t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if grid.is_empty() || grid.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(format!("grid values must be positive and finite: {s:?}"));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("seed = 1\nsede = 2\n").is_err());
        let cfg: ExperimentConfig = toml::from_str("seed = 1\ncaps = [3, 5]\n").unwrap();
        assert_eq!(cfg.caps, Some([3, 5]));
    }

    #[test]
    fn flags_override_file() {
        let file = ExperimentConfig { seed: Some(7), caps: Some([3, 3]), ..Default::default() };
        let s = Settings::new(file.clone(), None, None, None, None, None, None);
        assert_eq!((s.seed, s.caps), (7, (3, 3)));
        let s = Settings::new(file, Some(9), None, Some((1, 2)), None, None, None);
        assert_eq!((s.seed, s.caps), (9, (1, 2)));
    }

    #[test]
    fn grids_and_caps() {
        assert_eq!(parse_grid("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert!(parse_grid("1,-2").is_err());
        assert_eq!(parse_caps("2,4").unwrap(), (2, 4));
        assert!(parse_caps("0,4").is_err());
    }
}
