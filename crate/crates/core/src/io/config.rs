use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coexistence::{DEFAULT_RANK_TOLERANCE, DEFAULT_SPACING_THRESHOLD};
use crate::error::{Error, Result};
use crate::hull::{HullOptions, DEFAULT_TOLERANCE, DIMENSION_CAP};

/// Flat JSON configuration shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tolerance: f64,
    pub spacing_threshold: f64,
    pub rank_tolerance: f64,
    pub dimension_cap: usize,
    pub output_dir: Option<PathBuf>,
    pub demo_parameters: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: DEFAULT_TOLERANCE,
            spacing_threshold: DEFAULT_SPACING_THRESHOLD,
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
            dimension_cap: DIMENSION_CAP,
            output_dir: None,
            demo_parameters: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text =
            std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        RunConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tolerance", self.tolerance),
            ("spacing_threshold", self.spacing_threshold),
            ("rank_tolerance", self.rank_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(
                    format!("/{name}"),
                    "must be a positive finite number",
                ));
            }
        }
        if self.dimension_cap == 0 || self.dimension_cap > DIMENSION_CAP {
            return Err(Error::validation(
                "/dimension_cap",
                format!("must lie in 1..={DIMENSION_CAP}"),
            ));
        }
        Ok(())
    }

    pub fn hull_options(&self) -> HullOptions {
        HullOptions {
            tolerance: self.tolerance,
            dimension_cap: self.dimension_cap,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
        let c = RunConfig::from_json(r#"{"tolerance": 1e-7, "spacing_threshold": 4}"#).unwrap();
        assert_eq!(c.tolerance, 1e-7);
        assert_eq!(c.spacing_threshold, 4.0);
    }

    #[test]
    fn invalid_values() {
        assert!(matches!(
            RunConfig::from_json(r#"{"tolerance": 0}"#),
            Err(Error::Validation { .. })
        ));
        assert!(RunConfig::from_json(r#"{"dimension_cap": 9}"#).is_err());
        assert!(RunConfig::from_json(r#"{"tolerence": 1e-9}"#).is_err());
    }
}
