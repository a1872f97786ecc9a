use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fusion::FusionConfig;
use crate::glcalc::FracOrder;
use crate::prognosis::{WarningPolicy, DEFAULT_HORIZON_MONTHS};

/// Per-component settings; `step` and `consistency_tol` override the globals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub rated_limit: f64,
    pub k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency_tol: Option<f64>,
}

/// Run configuration, read from a TOML file:
///
/// ```toml
/// nu = 0.5
/// step = 0.01
/// consistency_tol = 0.01
/// max_rounds = 3
/// horizon_months = 240.0
///
/// [components.body_vibration]
/// rated_limit = 1.5
/// k = 0.98
/// step = 0.001
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub nu: f64,
    pub step: f64,
    pub consistency_tol: f64,
    pub max_rounds: usize,
    pub horizon_months: f64,
    #[serde(default)]
    pub components: BTreeMap<String, ComponentConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut components = BTreeMap::new();
        components.insert(
            "engine_noise".to_string(),
            ComponentConfig {
                rated_limit: 74.0,
                k: 0.98,
                step: Some(0.01),
                consistency_tol: None,
            },
        );
        components.insert(
            "body_vibration".to_string(),
            ComponentConfig {
                rated_limit: 1.5,
                k: 0.98,
                step: Some(0.001),
                consistency_tol: None,
            },
        );
        RunConfig {
            nu: 0.5,
            step: 0.01,
            consistency_tol: 0.01,
            max_rounds: 3,
            horizon_months: DEFAULT_HORIZON_MONTHS,
            components,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: RunConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        config.validate().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        FracOrder::unit(self.nu)?;
        if !(self.horizon_months.is_finite() && self.horizon_months >= 0.0) {
            return Err(invalid(format!(
                "horizon must be a non-negative number of months, got {}",
                self.horizon_months
            )));
        }
        for (name, c) in &self.components {
            WarningPolicy::new(c.rated_limit, c.k)
                .map_err(|e| invalid(format!("component {name}: {e}")))?;
            self.fusion_config(name)?;
        }
        self.fusion_config("")?;
        Ok(())
    }

    /// Forces `step` for every component, e.g. from a command-line flag.
    pub fn override_step(&mut self, step: f64) {
        self.step = step;
        for c in self.components.values_mut() {
            c.step = None;
        }
    }

    pub fn fusion_config(&self, component: &str) -> Result<FusionConfig> {
        let c = self.components.get(component);
        FusionConfig::new(
            self.nu,
            c.and_then(|c| c.step).unwrap_or(self.step),
            c.and_then(|c| c.consistency_tol)
                .unwrap_or(self.consistency_tol),
            self.max_rounds,
        )
    }

    pub fn policy(&self, component: &str) -> Result<WarningPolicy> {
        let c = self
            .components
            .get(component)
            .ok_or_else(|| invalid(format!("no warning policy configured for {component}")))?;
        WarningPolicy::new(c.rated_limit, c.k)
    }
}
