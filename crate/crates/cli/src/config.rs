use std::path::Path;

use serde::{Deserialize, Serialize};
use wavefield_core::anc::AncConfig;
use wavefield_core::pinn::TrainConfig;
use wavefield_core::{ScenarioConfig, ScenarioSpec};

use crate::error::CliError;

/// Epoch budget used by `--paper-scale`.
pub const FULL_SCALE_EPOCHS: usize = 500_000;

fn default_radii() -> Vec<f64> {
    (0..16).map(|i| 0.10 + 0.02 * i as f64).collect()
}
fn default_sh_order() -> usize {
    2
}
fn default_sh_regularization() -> f64 {
    1e-6
}
fn default_sphere_points() -> usize {
    400
}

/// Everything one experiment run needs: the scenario plus training, control
/// and sweep settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub anc: AncConfig,
    #[serde(default = "default_radii")]
    pub sweep_radii: Vec<f64>,
    #[serde(default = "default_sh_order")]
    pub sh_order: usize,
    #[serde(default = "default_sh_regularization")]
    pub sh_regularization: f64,
    #[serde(default = "default_sphere_points")]
    pub sphere_points: usize,
}

impl ExperimentConfig {
    pub fn headrest(seed: u64) -> Self {
        Self {
            scenario: ScenarioSpec::from(&ScenarioConfig::headrest(seed)),
            train: TrainConfig {
                seed,
                ..Default::default()
            },
            anc: AncConfig::default(),
            sweep_radii: default_radii(),
            sh_order: default_sh_order(),
            sh_regularization: default_sh_regularization(),
            sphere_points: default_sphere_points(),
        }
    }

    /// Reads JSON or TOML, chosen by file extension.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        match ext.to_ascii_lowercase().as_str() {
            "json" => Self::from_json(&text),
            "toml" => Self::from_toml(&text),
            other => Err(CliError::Config(format!("unsupported config extension {other:?}"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Sets both the scenario and training seeds.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.scenario.rng_seed = seed;
        self.train.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.train.validate()?;
        self.anc.validate()?;
        if self.sweep_radii.is_empty() {
            return Err(CliError::Config("sweep_radii must not be empty".into()));
        }
        if self.sweep_radii[0] <= 0.0 || self.sweep_radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("sweep_radii must be positive and ascending".into()));
        }
        if self.sphere_points == 0 {
            return Err(CliError::Config("sphere_points must be at least 1".into()));
        }
        if self.sh_order > wavefield_core::sh::MAX_BESSEL_ORDER {
            return Err(CliError::Config(format!(
                "sh_order {} exceeds the supported maximum {}",
                self.sh_order,
                wavefield_core::sh::MAX_BESSEL_ORDER
            )));
        }
        Ok(())
    }

    /// Validated scenario with every tone phase and amplitude filled in.
    pub fn resolve(&self) -> Result<ScenarioConfig, CliError> {
        self.validate()?;
        self.scenario.resolve().map_err(|e| CliError::Config(e.to_string()))
    }

    /// The configuration with the scenario written out in resolved form, so
    /// that parsing it back reproduces the same run.
    pub fn echo(&self) -> Result<Self, CliError> {
        let resolved = self.resolve()?;
        Ok(Self {
            scenario: ScenarioSpec::from(&resolved),
            ..self.clone()
        })
    }
}
