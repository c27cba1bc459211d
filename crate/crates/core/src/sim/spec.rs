//! Declarative experiment descriptions, loadable from TOML or JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::EnergyWeights;
use crate::error::{CoreError, Result};
use crate::joint::StoppingRule;
use crate::model::{dbm_to_watts, NetworkConfig};
use crate::sim::geometry::GeometrySpec;

pub const DEFAULT_TRIALS: usize = 200;
pub const FC_POWER_DBM: f64 = 30.0;
pub const FC_NOISE_DBM: f64 = -103.16;
pub const HARVEST_EFFICIENCY: f64 = 0.51;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MseVsIteration,
    MseVsNs,
    PowerVsIteration,
    PowerVsGamma,
    Tradeoff,
    PowerControlTable,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    NR,
    NS,
    /// Distortion target `γ⁻¹`.
    GammaInv,
    TotalPowerDbm,
    /// `n_s = n_r`.
    Size,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Mse,
    Power,
}

/// Default network parameters; every field may be overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkSpec {
    pub n_s: usize,
    pub n_r: usize,
    pub total_power_dbm: f64,
    pub source_var: f64,
    pub sensing_var: f64,
    /// Per-sensor observation noise; overrides `sensing_var` when set.
    pub sensing_vars: Option<Vec<f64>>,
    pub fc_noise_dbm: f64,
    pub harvest_eff: f64,
    pub circuit_energy: f64,
    pub tau: f64,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self {
            n_s: 5,
            n_r: 5,
            total_power_dbm: FC_POWER_DBM,
            source_var: 1.0,
            sensing_var: 0.1,
            sensing_vars: None,
            fc_noise_dbm: FC_NOISE_DBM,
            harvest_eff: HARVEST_EFFICIENCY,
            circuit_energy: 0.0,
            tau: 0.5,
        }
    }
}

impl NetworkSpec {
    pub fn to_config(&self) -> Result<NetworkConfig> {
        let mut cfg = NetworkConfig::uniform(
            self.n_s,
            self.n_r,
            dbm_to_watts(self.total_power_dbm),
            self.source_var,
            self.sensing_var,
            dbm_to_watts(self.fc_noise_dbm),
            self.harvest_eff,
            self.circuit_energy,
        );
        cfg.tau = self.tau;
        if let Some(v) = &self.sensing_vars {
            if v.len() != self.n_s {
                return Err(CoreError::Config(format!("sensing_vars has {} entries, n_s = {}", v.len(), self.n_s)));
            }
            cfg.sensing_vars = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_seed() -> u64 {
    1
}

fn default_starts() -> usize {
    1
}

fn default_schemes() -> Vec<String> {
    vec!["joint".to_string()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub sweep: Sweep,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub network: NetworkSpec,
    #[serde(default)]
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub stopping: StoppingRule,
    /// Runtime-selected schemes by registry name; the first is the reference.
    #[serde(default = "default_schemes")]
    pub schemes: Vec<String>,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default)]
    pub weights: Option<EnergyWeights>,
    /// Distortion target `γ⁻¹` for power-minimization kinds when it is not swept.
    #[serde(default)]
    pub gamma_inv: Option<f64>,
    /// Problem solved by the `custom` kind.
    #[serde(default)]
    pub problem: Option<Problem>,
    /// FC powers of the trade-off curve, dBm.
    #[serde(default)]
    pub tradeoff_grid_dbm: Vec<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CoreError::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CoreError::Config(e.to_string()))
    }

    /// Parses by extension: `.json` as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let spec = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text)?,
            _ => Self::from_toml(&text)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| CoreError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(CoreError::Config(format!("invalid experiment name `{}`", self.name)));
        }
        if self.trials == 0 {
            return Err(CoreError::Config("trials must be at least 1".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(CoreError::Config("sweep must be nonempty".into()));
        }
        if self.sweep.values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Config("sweep values must be finite".into()));
        }
        if self.schemes.is_empty() {
            return Err(CoreError::Config("at least one scheme is required".into()));
        }
        if self.starts == 0 || self.stopping.max_iter == 0 {
            return Err(CoreError::Config("starts and stopping.max_iter must be at least 1".into()));
        }
        self.geometry.validate()?;
        let integer = matches!(self.sweep.parameter, SweepParameter::NR | SweepParameter::NS | SweepParameter::Size);
        if integer && self.sweep.values.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
            return Err(CoreError::Config("antenna and sensor counts must be positive integers".into()));
        }
        let power_kind = matches!(self.kind, ExperimentKind::PowerVsIteration | ExperimentKind::PowerVsGamma)
            || (self.kind == ExperimentKind::Custom && self.problem == Some(Problem::Power));
        if power_kind && self.sweep.parameter != SweepParameter::GammaInv && self.gamma_inv.is_none() {
            return Err(CoreError::Config("power minimization needs gamma_inv or a gamma-inv sweep".into()));
        }
        if self.kind == ExperimentKind::Custom && self.problem.is_none() {
            return Err(CoreError::Config("custom experiments must name a problem".into()));
        }
        if self.kind == ExperimentKind::Tradeoff {
            if self.tradeoff_grid_dbm.is_empty() {
                return Err(CoreError::Config("trade-off experiments need tradeoff_grid_dbm".into()));
            }
            if self.tradeoff_grid_dbm.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CoreError::Config("tradeoff_grid_dbm must be strictly ascending".into()));
            }
        }
        for v in &self.sweep.values {
            self.network_at(*v)?;
        }
        Ok(())
    }

    /// Network for one sweep value.
    pub fn network_at(&self, value: f64) -> Result<NetworkConfig> {
        let mut net = self.network.clone();
        match self.sweep.parameter {
            SweepParameter::NR => net.n_r = value as usize,
            SweepParameter::NS => net.n_s = value as usize,
            SweepParameter::Size => {
                net.n_s = value as usize;
                net.n_r = value as usize;
            }
            SweepParameter::TotalPowerDbm => net.total_power_dbm = value,
            SweepParameter::GammaInv | SweepParameter::None => {}
        }
        net.to_config()
    }

    /// `γ` for one sweep value, if the experiment has a target.
    pub fn gamma_at(&self, value: f64) -> Option<f64> {
        if self.sweep.parameter == SweepParameter::GammaInv {
            Some(1.0 / value)
        } else {
            self.gamma_inv.map(|g| 1.0 / g)
        }
    }
}
