//! Runtime-selectable design strategies behind trait objects.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{suboptimal_p1, suboptimal_p2, EnergyWeights};
use crate::error::{CoreError, Result};
use crate::joint::{algorithm1_multistart, algorithm2_multistart, default_init, RunStatus, StoppingRule};
use crate::model::{CMat, CVec, ChannelRealization, DesignPoint, NetworkConfig};
use crate::special::{single_antenna_mse_min, single_antenna_power_min};

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub design: DesignPoint,
    pub mse: f64,
    pub fc_power: f64,
    pub iterations: usize,
    pub status: RunStatus,
    /// Objective held after each iteration, empty for one-shot schemes.
    pub objectives: Vec<f64>,
}

pub trait MseScheme: Send + Sync {
    fn name(&self) -> &str;
    fn minimize_mse(&self, cfg: &NetworkConfig, ch: &ChannelRealization) -> Result<SchemeOutcome>;
}

pub trait PowerScheme: Send + Sync {
    fn name(&self) -> &str;
    fn minimize_power(&self, cfg: &NetworkConfig, ch: &ChannelRealization, gamma: f64) -> Result<SchemeOutcome>;
}

/// Alternating joint design. Starts beyond the first use the default
/// magnitudes with seeded random phases.
#[derive(Debug, Clone)]
pub struct Joint {
    pub stop: StoppingRule,
    pub starts: usize,
}

impl Joint {
    fn inits(&self, cfg: &NetworkConfig, ch: &ChannelRealization) -> Vec<CVec> {
        let base = default_init(cfg, ch);
        let mut inits = vec![base.clone()];
        for s in 1..self.starts.max(1) {
            let mut rng = ChaCha8Rng::seed_from_u64(s as u64);
            inits.push(base.map(|z| z * num_complex::Complex64::from_polar(1.0, TAU * rng.random::<f64>())));
        }
        inits
    }
}

impl MseScheme for Joint {
    fn name(&self) -> &str {
        "joint"
    }

    fn minimize_mse(&self, cfg: &NetworkConfig, ch: &ChannelRealization) -> Result<SchemeOutcome> {
        let t = algorithm1_multistart(cfg, ch, &self.inits(cfg, ch), &self.stop)?;
        let objectives = t.objectives();
        Ok(SchemeOutcome {
            mse: t.mse,
            fc_power: t.fc_power,
            iterations: t.iterations,
            status: t.status,
            objectives,
            design: t.design,
        })
    }
}

impl PowerScheme for Joint {
    fn name(&self) -> &str {
        "joint"
    }

    fn minimize_power(&self, cfg: &NetworkConfig, ch: &ChannelRealization, gamma: f64) -> Result<SchemeOutcome> {
        let t = algorithm2_multistart(cfg, ch, gamma, &self.inits(cfg, ch), &self.stop)?;
        let objectives = t.objectives();
        Ok(SchemeOutcome {
            mse: t.mse,
            fc_power: t.fc_power,
            iterations: t.iterations,
            status: t.status,
            objectives,
            design: t.design,
        })
    }
}

/// Two-phase baselines; `weights` defaults to uniform.
#[derive(Debug, Clone)]
pub struct TwoPhase {
    pub stop: StoppingRule,
    pub weights: Option<EnergyWeights>,
}

impl MseScheme for TwoPhase {
    fn name(&self) -> &str {
        "two-phase"
    }

    fn minimize_mse(&self, cfg: &NetworkConfig, ch: &ChannelRealization) -> Result<SchemeOutcome> {
        let weights = self.weights.clone().unwrap_or_else(|| EnergyWeights::uniform(cfg.n_s));
        let b = suboptimal_p1(cfg, ch, &weights, &self.stop)?;
        Ok(SchemeOutcome {
            design: b.design,
            mse: b.mse,
            fc_power: b.fc_power,
            iterations: b.iterations,
            status: if b.converged { RunStatus::Converged } else { RunStatus::MaxIterations },
            objectives: b.history,
        })
    }
}

impl PowerScheme for TwoPhase {
    fn name(&self) -> &str {
        "two-phase"
    }

    fn minimize_power(&self, cfg: &NetworkConfig, ch: &ChannelRealization, gamma: f64) -> Result<SchemeOutcome> {
        let b = suboptimal_p2(cfg, ch, gamma, &self.stop)?;
        Ok(SchemeOutcome {
            design: b.design,
            mse: b.mse,
            fc_power: b.fc_power,
            iterations: b.iterations,
            status: if b.converged { RunStatus::Converged } else { RunStatus::MaxIterations },
            objectives: b.history,
        })
    }
}

/// Global optimum for `n_r = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SingleAntenna;

fn scalar_design(amp: CVec, power: f64) -> DesignPoint {
    DesignPoint {
        amp,
        beam_gram: CMat::from_element(1, 1, num_complex::Complex64::new(power, 0.0)),
        filter: CVec::from_element(1, num_complex::Complex64::new(1.0, 0.0)),
    }
}

impl MseScheme for SingleAntenna {
    fn name(&self) -> &str {
        "single-antenna"
    }

    fn minimize_mse(&self, cfg: &NetworkConfig, ch: &ChannelRealization) -> Result<SchemeOutcome> {
        let s = single_antenna_mse_min(cfg, ch)?;
        Ok(SchemeOutcome {
            design: scalar_design(s.amp, s.power),
            mse: s.mse,
            fc_power: s.power,
            iterations: 1,
            status: RunStatus::Converged,
            objectives: Vec::new(),
        })
    }
}

impl PowerScheme for SingleAntenna {
    fn name(&self) -> &str {
        "single-antenna"
    }

    fn minimize_power(&self, cfg: &NetworkConfig, ch: &ChannelRealization, gamma: f64) -> Result<SchemeOutcome> {
        let s = single_antenna_power_min(cfg, ch, gamma)?;
        Ok(SchemeOutcome {
            design: scalar_design(s.amp, s.power),
            mse: s.mse,
            fc_power: s.power,
            iterations: 1,
            status: RunStatus::Converged,
            objectives: Vec::new(),
        })
    }
}

/// Name-keyed strategies for both problems.
pub struct SchemeRegistry {
    mse: BTreeMap<String, Box<dyn MseScheme>>,
    power: BTreeMap<String, Box<dyn PowerScheme>>,
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        Self { mse: BTreeMap::new(), power: BTreeMap::new() }
    }

    /// `joint`, `two-phase` and `single-antenna`.
    pub fn with_defaults(stop: StoppingRule, starts: usize, weights: Option<EnergyWeights>) -> Self {
        let mut r = Self::empty();
        r.register_mse(Box::new(Joint { stop, starts }));
        r.register_power(Box::new(Joint { stop, starts }));
        r.register_mse(Box::new(TwoPhase { stop, weights: weights.clone() }));
        r.register_power(Box::new(TwoPhase { stop, weights }));
        r.register_mse(Box::new(SingleAntenna));
        r.register_power(Box::new(SingleAntenna));
        r
    }

    pub fn register_mse(&mut self, s: Box<dyn MseScheme>) {
        self.mse.insert(s.name().to_string(), s);
    }

    pub fn register_power(&mut self, s: Box<dyn PowerScheme>) {
        self.power.insert(s.name().to_string(), s);
    }

    pub fn mse(&self, name: &str) -> Result<&dyn MseScheme> {
        self.mse
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| CoreError::Config(format!("unknown MSE scheme `{name}` (known: {})", self.mse_names().join(", "))))
    }

    pub fn power(&self, name: &str) -> Result<&dyn PowerScheme> {
        self.power
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| CoreError::Config(format!("unknown power scheme `{name}` (known: {})", self.power_names().join(", "))))
    }

    pub fn mse_names(&self) -> Vec<&str> {
        self.mse.keys().map(String::as_str).collect()
    }

    pub fn power_names(&self) -> Vec<&str> {
        self.power.keys().map(String::as_str).collect()
    }
}
