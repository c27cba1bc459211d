//! Sensor placement, log-distance path loss and Rayleigh channel draws.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::{CMat, CVec, ChannelRealization, NetworkConfig};

pub const PL_INTERCEPT_DB: f64 = 31.7;
pub const PL_SLOPE_DB: f64 = 27.6;

/// `31.7 + 27.6 log10(d)` dB.
pub fn path_loss_db(d: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(CoreError::InvalidArgument(format!("distance must be positive, got {d}")));
    }
    Ok(PL_INTERCEPT_DB + PL_SLOPE_DB * d.log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum PathLoss {
    LogDistance { intercept_db: f64, slope_db: f64 },
    /// Unit large-scale gain on every link.
    None,
}

impl Default for PathLoss {
    fn default() -> Self {
        PathLoss::LogDistance { intercept_db: PL_INTERCEPT_DB, slope_db: PL_SLOPE_DB }
    }
}

impl PathLoss {
    pub fn db(&self, d: f64) -> Result<f64> {
        match *self {
            PathLoss::LogDistance { intercept_db, slope_db } => {
                path_loss_db(d)?;
                Ok(intercept_db + slope_db * d.log10())
            }
            PathLoss::None => Ok(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometrySpec {
    /// Sensors are uniform over `[-half_width, half_width]²` with the FC at the origin.
    pub half_width: f64,
    pub min_distance: f64,
    pub path_loss: PathLoss,
    /// All sensors share a single position (common-harvester deployments).
    pub colocated: bool,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        Self { half_width: 10.0, min_distance: 1.0, path_loss: PathLoss::default(), colocated: false }
    }
}

impl GeometrySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.min_distance >= 0.0 && self.min_distance < self.half_width) {
            return Err(CoreError::Config("geometry needs 0 ≤ min_distance < half_width".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySample {
    pub positions: Vec<[f64; 2]>,
    pub distances: Vec<f64>,
    pub path_loss_db: Vec<f64>,
    /// Large-scale power gains `10^(−PL/10)`.
    pub gains: Vec<f64>,
}

/// Per-trial generator: a ChaCha8 stream keyed by `(seed, trial)`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn draw_position(spec: &GeometrySpec, rng: &mut impl Rng) -> ([f64; 2], f64) {
    loop {
        let p = [
            rng.random_range(-spec.half_width..=spec.half_width),
            rng.random_range(-spec.half_width..=spec.half_width),
        ];
        let d = p[0].hypot(p[1]);
        if d >= spec.min_distance && d > 0.0 {
            return (p, d);
        }
    }
}

pub fn draw_geometry(spec: &GeometrySpec, n_s: usize, rng: &mut impl Rng) -> Result<GeometrySample> {
    spec.validate()?;
    let mut positions = Vec::with_capacity(n_s);
    let mut distances = Vec::with_capacity(n_s);
    let shared = spec.colocated.then(|| draw_position(spec, rng));
    for _ in 0..n_s {
        let (p, d) = shared.unwrap_or_else(|| draw_position(spec, rng));
        positions.push(p);
        distances.push(d);
    }
    let path_loss_db = distances.iter().map(|&d| spec.path_loss.db(d)).collect::<Result<Vec<_>>>()?;
    let gains = path_loss_db.iter().map(|pl| 10f64.powf(-pl / 10.0)).collect();
    Ok(GeometrySample { positions, distances, path_loss_db, gains })
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn rayleigh_vector(n: usize, gain: f64, rng: &mut impl Rng) -> CVec {
    let s = gain.sqrt();
    DVector::from_fn(n, |_, _| complex_normal(rng) * s)
}

/// Downlink `g_k` and uplink `h_k` share the sensor's large-scale gain; small-scale
/// fading is independent per entry. Sensor `k`'s entries are drawn as `g_k` then `h_k`.
pub fn draw_channels(cfg: &NetworkConfig, geometry: &GeometrySample, rng: &mut impl Rng) -> Result<ChannelRealization> {
    if geometry.gains.len() != cfg.n_s {
        return Err(CoreError::InvalidArgument("geometry does not match n_s".into()));
    }
    let mut g_down = Vec::with_capacity(cfg.n_s);
    let mut h_up = CMat::zeros(cfg.n_r, cfg.n_s);
    for (k, &gain) in geometry.gains.iter().enumerate() {
        g_down.push(rayleigh_vector(cfg.n_r, gain, rng));
        h_up.set_column(k, &rayleigh_vector(cfg.n_r, gain, rng));
    }
    Ok(ChannelRealization { g_down, h_up })
}
