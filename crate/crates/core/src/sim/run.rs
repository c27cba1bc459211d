//! Monte Carlo driver: one channel draw per `(seed, trial)`, every scheme on
//! every sweep value, each emitted design re-checked against its constraints.

use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::joint::RunStatus;
use crate::model::{blue_mse, causality_violation, cplx, sensor_powers, watts_to_dbm, CVec, ChannelRealization, NetworkConfig};
use crate::schemes::{SchemeOutcome, SchemeRegistry};
use crate::sim::geometry::{draw_channels, draw_geometry, rayleigh_vector, trial_rng};
use crate::sim::spec::{ExperimentKind, ExperimentSpec, Problem, SweepParameter};
use crate::special::{centralized_mse_bound, tradeoff_curve, CommonHarvesterConfig, IterationControl};

/// Relative slack allowed when re-validating emitted designs.
pub const EMIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TrialStatus {
    Converged,
    MaxIterations,
    NumericalFailure,
    Infeasible,
    ConstraintViolation,
    Error,
}

impl TrialStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrialStatus::Converged => "converged",
            TrialStatus::MaxIterations => "max-iterations",
            TrialStatus::NumericalFailure => "numerical-failure",
            TrialStatus::Infeasible => "infeasible",
            TrialStatus::ConstraintViolation => "constraint-violation",
            TrialStatus::Error => "error",
        }
    }

    /// The run produced a design that passed re-validation.
    pub fn usable(&self) -> bool {
        matches!(self, TrialStatus::Converged | TrialStatus::MaxIterations | TrialStatus::NumericalFailure)
    }
}

impl From<RunStatus> for TrialStatus {
    fn from(s: RunStatus) -> Self {
        match s {
            RunStatus::Converged => TrialStatus::Converged,
            RunStatus::MaxIterations => TrialStatus::MaxIterations,
            RunStatus::NumericalFailure => TrialStatus::NumericalFailure,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRun {
    pub scheme: String,
    pub status: TrialStatus,
    pub message: Option<String>,
    pub outcome: Option<SchemeOutcome>,
    /// Per-sensor `(harvested, transmit)` watts of the emitted design.
    pub sensors: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRun {
    pub status: TrialStatus,
    pub message: Option<String>,
    /// `(power W, mse)` pairs.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub trial: usize,
    pub bound: f64,
    pub runs: Vec<SchemeRun>,
    pub curve: Option<CurveRun>,
}

impl TrialRecord {
    pub fn run(&self, scheme: &str) -> Option<&SchemeRun> {
        self.runs.iter().find(|r| r.scheme == scheme)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    /// Sorted by `(sweep index, trial)`.
    pub records: Vec<TrialRecord>,
}

impl ExperimentResult {
    pub fn failures(&self) -> usize {
        self.records
            .iter()
            .flat_map(|r| r.runs.iter().map(|s| s.status).chain(r.curve.iter().map(|c| c.status)))
            .filter(|s| !s.usable())
            .count()
    }
}

fn problem_of(spec: &ExperimentSpec) -> Problem {
    match spec.kind {
        ExperimentKind::PowerVsIteration | ExperimentKind::PowerVsGamma => Problem::Power,
        ExperimentKind::Custom => spec.problem.unwrap_or(Problem::Mse),
        _ => Problem::Mse,
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Independent constraint checks on an emitted design.
fn revalidate(cfg: &NetworkConfig, ch: &ChannelRealization, out: &SchemeOutcome, gamma: Option<f64>) -> Result<()> {
    let d = &out.design;
    let violation = causality_violation(cfg, ch, d);
    if violation > EMIT_TOL {
        return Err(CoreError::CertificateFailure(format!("sensor causality violated by {violation:.3e}")));
    }
    let mse = blue_mse(cfg, ch, d)?;
    if relative(mse, out.mse) > EMIT_TOL {
        return Err(CoreError::CertificateFailure(format!("reported MSE {} but design gives {mse}", out.mse)));
    }
    match gamma {
        None => {
            if d.fc_power() > cfg.total_power * (1.0 + EMIT_TOL) {
                return Err(CoreError::CertificateFailure(format!("FC power {} exceeds {}", d.fc_power(), cfg.total_power)));
            }
        }
        Some(g) => {
            if mse * g > 1.0 + EMIT_TOL {
                return Err(CoreError::CertificateFailure(format!("MSE {mse} misses the target {}", 1.0 / g)));
            }
            if relative(d.fc_power(), out.fc_power) > EMIT_TOL {
                return Err(CoreError::CertificateFailure("reported FC power differs from tr W".into()));
            }
        }
    }
    Ok(())
}

fn failed(scheme: &str, e: CoreError) -> SchemeRun {
    let status = match e {
        CoreError::Infeasible(_) => TrialStatus::Infeasible,
        _ => TrialStatus::Error,
    };
    SchemeRun { scheme: scheme.to_string(), status, message: Some(e.to_string()), outcome: None, sensors: Vec::new() }
}

fn run_scheme(
    registry: &SchemeRegistry,
    name: &str,
    cfg: &NetworkConfig,
    ch: &ChannelRealization,
    gamma: Option<f64>,
) -> SchemeRun {
    let outcome = match gamma {
        None => registry.mse(name).and_then(|s| s.minimize_mse(cfg, ch)),
        Some(g) => registry.power(name).and_then(|s| s.minimize_power(cfg, ch, g)),
    };
    let out = match outcome {
        Ok(o) => o,
        Err(e) => return failed(name, e),
    };
    if let Err(e) = revalidate(cfg, ch, &out, gamma) {
        log::warn!("{name}: {e}");
        return SchemeRun {
            scheme: name.to_string(),
            status: TrialStatus::ConstraintViolation,
            message: Some(e.to_string()),
            outcome: Some(out),
            sensors: Vec::new(),
        };
    }
    let sensors = sensor_powers(cfg, ch, &out.design)
        .into_iter()
        .enumerate()
        .map(|(k, (avail, tx))| (avail + cfg.circuit_power(k), tx))
        .collect();
    SchemeRun { scheme: name.to_string(), status: out.status.into(), message: None, outcome: Some(out), sensors }
}

fn run_curve(spec: &ExperimentSpec, cfg: &NetworkConfig, ch: &ChannelRealization, h_e: CVec) -> CurveRun {
    let chc = CommonHarvesterConfig { net: cfg.clone(), h_e };
    let grid: Vec<f64> = spec.tradeoff_grid_dbm.iter().map(|&p| crate::model::dbm_to_watts(p)).collect();
    let d = chc.d();
    let first = chc.budget(grid[0]);
    let dsum: f64 = d.iter().sum();
    let init = CVec::from_element(cfg.n_s, cplx((first / dsum).sqrt()));
    let curve = tradeoff_curve(&chc, ch, &grid, &init, &IterationControl::default());
    let points = match curve {
        Ok(p) => p,
        Err(e) => {
            let status = if matches!(e, CoreError::Infeasible(_)) { TrialStatus::Infeasible } else { TrialStatus::Error };
            return CurveRun { status, message: Some(e.to_string()), points: Vec::new() };
        }
    };
    let bound = centralized_mse_bound(cfg);
    for p in &points {
        let used: f64 = p.amp.iter().zip(d.iter()).map(|(a, dk)| a.norm_sqr() * dk).sum();
        if relative(used, chc.budget(p.power)) > EMIT_TOL || p.mse < bound * (1.0 - EMIT_TOL) {
            return CurveRun {
                status: TrialStatus::ConstraintViolation,
                message: Some(format!("sum-power or bound check failed at P = {}", p.power)),
                points: points.iter().map(|q| (q.power, q.mse)).collect(),
            };
        }
    }
    CurveRun { status: TrialStatus::Converged, message: None, points: points.into_iter().map(|q| (q.power, q.mse)).collect() }
}

fn run_trial(spec: &ExperimentSpec, registry: &SchemeRegistry, sweep_index: usize, trial: usize) -> Result<TrialRecord> {
    let value = spec.sweep.values[sweep_index];
    let cfg = spec.network_at(value)?;
    let mut rng = trial_rng(spec.seed, trial as u64);
    let geometry = draw_geometry(&spec.geometry, cfg.n_s, &mut rng)?;
    let ch = draw_channels(&cfg, &geometry, &mut rng)?;
    let bound = centralized_mse_bound(&cfg);
    let mut record = TrialRecord { sweep_index, sweep_value: value, trial, bound, runs: Vec::new(), curve: None };
    if spec.kind == ExperimentKind::Tradeoff {
        let h_e = rayleigh_vector(cfg.n_r, geometry.gains[0], &mut rng);
        record.curve = Some(run_curve(spec, &cfg, &ch, h_e));
        return Ok(record);
    }
    let gamma = match problem_of(spec) {
        Problem::Mse => None,
        Problem::Power => spec.gamma_at(value),
    };
    for name in &spec.schemes {
        record.runs.push(run_scheme(registry, name, &cfg, &ch, gamma));
    }
    Ok(record)
}

/// Rejects targets at or beyond the centralized limit before any trial runs.
fn precheck(spec: &ExperimentSpec) -> Result<()> {
    if problem_of(spec) != Problem::Power || spec.kind == ExperimentKind::Tradeoff {
        return Ok(());
    }
    for &v in &spec.sweep.values {
        let cfg = spec.network_at(v)?;
        let gamma = spec.gamma_at(v).ok_or_else(|| CoreError::Config("missing distortion target".into()))?;
        let limit = 1.0 / centralized_mse_bound(&cfg);
        if !(gamma > 0.0 && gamma < limit) {
            return Err(CoreError::Infeasible(format!(
                "distortion target {} is not above the centralized MSE {}",
                1.0 / gamma,
                1.0 / limit
            )));
        }
    }
    Ok(())
}

pub fn registry_for(spec: &ExperimentSpec) -> SchemeRegistry {
    SchemeRegistry::with_defaults(spec.stopping, spec.starts, spec.weights.clone())
}

/// Runs every `(sweep value, trial)` pair on the current rayon pool.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    precheck(spec)?;
    let registry = registry_for(spec);
    for name in &spec.schemes {
        match problem_of(spec) {
            _ if spec.kind == ExperimentKind::Tradeoff => {}
            Problem::Mse => {
                registry.mse(name)?;
            }
            Problem::Power => {
                registry.power(name)?;
            }
        }
    }
    let jobs: Vec<(usize, usize)> =
        (0..spec.sweep.values.len()).flat_map(|s| (0..spec.trials).map(move |t| (s, t))).collect();
    let mut records = jobs
        .par_iter()
        .map(|&(s, t)| run_trial(spec, &registry, s, t))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.sweep_index, r.trial));
    Ok(ExperimentResult { spec: spec.clone(), records })
}

/// Column name of the swept quantity.
pub fn sweep_column(p: SweepParameter) -> &'static str {
    match p {
        SweepParameter::NR => "n_r",
        SweepParameter::NS => "n_s",
        SweepParameter::GammaInv => "gamma_inv",
        SweepParameter::TotalPowerDbm => "total_power_dbm",
        SweepParameter::Size => "size",
        SweepParameter::None => "case",
    }
}

pub(crate) fn dbm(watts: f64) -> f64 {
    if watts > 0.0 {
        watts_to_dbm(watts)
    } else {
        f64::NEG_INFINITY
    }
}
