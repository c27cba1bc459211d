//! Two-phase comparison designs: energy beamforming chosen first, sensors
//! and filter second (MSE minimization), or sensors and filter first,
//! beamforming second (power minimization).

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};
use wpt_sdp::{solve, LinearFunctional, Relation, SdpProblem, Sense, SolveStatus, ToleranceSet};

use crate::error::{CoreError, Result};
use crate::joint::{raise_to_budgets, Sdr1Data, StoppingRule};
use crate::model::{
    cplx, mse_closed_form, optimal_filter, received_energy_power, CMat, CVec, ChannelRealization, DesignPoint, NetworkConfig,
};
use crate::special::{centralized_mse_bound, solve_fixed_budget};

/// Energy-transfer priorities `β_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyWeights {
    pub beta: Vec<f64>,
}

impl EnergyWeights {
    pub fn uniform(n_s: usize) -> Self {
        Self { beta: vec![1.0; n_s] }
    }

    pub fn validate(&self, n_s: usize) -> Result<()> {
        if self.beta.len() != n_s {
            return Err(CoreError::InvalidArgument(format!("expected {n_s} energy weights, got {}", self.beta.len())));
        }
        if self.beta.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(CoreError::InvalidArgument("energy weights must be finite and nonnegative".into()));
        }
        if self.beta.iter().all(|&b| b == 0.0) {
            return Err(CoreError::InvalidArgument("energy weights must not all vanish".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub design: DesignPoint,
    pub mse: f64,
    pub fc_power: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Inverse MSE per iteration for P1, total sensor power for P2.
    pub history: Vec<f64>,
}

/// Unit-norm leading eigenvector of `Σ β_k g_k g_k†`.
pub fn energy_direction(ch: &ChannelRealization, weights: &EnergyWeights) -> CVec {
    let nr = ch.h_up.nrows();
    let mut m = CMat::zeros(nr, nr);
    for (g, &b) in ch.g_down.iter().zip(&weights.beta) {
        m += g * g.adjoint() * cplx(b);
    }
    let eig = SymmetricEigen::new(m);
    let lead = eig.eigenvalues.imax();
    eig.eigenvectors.column(lead).into_owned()
}

/// Full power along the weighted energy direction, then the filter and
/// per-sensor-capped amplification alternately.
pub fn suboptimal_p1(
    cfg: &NetworkConfig,
    ch: &ChannelRealization,
    weights: &EnergyWeights,
    stop: &StoppingRule,
) -> Result<BaselineOutcome> {
    cfg.validate()?;
    ch.validate(cfg)?;
    weights.validate(cfg.n_s)?;
    let eta = energy_direction(ch, weights);
    let w = &eta * eta.adjoint() * cplx(cfg.total_power);
    let budgets: Vec<f64> = (0..cfg.n_s)
        .map(|k| (cfg.harvest_gain(k) * received_energy_power(ch, &w, k) - cfg.circuit_power(k)).max(0.0))
        .collect();
    if budgets.iter().all(|&b| b == 0.0) {
        return Err(CoreError::Infeasible("no sensor can cover its circuit power".into()));
    }
    let mut amp = CVec::from_fn(cfg.n_s, |k, _| cplx((budgets[k] / cfg.d(k)).sqrt()));
    let mut best = 1.0 / mse_closed_form(cfg, ch, &amp)?;
    let mut history = vec![best];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < stop.max_iter {
        iterations += 1;
        let v = optimal_filter(cfg, ch, &amp)?;
        let data = Sdr1Data::new(cfg, ch, &v)?;
        let (cand, _, _) = solve_fixed_budget(&data, &budgets)?;
        let value = 1.0 / mse_closed_form(cfg, ch, &cand)?;
        if value < best {
            converged = true;
            break;
        }
        let change = (value - best) / value;
        amp = cand;
        best = value;
        history.push(value);
        if change < stop.rel_tol {
            converged = true;
            break;
        }
    }
    let filter = optimal_filter(cfg, ch, &amp)?;
    Ok(BaselineOutcome {
        design: DesignPoint { amp, beam_gram: w, filter },
        mse: 1.0 / best,
        fc_power: cfg.total_power,
        iterations,
        converged,
        history,
    })
}

/// Minimum total sensor power `a†Da` reaching `1/mse ≥ gamma` for a fixed filter.
fn min_sensor_power_amp(cfg: &NetworkConfig, ch: &ChannelRealization, v: &CVec, gamma: f64) -> Result<(CVec, f64)> {
    let data = Sdr1Data::new(cfg, ch, v)?;
    let ns = cfg.n_s;
    let scale: Vec<f64> = (0..ns).map(|k| 1.0 / data.d[k].sqrt()).collect();
    let m = CMat::from_fn(ns, ns, |i, j| {
        let e = data.sigma[(i, j)] - if i == j { cplx(gamma * data.psi[i]) } else { cplx(0.0) };
        e * cplx(scale[i] * scale[j])
    });
    let eig = SymmetricEigen::new(m);
    let lead = eig.eigenvalues.imax();
    let lambda = eig.eigenvalues[lead];
    if !(lambda > 0.0) {
        return Err(CoreError::Infeasible(format!("target γ = {gamma} is unreachable with the current filter")));
    }
    let u = eig.eigenvectors.column(lead);
    let s = (gamma * data.c / lambda).sqrt();
    let amp = CVec::from_fn(ns, |k, _| u[k].conj() * cplx(s * scale[k]));
    Ok((amp, gamma * data.c / lambda))
}

/// Minimum-trace beamforming covering fixed per-sensor power needs.
pub fn min_power_beamforming(cfg: &NetworkConfig, ch: &ChannelRealization, amp: &CVec) -> Result<CMat> {
    let nr = cfg.n_r;
    let mut p = SdpProblem::new(Sense::Minimize);
    let w = p.add_block(nr);
    p.set_objective(LinearFunctional::new().block(w, CMat::identity(nr, nr)));
    for k in 0..cfg.n_s {
        let need = amp[k].norm_sqr() * cfg.d(k) + cfg.circuit_power(k);
        if need <= 0.0 {
            continue;
        }
        let g = ch.gram(k) * cplx(cfg.harvest_gain(k) / need);
        p.add_constraint(LinearFunctional::new().block(w, g), Relation::Ge, 1.0);
    }
    if p.num_constraints() == 0 {
        return Ok(CMat::zeros(nr, nr));
    }
    let sol = solve(&p, &ToleranceSet::default())?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(CoreError::Infeasible("sensor power needs cannot be met".into())),
        s => return Err(CoreError::Solver(s)),
    }
    let mut gram = sol.blocks[w].clone();
    raise_to_budgets(cfg, ch, amp, &mut gram);
    Ok(gram)
}

/// Sensor-power-minimal amplification and filter by alternation, then the
/// cheapest beamforming that powers it.
pub fn suboptimal_p2(cfg: &NetworkConfig, ch: &ChannelRealization, gamma: f64, stop: &StoppingRule) -> Result<BaselineOutcome> {
    cfg.validate()?;
    ch.validate(cfg)?;
    let bound = 1.0 / centralized_mse_bound(cfg);
    if !(gamma > 0.0) || gamma >= bound {
        return Err(CoreError::Infeasible(format!("target γ = {gamma} is not below {bound}")));
    }
    let start = crate::joint::default_init(cfg, ch);
    let mut v = optimal_filter(cfg, ch, &start)?;
    let (mut amp, mut power) = min_sensor_power_amp(cfg, ch, &v, gamma)?;
    let mut history = vec![power];
    let mut converged = false;
    let mut iterations = 1;
    while iterations < stop.max_iter {
        iterations += 1;
        let v_next = optimal_filter(cfg, ch, &amp)?;
        let (cand, value) = min_sensor_power_amp(cfg, ch, &v_next, gamma)?;
        if value > power {
            converged = true;
            break;
        }
        let change = (power - value) / power;
        amp = cand;
        power = value;
        v = v_next;
        history.push(value);
        if change < stop.rel_tol {
            converged = true;
            break;
        }
    }
    let w = min_power_beamforming(cfg, ch, &amp)?;
    let fc_power = w.trace().re;
    let mse = 1.0 / crate::model::quotient(cfg, ch, &amp, &v);
    Ok(BaselineOutcome {
        design: DesignPoint { amp, beam_gram: w, filter: v },
        mse,
        fc_power,
        iterations,
        converged,
        history,
    })
}
