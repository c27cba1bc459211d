//! System model: network parameters, channels, designs and the closed-form
//! energy, power and BLUE expressions.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;

/// Slot duration. All energies are per unit slot.
pub const SLOT: f64 = 1.0;

pub(crate) fn cplx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

fn default_tau() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub n_s: usize,
    pub n_r: usize,
    /// FC total transmit power in watts.
    pub total_power: f64,
    /// Source variance δθ².
    pub source_var: f64,
    pub sensing_vars: Vec<f64>,
    pub fc_noise_vars: Vec<f64>,
    pub harvest_eff: Vec<f64>,
    /// Circuit energy per slot, joules.
    pub circuit_energy: Vec<f64>,
    /// Fraction of the slot spent on energy transfer.
    #[serde(default = "default_tau")]
    pub tau: f64,
}

impl NetworkConfig {
    /// Homogeneous sensors and receive antennas.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        n_s: usize,
        n_r: usize,
        total_power: f64,
        source_var: f64,
        sensing_var: f64,
        fc_noise_var: f64,
        harvest_eff: f64,
        circuit_energy: f64,
    ) -> Self {
        Self {
            n_s,
            n_r,
            total_power,
            source_var,
            sensing_vars: vec![sensing_var; n_s],
            fc_noise_vars: vec![fc_noise_var; n_r],
            harvest_eff: vec![harvest_eff; n_s],
            circuit_energy: vec![circuit_energy; n_s],
            tau: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CoreError::InvalidArgument(m));
        if self.n_s == 0 || self.n_r == 0 {
            return bad("n_s and n_r must be positive".into());
        }
        if !(self.total_power > 0.0 && self.total_power.is_finite()) {
            return bad(format!("total power must be positive, got {}", self.total_power));
        }
        if !(self.source_var > 0.0 && self.source_var.is_finite()) {
            return bad("source variance must be positive".into());
        }
        if self.sensing_vars.len() != self.n_s
            || self.harvest_eff.len() != self.n_s
            || self.circuit_energy.len() != self.n_s
        {
            return bad("per-sensor vectors must have length n_s".into());
        }
        if self.fc_noise_vars.len() != self.n_r {
            return bad("fc_noise_vars must have length n_r".into());
        }
        if self.sensing_vars.iter().chain(&self.fc_noise_vars).any(|&v| !(v > 0.0 && v.is_finite())) {
            return bad("noise variances must be strictly positive".into());
        }
        if self.harvest_eff.iter().any(|&z| !(0.0..=1.0).contains(&z)) {
            return bad("harvesting efficiencies must lie in [0, 1]".into());
        }
        if self.circuit_energy.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
            return bad("circuit energies must be nonnegative".into());
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad("tau must lie in (0, 1)".into());
        }
        Ok(())
    }

    /// `δθ² + σ_k²`: transmit power per unit squared amplification.
    pub fn d(&self, k: usize) -> f64 {
        self.source_var + self.sensing_vars[k]
    }

    /// Transmit power obtained per unit of `tr(G_k W)`: `ζ_k τ / (1 − τ)`.
    pub fn harvest_gain(&self, k: usize) -> f64 {
        self.harvest_eff[k] * self.tau / (1.0 - self.tau)
    }

    /// Transmit power consumed by the circuit: `E_k / ((1 − τ) T)`.
    pub fn circuit_power(&self, k: usize) -> f64 {
        self.circuit_energy[k] / ((1.0 - self.tau) * SLOT)
    }

    pub fn noise(&self) -> NoiseMatrices {
        NoiseMatrices {
            r_s: DVector::from_vec(self.sensing_vars.clone()),
            r_n: DVector::from_vec(self.fc_noise_vars.clone()),
        }
    }
}

/// Diagonal covariances, stored as their diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMatrices {
    pub r_s: DVector<f64>,
    pub r_n: DVector<f64>,
}

impl NoiseMatrices {
    pub fn r_s_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.r_s)
    }

    pub fn r_n_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.r_n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Downlink vectors `g_k`, each of length `n_r`.
    pub g_down: Vec<CVec>,
    /// Uplink matrix `H`, `n_r × n_s`; column `k` is `h_k`.
    pub h_up: CMat,
}

impl ChannelRealization {
    pub fn validate(&self, cfg: &NetworkConfig) -> Result<()> {
        if self.g_down.len() != cfg.n_s || self.g_down.iter().any(|g| g.len() != cfg.n_r) {
            return Err(CoreError::InvalidArgument("downlink channels do not match n_s × n_r".into()));
        }
        if self.h_up.nrows() != cfg.n_r || self.h_up.ncols() != cfg.n_s {
            return Err(CoreError::InvalidArgument("uplink matrix is not n_r × n_s".into()));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !self.h_up.iter().all(finite) || !self.g_down.iter().all(|g| g.iter().all(finite)) {
            return Err(CoreError::InvalidArgument("channel entries must be finite".into()));
        }
        Ok(())
    }

    /// `G_k = g_k g_k†`.
    pub fn gram(&self, k: usize) -> CMat {
        &self.g_down[k] * self.g_down[k].adjoint()
    }

    /// `f_k = v† h_k`.
    pub fn effective_gains(&self, v: &CVec) -> CVec {
        (v.adjoint() * &self.h_up).transpose()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    pub amp: CVec,
    /// `W = Σ w_i w_i†`.
    pub beam_gram: CMat,
    pub filter: CVec,
}

impl DesignPoint {
    pub fn fc_power(&self) -> f64 {
        self.beam_gram.trace().re
    }

    /// Beams `w_i = sqrt(λ_i) u_i` for eigenvalues above `rel_tol · λ_max`.
    pub fn beams(&self, rel_tol: f64) -> Vec<CVec> {
        let eig = SymmetricEigen::new(self.beam_gram.clone());
        let lmax = eig.eigenvalues.max();
        let mut idx: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| eig.eigenvalues[i] > rel_tol * lmax && eig.eigenvalues[i] > 0.0)
            .collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        idx.iter()
            .map(|&i| eig.eigenvectors.column(i) * cplx(eig.eigenvalues[i].sqrt()))
            .collect()
    }
}

fn check_gram(cfg: &NetworkConfig, w: &CMat) -> Result<()> {
    if w.nrows() != cfg.n_r || w.ncols() != cfg.n_r {
        return Err(CoreError::InvalidArgument(format!(
            "beam Gram matrix is {}x{}, expected {n}x{n}",
            w.nrows(),
            w.ncols(),
            n = cfg.n_r
        )));
    }
    let scale = w.norm().max(f64::MIN_POSITIVE);
    if (w - w.adjoint()).norm() > 1e-9 * scale {
        return Err(CoreError::InvalidArgument("beam Gram matrix is not Hermitian".into()));
    }
    if cfg.n_r > 0 && w.norm() > 0.0 {
        let min = SymmetricEigen::new((w + w.adjoint()) * cplx(0.5)).eigenvalues.min();
        if min < -1e-9 * scale {
            return Err(CoreError::InvalidArgument(format!(
                "beam Gram matrix is not PSD (eigenvalue {min:.3e})"
            )));
        }
    }
    Ok(())
}

/// `g_k† W g_k`.
pub fn received_energy_power(ch: &ChannelRealization, w: &CMat, k: usize) -> f64 {
    let g = &ch.g_down[k];
    (g.adjoint() * w * g)[(0, 0)].re
}

/// Energy harvested by sensor `k` during the energy phase: `ζ_k τ T g_k† W g_k`.
pub fn harvested_energy(cfg: &NetworkConfig, ch: &ChannelRealization, beam_gram: &CMat, k: usize) -> Result<f64> {
    if k >= cfg.n_s {
        return Err(CoreError::InvalidArgument(format!("sensor index {k} out of range")));
    }
    ch.validate(cfg)?;
    check_gram(cfg, beam_gram)?;
    Ok(cfg.harvest_eff[k] * cfg.tau * SLOT * received_energy_power(ch, beam_gram, k).max(0.0))
}

/// Power available for transmission: `(E_k − E_k^cir) / ((1 − τ) T)`. May be negative.
pub fn available_transmit_power(cfg: &NetworkConfig, ch: &ChannelRealization, beam_gram: &CMat, k: usize) -> Result<f64> {
    let e = harvested_energy(cfg, ch, beam_gram, k)?;
    Ok((e - cfg.circuit_energy[k]) / ((1.0 - cfg.tau) * SLOT))
}

/// Unchecked form of [`available_transmit_power`] for inner loops.
pub(crate) fn budget(cfg: &NetworkConfig, ch: &ChannelRealization, w: &CMat, k: usize) -> f64 {
    cfg.harvest_gain(k) * received_energy_power(ch, w, k) - cfg.circuit_power(k)
}

/// `H A R_s A† H† + R_n`.
pub fn total_covariance(cfg: &NetworkConfig, ch: &ChannelRealization, amp: &CVec) -> CMat {
    let mut ha = ch.h_up.clone();
    for (k, mut col) in ha.column_iter_mut().enumerate() {
        col *= amp[k] * cplx(cfg.sensing_vars[k].sqrt());
    }
    let mut k = &ha * ha.adjoint();
    for j in 0..cfg.n_r {
        k[(j, j)] += cplx(cfg.fc_noise_vars[j]);
    }
    k
}

fn check_amp(cfg: &NetworkConfig, amp: &CVec) -> Result<()> {
    if amp.len() != cfg.n_s {
        return Err(CoreError::InvalidArgument(format!("amplification has length {}, expected {}", amp.len(), cfg.n_s)));
    }
    if amp.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(CoreError::InvalidArgument("amplification must be finite".into()));
    }
    Ok(())
}

/// `[ |v†Ha|² / v†(H A R_s A† H† + R_n)v ]⁻¹`.
pub fn blue_mse(cfg: &NetworkConfig, ch: &ChannelRealization, design: &DesignPoint) -> Result<f64> {
    check_amp(cfg, &design.amp)?;
    if design.filter.len() != cfg.n_r {
        return Err(CoreError::InvalidArgument("filter length must be n_r".into()));
    }
    ch.validate(cfg)?;
    let v = &design.filter;
    let ha = &ch.h_up * &design.amp;
    let signal = (v.adjoint() * &ha)[(0, 0)].norm_sqr();
    let scale = v.norm_squared() * ha.norm_squared();
    if !(signal > 1e-28 * scale) || signal == 0.0 {
        return Err(CoreError::DegenerateDesign("v†Ha = 0".into()));
    }
    let k = total_covariance(cfg, ch, &design.amp);
    let noise = (v.adjoint() * k * v)[(0, 0)].re;
    Ok(noise / signal)
}

/// `(H A R_s A† H† + R_n)⁻¹ H a`.
pub fn optimal_filter(cfg: &NetworkConfig, ch: &ChannelRealization, amp: &CVec) -> Result<CVec> {
    check_amp(cfg, amp)?;
    ch.validate(cfg)?;
    let k = total_covariance(cfg, ch, amp);
    let ha = &ch.h_up * amp;
    solve_hpd(&k, &ha, "total covariance")
}

/// `[a† H† (H A R_s A† H† + R_n)⁻¹ H a]⁻¹`.
pub fn mse_closed_form(cfg: &NetworkConfig, ch: &ChannelRealization, amp: &CVec) -> Result<f64> {
    let v = optimal_filter(cfg, ch, amp)?;
    let ha = &ch.h_up * amp;
    let q = (ha.adjoint() * v)[(0, 0)].re;
    if !(q > 0.0) {
        return Err(CoreError::DegenerateDesign("a†H†K⁻¹Ha = 0".into()));
    }
    Ok(1.0 / q)
}

/// Solves `K x = b` for Hermitian positive definite `K`, warning when
/// the condition number estimate exceeds 1e12.
pub(crate) fn solve_hpd(k: &CMat, b: &CVec, what: &str) -> Result<CVec> {
    let Some(chol) = Cholesky::new(k.clone()) else {
        return Err(CoreError::DegenerateDesign(format!("{what} is not positive definite")));
    };
    let l = chol.l();
    let diag: Vec<f64> = (0..l.nrows()).map(|i| l[(i, i)].norm_sqr()).collect();
    let hi = diag.iter().cloned().fold(0.0, f64::max);
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if hi / lo > 1e12 {
        log::warn!("{what}: condition number estimate {:.2e} exceeds 1e12", hi / lo);
    }
    Ok(chol.solve(b))
}

/// `|v†Ha|² / v†(H A R_s A† H† + R_n)v` (the inverse MSE), zero when `v†Ha = 0`.
pub fn quotient(cfg: &NetworkConfig, ch: &ChannelRealization, amp: &CVec, v: &CVec) -> f64 {
    let f = ch.effective_gains(v);
    let num = f.iter().zip(amp.iter()).map(|(f, a)| f * a).sum::<Complex64>().norm_sqr();
    let den: f64 = (0..cfg.n_s)
        .map(|k| f[k].norm_sqr() * amp[k].norm_sqr() * cfg.sensing_vars[k])
        .sum::<f64>()
        + v.iter().zip(&cfg.fc_noise_vars).map(|(z, s)| z.norm_sqr() * s).sum::<f64>();
    num / den
}

/// Equal-amplitude, zero-phase amplification meeting every positive budget
/// under isotropic beamforming `W = (P/n_r) I`. Sensors without a positive
/// budget are switched off.
pub fn isotropic_initial_amp(cfg: &NetworkConfig, ch: &ChannelRealization) -> CVec {
    let w = CMat::identity(cfg.n_r, cfg.n_r) * cplx(cfg.total_power / cfg.n_r as f64);
    let ratios: Vec<f64> = (0..cfg.n_s).map(|k| budget(cfg, ch, &w, k) / cfg.d(k)).collect();
    let alpha = ratios
        .iter()
        .filter(|&&r| r > 0.0)
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let alpha = if alpha.is_finite() { alpha.sqrt() } else { 0.0 };
    CVec::from_iterator(cfg.n_s, ratios.iter().map(|&r| cplx(if r > 0.0 { alpha } else { 0.0 })))
}

/// Largest per-sensor violation `|α_k|² d_k / budget_k − 1`, nonpositive when feasible.
pub fn causality_violation(cfg: &NetworkConfig, ch: &ChannelRealization, design: &DesignPoint) -> f64 {
    (0..cfg.n_s)
        .map(|k| {
            let used = design.amp[k].norm_sqr() * cfg.d(k);
            let avail = budget(cfg, ch, &design.beam_gram, k);
            if avail > 0.0 {
                used / avail - 1.0
            } else if used > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Per-sensor `(available power, transmit power)` in watts.
pub fn sensor_powers(cfg: &NetworkConfig, ch: &ChannelRealization, design: &DesignPoint) -> Vec<(f64, f64)> {
    (0..cfg.n_s)
        .map(|k| (budget(cfg, ch, &design.beam_gram, k), design.amp[k].norm_sqr() * cfg.d(k)))
        .collect()
}
