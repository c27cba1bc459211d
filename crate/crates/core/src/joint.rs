//! Alternating minimization for the multi-antenna FC: MSE minimization under
//! a total FC power budget ([`algorithm1`]) and FC power minimization under an
//! MSE target ([`algorithm2`]), each built around a tight semidefinite relaxation.

use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use wpt_sdp::{
    extract_rank_one, solve, LinearFunctional, Relation, SdpProblem, SdpSolution, Sense, SolveStatus,
    ToleranceSet,
};

use crate::error::{CoreError, Result};
use crate::model::{
    blue_mse, budget, cplx, isotropic_initial_amp, optimal_filter, quotient, sensor_powers, CMat, CVec,
    ChannelRealization, DesignPoint, NetworkConfig,
};

pub const Q_BLOCK: usize = 0;
pub const W_BLOCK: usize = 1;
pub const ETA: usize = 0;
/// Default threshold on the rank-one residual of the amplification block.
pub const RANK_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self { rel_tol: 1e-6, max_iter: 50 }
    }
}

/// Relaxation data for a fixed receive filter. The quotient is invariant to
/// the scale of `v`, which is normalized so that `c = v† R_n v = 1`; this keeps
/// `η` of order one whatever the channel and noise magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Sdr1Data {
    pub f: CVec,
    /// `Σ = f f†`.
    pub sigma: CMat,
    /// Diagonal of `Ψ = F R_s F†`.
    pub psi: DVector<f64>,
    /// Diagonal entries `δθ² + σ_k²` of the `D_k`.
    pub d: Vec<f64>,
    pub grams: Vec<CMat>,
    pub gains: Vec<f64>,
    pub circuit: Vec<f64>,
    /// `c = v† R_n v`, one after normalization.
    pub c: f64,
    pub power: f64,
    pub filter: CVec,
}

impl Sdr1Data {
    pub fn new(cfg: &NetworkConfig, ch: &ChannelRealization, v: &CVec) -> Result<Self> {
        cfg.validate()?;
        ch.validate(cfg)?;
        if v.len() != cfg.n_r {
            return Err(CoreError::InvalidArgument("receive filter must have length n_r".into()));
        }
        let noise: f64 = v.iter().zip(&cfg.fc_noise_vars).map(|(z, s)| z.norm_sqr() * s).sum();
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(CoreError::InvalidArgument("receive filter must be nonzero and finite".into()));
        }
        let v = v / cplx(noise.sqrt());
        let f = ch.effective_gains(&v);
        let sigma = &f * f.adjoint();
        let psi = DVector::from_fn(cfg.n_s, |k, _| f[k].norm_sqr() * cfg.sensing_vars[k]);
        let c = 1.0;
        Ok(Self {
            f,
            sigma,
            psi,
            d: (0..cfg.n_s).map(|k| cfg.d(k)).collect(),
            grams: (0..cfg.n_s).map(|k| ch.gram(k)).collect(),
            gains: (0..cfg.n_s).map(|k| cfg.harvest_gain(k)).collect(),
            circuit: (0..cfg.n_s).map(|k| cfg.circuit_power(k)).collect(),
            c,
            power: cfg.total_power,
            filter: v,
        })
    }

    pub fn n_s(&self) -> usize {
        self.d.len()
    }

    pub fn n_r(&self) -> usize {
        self.filter.len()
    }

    fn psi_matrix(&self) -> CMat {
        CMat::from_diagonal(&self.psi.map(cplx))
    }

    fn d_matrix(&self, k: usize) -> CMat {
        let mut m = CMat::zeros(self.n_s(), self.n_s());
        m[(k, k)] = cplx(self.d[k]);
        m
    }

    /// maximize `tr(Q̄Σ)` s.t. `tr(Q̄Ψ) + ηc = 1`,
    /// `tr(D_k Q̄) − g_k tr(G_k W̄) + p_k η ≤ 0`, `tr(W̄) − Pη ≤ 0`.
    pub fn problem(&self) -> SdpProblem {
        let (ns, nr) = (self.n_s(), self.n_r());
        let mut p = SdpProblem::new(Sense::Maximize);
        let q = p.add_block(ns);
        let w = p.add_block(nr);
        let eta = p.add_scalar();
        p.set_objective(LinearFunctional::new().block(q, self.sigma.clone()));
        p.add_constraint(
            LinearFunctional::new().block(q, self.psi_matrix()).scalar(eta, self.c),
            Relation::Eq,
            1.0,
        );
        for k in 0..ns {
            let mut lhs = LinearFunctional::new()
                .block(q, self.d_matrix(k))
                .block(w, &self.grams[k] * cplx(-self.gains[k]));
            if self.circuit[k] != 0.0 {
                lhs = lhs.scalar(eta, self.circuit[k]);
            }
            p.add_constraint(lhs, Relation::Le, 0.0);
        }
        p.add_constraint(
            LinearFunctional::new().block(w, CMat::identity(nr, nr)).scalar(eta, -self.power),
            Relation::Le,
            0.0,
        );
        p
    }

    /// minimize `tr(W)` s.t. `tr(Q(Σ − γΨ)) = γc`, `tr(D_k Q) − g_k tr(G_k W) ≤ −p_k`.
    pub fn power_problem(&self, gamma: f64) -> SdpProblem {
        let (ns, nr) = (self.n_s(), self.n_r());
        let mut p = SdpProblem::new(Sense::Minimize);
        let q = p.add_block(ns);
        let w = p.add_block(nr);
        p.set_objective(LinearFunctional::new().block(w, CMat::identity(nr, nr)));
        p.add_constraint(
            LinearFunctional::new().block(q, &self.sigma - self.psi_matrix() * cplx(gamma)),
            Relation::Eq,
            gamma * self.c,
        );
        for k in 0..ns {
            p.add_constraint(
                LinearFunctional::new()
                    .block(q, self.d_matrix(k))
                    .block(w, &self.grams[k] * cplx(-self.gains[k])),
                Relation::Le,
                -self.circuit[k],
            );
        }
        p
    }
}

pub fn build_sdr1(cfg: &NetworkConfig, ch: &ChannelRealization, v: &CVec) -> Result<SdpProblem> {
    Ok(Sdr1Data::new(cfg, ch, v)?.problem())
}

pub fn build_sdr2(cfg: &NetworkConfig, ch: &ChannelRealization, v: &CVec, gamma: f64) -> Result<SdpProblem> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(CoreError::InvalidArgument("gamma must be positive".into()));
    }
    Ok(Sdr1Data::new(cfg, ch, v)?.power_problem(gamma))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub amp: CVec,
    pub beam_gram: CMat,
    pub rank_one_residual: f64,
    /// Charnes-Cooper scale `η*`; one for the power problem.
    pub eta: f64,
}

fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * cplx(0.5)
}

fn recover(sol: &SdpSolution, eta: f64, rank_tol: f64) -> Result<Recovery> {
    if sol.status != SolveStatus::Optimal {
        return Err(CoreError::Solver(sol.status));
    }
    if !(eta > 0.0) {
        return Err(CoreError::CertificateFailure(format!("η* = {eta:e} is not positive")));
    }
    let q = &sol.blocks[Q_BLOCK] / cplx(eta);
    let r1 = extract_rank_one(&q, 1e-9)?;
    if r1.residual > rank_tol {
        return Err(CoreError::CertificateFailure(format!(
            "rank-one residual {:.3e} exceeds {rank_tol:.1e}",
            r1.residual
        )));
    }
    Ok(Recovery {
        amp: r1.vector.map(|z| z.conj()),
        beam_gram: hermitian_part(&(&sol.blocks[W_BLOCK] / cplx(eta))),
        rank_one_residual: r1.residual,
        eta,
    })
}

/// `a = conj(rank-one factor of Q̄*/η*)`, `W = W̄*/η*`.
pub fn recover_from_sdr1(sol: &SdpSolution, rank_tol: f64) -> Result<Recovery> {
    let eta = sol.scalars.get(ETA).cloned().unwrap_or(0.0);
    recover(sol, eta, rank_tol)
}

/// `a = conj(rank-one factor of Q*)`, `W = W*`.
pub fn recover_from_sdr2(sol: &SdpSolution, rank_tol: f64) -> Result<Recovery> {
    recover(sol, 1.0, rank_tol)
}

/// Removes solver-precision violations: clamps `tr W` to `P` (when given)
/// and each `|α_k|² d_k` to its budget.
pub(crate) fn clip_to_budgets(cfg: &NetworkConfig, ch: &ChannelRealization, amp: &mut CVec, w: &mut CMat, total: Option<f64>) {
    if let Some(p) = total {
        let tr = w.trace().re;
        if tr > p {
            *w *= cplx(p / tr);
        }
    }
    for k in 0..cfg.n_s {
        let used = amp[k].norm_sqr() * cfg.d(k);
        let avail = budget(cfg, ch, w, k).max(0.0);
        if used > avail {
            amp[k] *= cplx(if used > 0.0 { (avail / used).sqrt() } else { 0.0 });
        }
    }
}

/// Scales `W` up until every sensor budget covers its transmit power.
pub(crate) fn raise_to_budgets(cfg: &NetworkConfig, ch: &ChannelRealization, amp: &CVec, w: &mut CMat) {
    let mut factor: f64 = 1.0;
    for k in 0..cfg.n_s {
        let need = amp[k].norm_sqr() * cfg.d(k) + cfg.circuit_power(k);
        let have = cfg.harvest_gain(k) * crate::model::received_energy_power(ch, w, k);
        if need > 0.0 && have > 0.0 {
            factor = factor.max(need / have);
        }
    }
    if factor > 1.0 {
        *w *= cplx(factor);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    MaxIterations,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Inverse MSE for MSE minimization, FC power for power minimization,
    /// of the design held after this iteration.
    pub objective: f64,
    pub mse: f64,
    pub fc_power: f64,
    /// Optimal value of the relaxation solved in this iteration.
    pub sdr_value: f64,
    pub sdp_status: SolveStatus,
    pub sdp_iterations: usize,
    pub rank_one_residual: f64,
    /// False when the iteration's candidate did not improve the objective and
    /// the previous design was kept.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub initial_objective: f64,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub status: RunStatus,
    pub iterations: usize,
    pub design: DesignPoint,
    pub mse: f64,
    pub fc_power: f64,
    /// Per sensor `(available, transmit)` power in watts.
    pub sensor_powers: Vec<(f64, f64)>,
    /// Relaxation solution behind the final design.
    pub last_solution: Option<SdpSolution>,
    pub last_problem: Option<SdpProblem>,
}

impl RunTrace {
    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }
}

fn relative_change(new: f64, old: f64) -> f64 {
    (new - old).abs() / old.abs().max(f64::MIN_POSITIVE)
}

fn check_init(cfg: &NetworkConfig, ch: &ChannelRealization, init: &CVec) -> Result<()> {
    cfg.validate()?;
    ch.validate(cfg)?;
    if init.len() != cfg.n_s {
        return Err(CoreError::InvalidArgument("initial amplification must have length n_s".into()));
    }
    if (&ch.h_up * init).norm() == 0.0 {
        return Err(CoreError::DegenerateDesign("initial amplification gives Ha = 0".into()));
    }
    Ok(())
}

/// MSE minimization: alternate the optimal filter with the relaxation in `(a, W)`.
///
/// The trace records the inverse MSE of the held design, which can only
/// increase: a candidate that fails to improve (possible only at solver
/// precision) is rejected and the run stops as converged.
pub fn algorithm1(cfg: &NetworkConfig, ch: &ChannelRealization, init: &CVec, stop: &StoppingRule) -> Result<RunTrace> {
    algorithm1_with(cfg, ch, init, stop, &ToleranceSet::default(), RANK_TOL)
}

pub fn algorithm1_with(
    cfg: &NetworkConfig,
    ch: &ChannelRealization,
    init: &CVec,
    stop: &StoppingRule,
    tol: &ToleranceSet,
    rank_tol: f64,
) -> Result<RunTrace> {
    check_init(cfg, ch, init)?;
    if stop.max_iter == 0 {
        return Err(CoreError::InvalidArgument("max_iter must be at least 1".into()));
    }
    let w0 = CMat::identity(cfg.n_r, cfg.n_r) * cplx(cfg.total_power / cfg.n_r as f64);
    let mut amp = init.clone();
    let mut w = w0;
    let mut v = optimal_filter(cfg, ch, &amp)?;
    let initial_objective = quotient(cfg, ch, &amp, &v);
    let mut objective = initial_objective;
    let mut records = Vec::new();
    let mut status = RunStatus::MaxIterations;
    let mut last_solution = None;
    let mut last_problem = None;

    for it in 1..=stop.max_iter {
        let problem = build_sdr1(cfg, ch, &v)?;
        let sol = solve(&problem, tol)?;
        if sol.status != SolveStatus::Optimal {
            log::warn!("algorithm 1: relaxation ended with {:?} at iteration {it}", sol.status);
            status = RunStatus::NumericalFailure;
            records.push(failed_record(it, objective, &amp, &w, &v, cfg, ch, &sol));
            break;
        }
        let rec = recover_from_sdr1(&sol, rank_tol)?;
        let mut cand_amp = rec.amp.clone();
        let mut cand_w = rec.beam_gram.clone();
        clip_to_budgets(cfg, ch, &mut cand_amp, &mut cand_w, Some(cfg.total_power));
        let cand_v = optimal_filter(cfg, ch, &cand_amp)?;
        let cand_obj = quotient(cfg, ch, &cand_amp, &cand_v);
        let accepted = cand_obj >= objective;
        let previous = objective;
        if accepted {
            amp = cand_amp;
            w = cand_w;
            v = cand_v;
            objective = cand_obj;
            last_solution = Some(sol.clone());
            last_problem = Some(problem);
        }
        records.push(IterationRecord {
            iteration: it,
            objective,
            mse: 1.0 / objective,
            fc_power: w.trace().re,
            sdr_value: sol.primal_objective,
            sdp_status: sol.status,
            sdp_iterations: sol.iterations,
            rank_one_residual: rec.rank_one_residual,
            accepted,
        });
        if !accepted || relative_change(objective, previous) < stop.rel_tol {
            status = RunStatus::Converged;
            break;
        }
    }
    finish(cfg, ch, initial_objective, records, status, amp, w, v, last_solution, last_problem)
}

#[allow(clippy::too_many_arguments)]
fn failed_record(
    it: usize,
    objective: f64,
    amp: &CVec,
    w: &CMat,
    v: &CVec,
    cfg: &NetworkConfig,
    ch: &ChannelRealization,
    sol: &SdpSolution,
) -> IterationRecord {
    let mse = 1.0 / quotient(cfg, ch, amp, v);
    IterationRecord {
        iteration: it,
        objective,
        mse,
        fc_power: w.trace().re,
        sdr_value: f64::NAN,
        sdp_status: sol.status,
        sdp_iterations: sol.iterations,
        rank_one_residual: f64::NAN,
        accepted: false,
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    cfg: &NetworkConfig,
    ch: &ChannelRealization,
    initial_objective: f64,
    records: Vec<IterationRecord>,
    status: RunStatus,
    amp: CVec,
    w: CMat,
    v: CVec,
    last_solution: Option<SdpSolution>,
    last_problem: Option<SdpProblem>,
) -> Result<RunTrace> {
    let design = DesignPoint { amp, beam_gram: w, filter: v };
    let mse = blue_mse(cfg, ch, &design)?;
    Ok(RunTrace {
        initial_objective,
        iterations: records.len(),
        converged: status == RunStatus::Converged,
        records,
        status,
        fc_power: design.fc_power(),
        sensor_powers: sensor_powers(cfg, ch, &design),
        design,
        mse,
        last_solution,
        last_problem,
    })
}

/// Runs [`algorithm1`] from each start and keeps the lowest final MSE.
pub fn algorithm1_multistart(
    cfg: &NetworkConfig,
    ch: &ChannelRealization,
    inits: &[CVec],
    stop: &StoppingRule,
) -> Result<RunTrace> {
    best_of(inits.iter().map(|a| algorithm1(cfg, ch, a, stop)), |t| t.mse)
}

fn best_of(runs: impl Iterator<Item = Result<RunTrace>>, key: impl Fn(&RunTrace) -> f64) -> Result<RunTrace> {
    let mut best: Option<RunTrace> = None;
    let mut last_err = None;
    for r in runs {
        match r {
            Ok(t) => {
                if best.as_ref().is_none_or(|b| key(&t) < key(b)) {
                    best = Some(t);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| CoreError::InvalidArgument("no starting points".into())))
}

/// Default start for both algorithms.
pub fn default_init(cfg: &NetworkConfig, ch: &ChannelRealization) -> CVec {
    isotropic_initial_amp(cfg, ch)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaCheck {
    pub feasible: bool,
    /// `1ᵀ R_s⁻¹ 1`.
    pub bound: f64,
    /// `bound − γ`.
    pub margin: f64,
    /// FC power of a trial relaxation solve when the bound holds.
    pub trial_power: Option<f64>,
}

/// Necessary condition `γ < 1ᵀR_s⁻¹1`, confirmed by a trial power-minimization solve.
pub fn check_gamma_feasible(cfg: &NetworkConfig, ch: &ChannelRealization, gamma: f64) -> GammaCheck {
    let bound: f64 = cfg.sensing_vars.iter().map(|s| 1.0 / s).sum();
    let margin = bound - gamma;
    let mut check = GammaCheck { feasible: false, bound, margin, trial_power: None };
    if !(gamma > 0.0) || margin <= 0.0 {
        return check;
    }
    let trial = (|| -> Result<f64> {
        let v = optimal_filter(cfg, ch, &default_init(cfg, ch))?;
        let sol = solve(&build_sdr2(cfg, ch, &v, gamma)?, &ToleranceSet::default())?;
        if sol.status == SolveStatus::Optimal {
            Ok(sol.primal_objective)
        } else {
            Err(CoreError::Solver(sol.status))
        }
    })();
    if let Ok(p) = trial {
        check.feasible = true;
        check.trial_power = Some(p);
    }
    check
}

/// Power minimization: alternate the optimal filter with the power-minimizing relaxation.
///
/// The final design keeps the filter used in the last relaxation so that
/// the MSE target holds with equality.
pub fn algorithm2(
    cfg: &NetworkConfig,
    ch: &ChannelRealization,
    gamma: f64,
    init: &CVec,
    stop: &StoppingRule,
) -> Result<RunTrace> {
    algorithm2_with(cfg, ch, gamma, init, stop, &ToleranceSet::default(), RANK_TOL)
}

#[allow(clippy::too_many_arguments)]
pub fn algorithm2_with(
    cfg: &NetworkConfig,
    ch: &ChannelRealization,
    gamma: f64,
    init: &CVec,
    stop: &StoppingRule,
    tol: &ToleranceSet,
    rank_tol: f64,
) -> Result<RunTrace> {
    check_init(cfg, ch, init)?;
    if stop.max_iter == 0 {
        return Err(CoreError::InvalidArgument("max_iter must be at least 1".into()));
    }
    let bound: f64 = cfg.sensing_vars.iter().map(|s| 1.0 / s).sum();
    if !(gamma > 0.0) || gamma >= bound {
        return Err(CoreError::Infeasible(format!(
            "target γ = {gamma} is not below the centralized limit {bound}"
        )));
    }
    let mut v_next = optimal_filter(cfg, ch, init)?;
    let mut held: Option<(CVec, CMat, CVec)> = None;
    let mut objective = f64::INFINITY;
    let mut records = Vec::new();
    let mut status = RunStatus::MaxIterations;
    let mut last_solution = None;
    let mut last_problem = None;

    for it in 1..=stop.max_iter {
        let problem = build_sdr2(cfg, ch, &v_next, gamma)?;
        let sol = solve(&problem, tol)?;
        if sol.status != SolveStatus::Optimal {
            if held.is_none() {
                return Err(match sol.status {
                    SolveStatus::Infeasible => CoreError::Infeasible(format!("MSE target γ = {gamma} is unreachable")),
                    s => CoreError::Solver(s),
                });
            }
            log::warn!("algorithm 2: relaxation ended with {:?} at iteration {it}", sol.status);
            status = RunStatus::NumericalFailure;
            records.push(IterationRecord {
                iteration: it,
                objective,
                mse: 1.0 / gamma,
                fc_power: objective,
                sdr_value: f64::NAN,
                sdp_status: sol.status,
                sdp_iterations: sol.iterations,
                rank_one_residual: f64::NAN,
                accepted: false,
            });
            break;
        }
        let rec = recover_from_sdr2(&sol, rank_tol)?;
        let amp = rec.amp.clone();
        let mut w = rec.beam_gram.clone();
        raise_to_budgets(cfg, ch, &amp, &mut w);
        let power = w.trace().re;
        let accepted = power <= objective;
        let previous = objective;
        let used_v = v_next.clone();
        if accepted {
            v_next = optimal_filter(cfg, ch, &amp)?;
            held = Some((amp, w, used_v.clone()));
            objective = power;
            last_solution = Some(sol.clone());
            last_problem = Some(problem);
        }
        let mse = held
            .as_ref()
            .map(|(a, _, v)| 1.0 / quotient(cfg, ch, a, v))
            .unwrap_or(f64::NAN);
        records.push(IterationRecord {
            iteration: it,
            objective,
            mse,
            fc_power: objective,
            sdr_value: sol.primal_objective,
            sdp_status: sol.status,
            sdp_iterations: sol.iterations,
            rank_one_residual: rec.rank_one_residual,
            accepted,
        });
        if !accepted || (previous.is_finite() && relative_change(objective, previous) < stop.rel_tol) {
            status = RunStatus::Converged;
            break;
        }
    }
    let (amp, w, v) = held.expect("first iteration accepted");
    let initial_objective = records.first().map(|r| r.objective).unwrap_or(f64::NAN);
    finish(cfg, ch, initial_objective, records, status, amp, w, v, last_solution, last_problem)
}

/// Runs [`algorithm2`] from each start and keeps the lowest FC power.
pub fn algorithm2_multistart(
    cfg: &NetworkConfig,
    ch: &ChannelRealization,
    gamma: f64,
    inits: &[CVec],
    stop: &StoppingRule,
) -> Result<RunTrace> {
    best_of(inits.iter().map(|a| algorithm2(cfg, ch, gamma, a, stop)), |t| t.fc_power)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SdrKind {
    /// MSE minimization relaxation with FC budget `total_power`.
    Sdr1 { total_power: f64 },
    /// Power minimization relaxation.
    Sdr2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub kind: SdrKind,
    pub status: SolveStatus,
    /// Multiplier of the normalization / MSE equality.
    pub nu: f64,
    /// Per-sensor multipliers, nonnegative by convention.
    pub lambdas: Vec<f64>,
    /// Multiplier of the total-power constraint (MSE relaxation only).
    pub beta: Option<f64>,
    pub duality_gap: f64,
    pub q_rank_one_residual: f64,
    pub w_rank: usize,
    pub w_rank_bound: usize,
    /// `|tr(Q̄Y)|` relative to the optimal value.
    pub complementarity_q: f64,
    /// `|tr(W̄Z)|` relative to the optimal value.
    pub complementarity_w: f64,
    /// Smallest eigenvalue of `Y` and `Z`, each relative to its norm.
    pub min_dual_eig_q: f64,
    pub min_dual_eig_w: f64,
    /// `|tr(W̄*) − η*P| / η*`, i.e. the unused FC power in watts.
    pub power_slack: Option<f64>,
    /// Sensors whose causality constraint has relative slack above 1e-6.
    pub inactive_sensors: Vec<usize>,
}

impl CertificateReport {
    pub fn rank_ok(&self) -> bool {
        self.w_rank <= self.w_rank_bound
    }
}

/// Relative eigenvalue threshold for the numerical rank of `W̄*`.
pub const W_RANK_TOL: f64 = 1e-6;

fn relative_product(x: &CMat, s: &CMat, sol: &SdpSolution) -> f64 {
    wpt_sdp::inner(x, s).abs() / (1e-10 + sol.primal_objective.abs().max(sol.dual_objective.abs()))
}

fn relative_min_eig(m: &CMat) -> f64 {
    let n = m.norm();
    if n == 0.0 {
        return 0.0;
    }
    SymmetricEigen::new(hermitian_part(m)).eigenvalues.min() / n
}

/// Numerical checks of the optimality structure of a relaxation solution:
/// dual signs, ranks, complementary slackness and power tightness.
pub fn verify_certificates(problem: &SdpProblem, sol: &SdpSolution, which: SdrKind) -> CertificateReport {
    let ns = problem.block_dims[Q_BLOCK];
    let nr = problem.block_dims[W_BLOCK];
    let (lambdas, beta, power_slack) = match which {
        SdrKind::Sdr1 { total_power } => {
            let eta = sol.scalars[ETA];
            let slack = (sol.blocks[W_BLOCK].trace().re - eta * total_power).abs() / eta;
            (sol.duals[1..=ns].to_vec(), Some(sol.duals[ns + 1]), Some(slack))
        }
        SdrKind::Sdr2 => (sol.duals[1..=ns].iter().map(|d| -d).collect(), None, None),
    };
    let q_rank_one_residual = extract_rank_one(&sol.blocks[Q_BLOCK], 1e-9).map(|r| r.residual).unwrap_or(f64::NAN);
    let weig = SymmetricEigen::new(hermitian_part(&sol.blocks[W_BLOCK])).eigenvalues;
    let wmax = weig.max();
    let w_rank = weig.iter().filter(|&&l| l > W_RANK_TOL * wmax).count();
    let inactive_sensors = (0..ns)
        .filter(|&k| {
            let con = &problem.constraints[1 + k];
            let mut scale = 0.0;
            for (b, m) in &con.lhs.blocks {
                scale += wpt_sdp::inner(m, &sol.blocks[*b]).abs();
            }
            for (s, c) in &con.lhs.scalars {
                scale += (c * sol.scalars[*s]).abs();
            }
            scale += con.rhs.abs();
            scale > 0.0 && sol.slacks[1 + k] > 1e-6 * scale
        })
        .collect();
    CertificateReport {
        kind: which,
        status: sol.status,
        nu: sol.duals[0],
        lambdas,
        beta,
        duality_gap: sol.duality_gap,
        q_rank_one_residual,
        w_rank,
        w_rank_bound: ns.min(nr),
        complementarity_q: relative_product(&sol.blocks[Q_BLOCK], &sol.dual_blocks[Q_BLOCK], sol),
        complementarity_w: relative_product(&sol.blocks[W_BLOCK], &sol.dual_blocks[W_BLOCK], sol),
        min_dual_eig_q: relative_min_eig(&sol.dual_blocks[Q_BLOCK]),
        min_dual_eig_w: relative_min_eig(&sol.dual_blocks[W_BLOCK]),
        power_slack,
        inactive_sensors,
    }
}
