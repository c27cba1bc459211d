//! Closed-form and reduced-complexity cases: the centralized benchmark, the
//! single-antenna FC, and sensors sharing one energy harvester.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use wpt_sdp::{extract_rank_one, solve, LinearFunctional, Relation, SdpProblem, Sense, SolveStatus, ToleranceSet};

use crate::error::{CoreError, Result};
use crate::joint::{Sdr1Data, RANK_TOL};
use crate::model::{cplx, optimal_filter, quotient, CMat, CVec, ChannelRealization, NetworkConfig};

/// `[1ᵀ R_s⁻¹ 1]⁻¹`, the MSE when every observation reaches the FC noiselessly.
pub fn centralized_mse_bound(cfg: &NetworkConfig) -> f64 {
    1.0 / cfg.sensing_vars.iter().map(|s| 1.0 / s).sum::<f64>()
}

fn require_single_antenna(cfg: &NetworkConfig, ch: &ChannelRealization) -> Result<()> {
    cfg.validate()?;
    ch.validate(cfg)?;
    if cfg.n_r != 1 {
        return Err(CoreError::InvalidArgument(format!("single-antenna FC expected, n_r = {}", cfg.n_r)));
    }
    if ch.h_up.iter().all(|h| h.norm_sqr() == 0.0) {
        return Err(CoreError::DegenerateDesign("uplink channel is zero".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleAntennaSolution {
    pub amp: CVec,
    pub mse: f64,
    /// FC power: the budget for MSE minimization, the minimizer for power minimization.
    pub power: f64,
    pub rank_one_residual: f64,
    pub sdp_iterations: usize,
}

/// Largest-eigenvalue QCRQ relaxation for fixed per-sensor budgets `b_k`:
/// maximize `tr(PΞ)` s.t. `tr(PC) = 1`, `tr(P D̄_k) ≤ 0`, with
/// `P = t²[â*; 1][âᵀ 1]` and `a = s â`. The amplitude scale `s` keeps the
/// two parts of `P` commensurate.
pub(crate) fn fixed_budget_problem(data: &Sdr1Data, budgets: &[f64]) -> (SdpProblem, f64) {
    let ns = data.n_s();
    let s2 = (0..ns)
        .filter(|&k| budgets[k] > 0.0)
        .map(|k| budgets[k] / data.d[k])
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut xi = CMat::zeros(ns + 1, ns + 1);
    let mut c = CMat::zeros(ns + 1, ns + 1);
    xi.view_mut((0, 0), (ns, ns)).copy_from(&(&data.sigma * cplx(s2)));
    for k in 0..ns {
        c[(k, k)] = cplx(s2 * data.psi[k]);
    }
    c[(ns, ns)] = cplx(data.c);
    let mut p = SdpProblem::new(Sense::Maximize);
    let b = p.add_block(ns + 1);
    p.set_objective(LinearFunctional::new().block(b, xi));
    p.add_constraint(LinearFunctional::new().block(b, c), Relation::Eq, 1.0);
    for k in 0..ns {
        let norm = if budgets[k] > 0.0 { budgets[k] } else { s2 * data.d[k] };
        let mut dk = CMat::zeros(ns + 1, ns + 1);
        dk[(k, k)] = cplx(s2 * data.d[k] / norm);
        dk[(ns, ns)] = cplx(-budgets[k].max(0.0) / norm);
        p.add_constraint(LinearFunctional::new().block(b, dk), Relation::Le, 0.0);
    }
    (p, s2.sqrt())
}

/// Solves the fixed-budget relaxation and returns `(a, residual, iterations)`.
/// Only the leading `n_s` block is rank one in general; `t²` is read off the corner.
pub(crate) fn solve_fixed_budget(data: &Sdr1Data, budgets: &[f64]) -> Result<(CVec, f64, usize)> {
    let ns = data.n_s();
    let (problem, scale) = fixed_budget_problem(data, budgets);
    let sol = solve(&problem, &ToleranceSet::default())?;
    if sol.status != SolveStatus::Optimal {
        return Err(CoreError::Solver(sol.status));
    }
    let block = &sol.blocks[0];
    let t = block[(ns, ns)].re;
    if !(t > 0.0) {
        return Err(CoreError::DegenerateDesign("relaxation returned t = 0".into()));
    }
    let top = block.view((0, 0), (ns, ns)).into_owned();
    let r1 = extract_rank_one(&top, 1e-9)?;
    if r1.residual > RANK_TOL {
        return Err(CoreError::CertificateFailure(format!(
            "fixed-budget relaxation has rank-one residual {:.3e}",
            r1.residual
        )));
    }
    let mut amp = r1.vector.map(|z| z.conj() * (scale / t.sqrt()));
    for k in 0..ns {
        let cap = budgets[k].max(0.0) / data.d[k];
        if amp[k].norm_sqr() > cap {
            let shrink = cplx((cap / amp[k].norm_sqr()).sqrt());
            amp[k] *= shrink;
        }
    }
    Ok((amp, r1.residual, sol.iterations))
}

fn single_antenna_budgets(cfg: &NetworkConfig, ch: &ChannelRealization, power: f64) -> Result<Vec<f64>> {
    let budgets: Vec<f64> = (0..cfg.n_s)
        .map(|k| cfg.harvest_gain(k) * power * ch.g_down[k][0].norm_sqr() - cfg.circuit_power(k))
        .collect();
    if let Some(k) = budgets.iter().position(|&b| b < 0.0) {
        return Err(CoreError::Infeasible(format!("sensor {k} cannot cover its circuit power")));
    }
    Ok(budgets)
}

/// Globally optimal amplification for a single-antenna FC transmitting at full power.
pub fn single_antenna_mse_min(cfg: &NetworkConfig, ch: &ChannelRealization) -> Result<SingleAntennaSolution> {
    require_single_antenna(cfg, ch)?;
    let budgets = single_antenna_budgets(cfg, ch, cfg.total_power)?;
    let v = CVec::from_element(1, cplx(1.0));
    let data = Sdr1Data::new(cfg, ch, &v)?;
    let (amp, residual, iterations) = solve_fixed_budget(&data, &budgets)?;
    let q = quotient(cfg, ch, &amp, &v);
    if !(q > 0.0) {
        return Err(CoreError::DegenerateDesign("all amplifications vanish".into()));
    }
    Ok(SingleAntennaSolution { amp, mse: 1.0 / q, power: cfg.total_power, rank_one_residual: residual, sdp_iterations: iterations })
}

/// Globally minimal FC power for a single-antenna FC meeting `1/mse ≥ gamma`.
pub fn single_antenna_power_min(cfg: &NetworkConfig, ch: &ChannelRealization, gamma: f64) -> Result<SingleAntennaSolution> {
    require_single_antenna(cfg, ch)?;
    let bound = 1.0 / centralized_mse_bound(cfg);
    if !(gamma > 0.0) || gamma >= bound {
        return Err(CoreError::Infeasible(format!("target γ = {gamma} is not below {bound}")));
    }
    let v = CVec::from_element(1, cplx(1.0));
    let data = Sdr1Data::new(cfg, ch, &v)?;
    let ns = cfg.n_s;
    let mut p = SdpProblem::new(Sense::Minimize);
    let q = p.add_block(ns);
    let pw = p.add_scalar();
    p.set_objective(LinearFunctional::new().scalar(pw, 1.0));
    let psi = CMat::from_diagonal(&data.psi.map(cplx));
    p.add_constraint(
        LinearFunctional::new().block(q, &data.sigma - psi * cplx(gamma)),
        Relation::Eq,
        gamma * data.c,
    );
    for k in 0..ns {
        let mut dk = CMat::zeros(ns, ns);
        dk[(k, k)] = cplx(cfg.d(k));
        p.add_constraint(
            LinearFunctional::new()
                .block(q, dk)
                .scalar(pw, -cfg.harvest_gain(k) * ch.g_down[k][0].norm_sqr()),
            Relation::Le,
            -cfg.circuit_power(k),
        );
    }
    let sol = solve(&p, &ToleranceSet::default())?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(CoreError::Infeasible(format!("target γ = {gamma} is unreachable"))),
        s => return Err(CoreError::Solver(s)),
    }
    let r1 = extract_rank_one(&sol.blocks[q], 1e-9)?;
    if r1.residual > RANK_TOL {
        return Err(CoreError::CertificateFailure(format!("rank-one residual {:.3e}", r1.residual)));
    }
    let amp = r1.vector.map(|z| z.conj());
    let mut power = sol.scalars[pw];
    for k in 0..ns {
        let need = (amp[k].norm_sqr() * cfg.d(k) + cfg.circuit_power(k)) / (cfg.harvest_gain(k) * ch.g_down[k][0].norm_sqr());
        power = power.max(need);
    }
    let mse = 1.0 / quotient(cfg, ch, &amp, &v);
    Ok(SingleAntennaSolution { amp, mse, power, rank_one_residual: r1.residual, sdp_iterations: sol.iterations })
}

/// Sensors powered by one single-antenna harvester with FC channel `h_e`,
/// under the sum constraint `a†Da ≤ |w†h_e|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonHarvesterConfig {
    pub net: NetworkConfig,
    pub h_e: CVec,
}

impl CommonHarvesterConfig {
    pub fn validate(&self) -> Result<()> {
        self.net.validate()?;
        if self.h_e.len() != self.net.n_r {
            return Err(CoreError::InvalidArgument("h_e must have length n_r".into()));
        }
        if !(self.h_e.norm() > 0.0) {
            return Err(CoreError::InvalidArgument("h_e must be nonzero".into()));
        }
        Ok(())
    }

    pub fn d(&self) -> DVector<f64> {
        DVector::from_fn(self.net.n_s, |k, _| self.net.d(k))
    }

    /// `w* = √P h_e / ‖h_e‖`.
    pub fn beam(&self, power: f64) -> CVec {
        &self.h_e * cplx(power.sqrt() / self.h_e.norm())
    }

    /// Sum-power budget `P ‖h_e‖²`.
    pub fn budget(&self, power: f64) -> f64 {
        power * self.h_e.norm_squared()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationControl {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for IterationControl {
    fn default() -> Self {
        Self { rel_tol: 1e-12, max_iter: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommonHarvesterSolution {
    pub amp: CVec,
    pub beam: CVec,
    /// Filter of the last iteration; the reported MSE is evaluated with it.
    pub filter: CVec,
    pub mse: f64,
    pub power: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Inverse MSE for MSE minimization, power for power minimization.
    pub history: Vec<f64>,
}

/// `f = v†h_k` with `v` scaled to `v†R_n v = 1`, and `Y`'s diagonal.
struct HarvesterStep {
    f: CVec,
    fr: DVector<f64>,
    d: DVector<f64>,
    filter: CVec,
}

impl HarvesterStep {
    fn new(chc: &CommonHarvesterConfig, ch: &ChannelRealization, amp: &CVec) -> Result<Self> {
        let v = optimal_filter(&chc.net, ch, amp)?;
        let c: f64 = v.iter().zip(&chc.net.fc_noise_vars).map(|(z, s)| z.norm_sqr() * s).sum();
        if !(c > 0.0) {
            return Err(CoreError::DegenerateDesign("filter vanishes (f = 0)".into()));
        }
        let v = v / cplx(c.sqrt());
        let f = ch.effective_gains(&v);
        if f.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(CoreError::DegenerateDesign("f = 0".into()));
        }
        let fr = DVector::from_fn(f.len(), |k, _| f[k].norm_sqr() * chc.net.sensing_vars[k]);
        Ok(Self { f, fr, d: chc.d(), filter: v })
    }

    fn y(&self, budget: f64) -> DVector<f64> {
        DVector::from_fn(self.f.len(), |k, _| self.fr[k] + self.d[k] / budget)
    }

    /// `f†Y⁻¹f`.
    fn value(&self, budget: f64) -> f64 {
        let y = self.y(budget);
        (0..self.f.len()).map(|k| self.f[k].norm_sqr() / y[k]).sum()
    }

    /// `√(E / f†Y⁻¹DY⁻¹f) · Y⁻¹f*`.
    fn amp(&self, budget: f64) -> CVec {
        let y = self.y(budget);
        let cond = y.max() / y.min();
        if cond > 1e12 {
            log::warn!("common harvester: Y has condition number {cond:.2e}");
        }
        let dn: f64 = (0..self.f.len()).map(|k| self.f[k].norm_sqr() * self.d[k] / (y[k] * y[k])).sum();
        let s = (budget / dn).sqrt();
        CVec::from_fn(self.f.len(), |k, _| self.f[k].conj() * (s / y[k]))
    }

    fn limit(&self, sensing: &[f64]) -> f64 {
        (0..self.f.len()).filter(|&k| self.f[k].norm_sqr() > 0.0).map(|k| 1.0 / sensing[k]).sum()
    }
}

fn check_init(chc: &CommonHarvesterConfig, ch: &ChannelRealization, init: &CVec) -> Result<()> {
    chc.validate()?;
    ch.validate(&chc.net)?;
    if init.len() != chc.net.n_s {
        return Err(CoreError::InvalidArgument("initial amplification must have length n_s".into()));
    }
    if (&ch.h_up * init).norm() == 0.0 {
        return Err(CoreError::DegenerateDesign("initial amplification gives Ha = 0".into()));
    }
    Ok(())
}

/// Alternates the optimal filter with the closed-form amplification at
/// FC power `chc.net.total_power`.
pub fn common_harvester_mse_min(
    chc: &CommonHarvesterConfig,
    ch: &ChannelRealization,
    init: &CVec,
    ctl: &IterationControl,
) -> Result<CommonHarvesterSolution> {
    check_init(chc, ch, init)?;
    let power = chc.net.total_power;
    let budget = chc.budget(power);
    let mut amp = init.clone();
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut filter = CVec::zeros(chc.net.n_r);
    for _ in 0..ctl.max_iter {
        let step = HarvesterStep::new(chc, ch, &amp)?;
        amp = step.amp(budget);
        filter = step.filter.clone();
        let q = step.value(budget);
        let prev = history.last().copied();
        history.push(q);
        if let Some(p) = prev {
            if (q - p).abs() <= ctl.rel_tol * q {
                converged = true;
                break;
            }
        }
    }
    let q = *history.last().expect("at least one iteration");
    Ok(CommonHarvesterSolution {
        beam: chc.beam(power),
        mse: 1.0 / q,
        power,
        iterations: history.len(),
        converged,
        history,
        amp,
        filter,
    })
}

/// Bracketing bisection, on a logarithmic scale, for the FC power at which
/// `f†Y(P)⁻¹f = gamma`.
fn power_for_target(step: &HarvesterStep, he2: f64, gamma: f64) -> Result<f64> {
    let q = |p: f64| step.value(p * he2);
    let mut lo = 1e-12;
    while q(lo) >= gamma {
        lo *= 1e-3;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    let mut hi = 1.0f64;
    let mut doublings = 0;
    while q(hi) < gamma {
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(CoreError::Infeasible(format!("target γ = {gamma} is not reachable at finite power")));
        }
    }
    if lo >= hi {
        lo = hi * 1e-12;
    }
    while (hi - lo) > 1e-10 * hi {
        let mid = (lo * hi).sqrt();
        let mid = if mid <= lo || mid >= hi { 0.5 * (lo + hi) } else { mid };
        if q(mid) < gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Minimal FC power meeting `1/mse ≥ gamma` with a common harvester.
pub fn common_harvester_power_min(
    chc: &CommonHarvesterConfig,
    ch: &ChannelRealization,
    gamma: f64,
    init: &CVec,
    ctl: &IterationControl,
) -> Result<CommonHarvesterSolution> {
    check_init(chc, ch, init)?;
    let limit = 1.0 / centralized_mse_bound(&chc.net);
    if !(gamma > 0.0) || gamma >= limit {
        return Err(CoreError::Infeasible(format!("target γ = {gamma} is not below {limit}")));
    }
    let he2 = chc.h_e.norm_squared();
    let mut amp = init.clone();
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut filter = CVec::zeros(chc.net.n_r);
    for _ in 0..ctl.max_iter {
        let step = HarvesterStep::new(chc, ch, &amp)?;
        if gamma >= step.limit(&chc.net.sensing_vars) {
            return Err(CoreError::Infeasible(format!("target γ = {gamma} is not reachable with this filter")));
        }
        let p = power_for_target(&step, he2, gamma)?;
        amp = step.amp(p * he2);
        filter = step.filter.clone();
        let prev = history.last().copied();
        history.push(p);
        if let Some(pp) = prev {
            if (p - pp).abs() <= ctl.rel_tol * pp.max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
    }
    let power = *history.last().expect("at least one iteration");
    Ok(CommonHarvesterSolution {
        beam: chc.beam(power),
        mse: 1.0 / gamma,
        power,
        iterations: history.len(),
        converged,
        history,
        amp,
        filter,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub power: f64,
    pub mse: f64,
    pub amp: CVec,
}

/// MSE achieved with a common harvester at each FC power of an ascending grid.
/// Each point starts from the previous solution rescaled to the new budget.
pub fn tradeoff_curve(
    chc: &CommonHarvesterConfig,
    ch: &ChannelRealization,
    p_grid: &[f64],
    init: &CVec,
    ctl: &IterationControl,
) -> Result<Vec<TradeoffPoint>> {
    if p_grid.is_empty() || p_grid.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(CoreError::InvalidArgument("power grid must be positive and nonempty".into()));
    }
    if p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::InvalidArgument("power grid must be strictly ascending".into()));
    }
    let mut out = Vec::with_capacity(p_grid.len());
    let mut start = init.clone();
    let mut prev_power: Option<f64> = None;
    for &p in p_grid {
        if let Some(pp) = prev_power {
            start *= cplx((p / pp).sqrt());
        }
        let mut local = chc.clone();
        local.net.total_power = p;
        let sol = common_harvester_mse_min(&local, ch, &start, ctl)?;
        start = sol.amp.clone();
        out.push(TradeoffPoint { power: p, mse: sol.mse, amp: sol.amp });
        prev_power = Some(p);
    }
    Ok(out)
}
