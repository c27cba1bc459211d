use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::embed::{embed_hermitian, readback_hermitian, RealConstraint, RealSdpProblem};
use crate::error::Result;
use crate::problem::{Relation, SdpProblem};
use crate::solution::{relative_gap, InfeasibilityCertificate, RealSolution, SdpSolution, SolveStatus, ToleranceSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: ToleranceSet,
    /// Multiplier on the default infeasible starting point.
    pub start_scale: f64,
    pub equilibrate: bool,
    /// Threshold for the improving-ray infeasibility tests.
    pub infeasibility_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: ToleranceSet::default(),
            start_scale: 1.0,
            equilibrate: true,
            infeasibility_tol: 1e-8,
        }
    }
}

pub fn solve(problem: &SdpProblem, tol: &ToleranceSet) -> Result<SdpSolution> {
    solve_with(problem, &SolverOptions { tol: *tol, ..SolverOptions::default() })
}

pub fn solve_with(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let real = embed_hermitian(problem)?;
    let rs = solve_real(&real, opts);
    Ok(to_complex_solution(problem, &real, rs))
}

/// Solves a real standard-form problem, restarting once from a larger
/// starting point when the first attempt breaks down numerically.
pub fn solve_real(problem: &RealSdpProblem, opts: &SolverOptions) -> RealSolution {
    let scaling = if opts.equilibrate {
        Scaling::ruiz(problem)
    } else {
        Scaling::identity(problem)
    };
    let scaled = scaling.apply(problem);
    let mut sol = run_ipm(&scaled, opts, opts.start_scale);
    if sol.status == SolveStatus::NumericalFailure {
        log::debug!("sdp: restarting after numerical failure at iteration {}", sol.iterations);
        let iters = sol.iterations;
        sol = run_ipm(&scaled, opts, opts.start_scale * 100.0);
        sol.iterations += iters;
    }
    scaling.unscale(sol)
}

// ---------------------------------------------------------------------------
// Equilibration

struct Scaling {
    row: DVector<f64>,
    block: Vec<f64>,
    lp: DVector<f64>,
    omega: f64,
}

impl Scaling {
    fn identity(p: &RealSdpProblem) -> Self {
        Self {
            row: DVector::from_element(p.num_rows(), 1.0),
            block: vec![1.0; p.block_dims.len()],
            lp: DVector::from_element(p.lp_dim, 1.0),
            omega: 1.0,
        }
    }

    /// Ruiz-style alternating row/column equilibration. Blocks are scaled as a
    /// whole so the PSD cone is preserved; LP columns individually.
    fn ruiz(p: &RealSdpProblem) -> Self {
        let mut sc = Self::identity(p);
        let m = p.num_rows();
        let block_norms: Vec<Vec<f64>> = p
            .rows
            .iter()
            .map(|r| r.blocks.iter().map(|b| b.as_ref().map_or(0.0, |a| a.norm())).collect())
            .collect();
        for _ in 0..12 {
            let mut row_max = vec![0.0f64; m];
            let mut blk_max = vec![0.0f64; p.block_dims.len()];
            let mut lp_max = vec![0.0f64; p.lp_dim];
            for i in 0..m {
                for (b, &nrm) in block_norms[i].iter().enumerate() {
                    let v = sc.row[i] * sc.block[b] * nrm;
                    row_max[i] = row_max[i].max(v);
                    blk_max[b] = blk_max[b].max(v);
                }
                for k in 0..p.lp_dim {
                    let v = (sc.row[i] * sc.lp[k] * p.rows[i].lp[k]).abs();
                    row_max[i] = row_max[i].max(v);
                    lp_max[k] = lp_max[k].max(v);
                }
            }
            for i in 0..m {
                if row_max[i] > 0.0 {
                    sc.row[i] /= row_max[i].sqrt();
                }
            }
            for b in 0..p.block_dims.len() {
                if blk_max[b] > 0.0 {
                    sc.block[b] /= blk_max[b].sqrt();
                }
            }
            for k in 0..p.lp_dim {
                if lp_max[k] > 0.0 {
                    sc.lp[k] /= lp_max[k].sqrt();
                }
            }
        }
        // Normalize the right-hand side: X = t X̂ with rows rescaled by 1/t.
        let bmax = p
            .b
            .iter()
            .zip(sc.row.iter())
            .map(|(b, r)| (b * r).abs())
            .fold(0.0, f64::max);
        if bmax > 0.0 && bmax.is_finite() {
            sc.row /= bmax;
            for s in sc.block.iter_mut() {
                *s *= bmax;
            }
            sc.lp *= bmax;
        }
        let cmax = p
            .c_blocks
            .iter()
            .zip(sc.block.iter())
            .map(|(c, s)| c.norm() * s)
            .chain(p.c_lp.iter().zip(sc.lp.iter()).map(|(c, s)| (c * s).abs()))
            .fold(0.0, f64::max);
        if cmax > 0.0 && cmax.is_finite() {
            sc.omega = 1.0 / cmax;
        }
        sc
    }

    fn apply(&self, p: &RealSdpProblem) -> RealSdpProblem {
        let mut q = p.clone();
        for (i, row) in q.rows.iter_mut().enumerate() {
            for (b, blk) in row.blocks.iter_mut().enumerate() {
                if let Some(a) = blk {
                    *a *= self.row[i] * self.block[b];
                }
            }
            for k in 0..p.lp_dim {
                row.lp[k] *= self.row[i] * self.lp[k];
            }
            q.b[i] *= self.row[i];
        }
        for (b, c) in q.c_blocks.iter_mut().enumerate() {
            *c *= self.omega * self.block[b];
        }
        for k in 0..p.lp_dim {
            q.c_lp[k] *= self.omega * self.lp[k];
        }
        q
    }

    fn unscale(&self, mut s: RealSolution) -> RealSolution {
        for (b, x) in s.x_blocks.iter_mut().enumerate() {
            *x *= self.block[b];
        }
        for (b, z) in s.s_blocks.iter_mut().enumerate() {
            *z /= self.block[b] * self.omega;
        }
        s.x_lp.component_mul_assign(&self.lp);
        s.s_lp.component_div_assign(&self.lp);
        s.s_lp /= self.omega;
        s.y.component_mul_assign(&self.row);
        s.y /= self.omega;
        if let Some(cert) = s.certificate.as_mut() {
            for (yi, r) in cert.y.iter_mut().zip(self.row.iter()) {
                *yi *= r;
            }
            for (b, x) in cert.ray_blocks.iter_mut().enumerate() {
                *x *= self.block[b];
            }
            for (x, l) in cert.ray_lp.iter_mut().zip(self.lp.iter()) {
                *x *= l;
            }
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Linear maps

fn apply_a(p: &RealSdpProblem, xb: &[DMatrix<f64>], xl: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        p.num_rows(),
        p.rows.iter().map(|r| row_value(r, xb, xl)),
    )
}

fn row_value(r: &RealConstraint, xb: &[DMatrix<f64>], xl: &DVector<f64>) -> f64 {
    let mut v = r.lp.dot(xl);
    for (a, x) in r.blocks.iter().zip(xb) {
        if let Some(a) = a {
            v += a.dot(x);
        }
    }
    v
}

fn apply_at(p: &RealSdpProblem, y: &DVector<f64>) -> (Vec<DMatrix<f64>>, DVector<f64>) {
    let mut blocks: Vec<DMatrix<f64>> = p.block_dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();
    let mut lp = DVector::zeros(p.lp_dim);
    for (r, &yi) in p.rows.iter().zip(y.iter()) {
        for (b, a) in r.blocks.iter().enumerate() {
            if let Some(a) = a {
                blocks[b] += a * yi;
            }
        }
        lp.axpy(yi, &r.lp, 1.0);
    }
    (blocks, lp)
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

// ---------------------------------------------------------------------------
// Nesterov-Todd scaling

struct NtBlock {
    g: DMatrix<f64>,
    gi: DMatrix<f64>,
    w: DMatrix<f64>,
    lam: DVector<f64>,
}

impl NtBlock {
    /// `X = G Λ Gᵀ`, `S = G⁻ᵀ Λ G⁻¹`, `W = G Gᵀ` satisfies `W S W = X`.
    fn new(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Self> {
        let lx = Cholesky::new(x.clone())?.l();
        let ls = Cholesky::new(s.clone())?.l();
        let svd = (ls.transpose() * &lx).svd(true, true);
        let u = svd.u?;
        let vt = svd.v_t?;
        let lam = svd.singular_values;
        if lam.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return None;
        }
        let isq = lam.map(|l| 1.0 / l.sqrt());
        let mut g = lx * vt.transpose();
        for (j, f) in isq.iter().enumerate() {
            g.column_mut(j).scale_mut(*f);
        }
        let mut gi = u.transpose() * ls.transpose();
        for (i, f) in isq.iter().enumerate() {
            gi.row_mut(i).scale_mut(*f);
        }
        let mut w = &g * g.transpose();
        symmetrize(&mut w);
        Some(Self { g, gi, w, lam })
    }

    fn to_scaled_primal(&self, dx: &DMatrix<f64>) -> DMatrix<f64> {
        let mut t = &self.gi * dx * self.gi.transpose();
        symmetrize(&mut t);
        t
    }

    fn to_scaled_dual(&self, ds: &DMatrix<f64>) -> DMatrix<f64> {
        let mut t = self.g.transpose() * ds * &self.g;
        symmetrize(&mut t);
        t
    }

    /// `G Z̃ Gᵀ` with `Z̃_ij = 2 Rc_ij / (λ_i + λ_j)`.
    fn rx_from_rc(&self, rc: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.lam.len();
        let z = DMatrix::from_fn(n, n, |i, j| 2.0 * rc[(i, j)] / (self.lam[i] + self.lam[j]));
        let mut t = &self.g * z * self.g.transpose();
        symmetrize(&mut t);
        t
    }

    /// Largest `α` keeping `Λ + α D` PSD for a scaled direction `D`.
    fn max_step(&self, d: &DMatrix<f64>) -> f64 {
        let isq = self.lam.map(|l| 1.0 / l.sqrt());
        let n = isq.len();
        let m = DMatrix::from_fn(n, n, |i, j| d[(i, j)] * isq[i] * isq[j]);
        let e = SymmetricEigen::new(m).eigenvalues.min();
        if e < 0.0 {
            -1.0 / e
        } else {
            f64::INFINITY
        }
    }
}

struct NtLp {
    g: DVector<f64>,
    w: DVector<f64>,
    lam: DVector<f64>,
}

impl NtLp {
    fn new(x: &DVector<f64>, s: &DVector<f64>) -> Option<Self> {
        if x.iter().chain(s.iter()).any(|&v| !(v > 0.0) || !v.is_finite()) {
            return None;
        }
        let w = x.component_div(s);
        let g = w.map(f64::sqrt);
        let lam = x.component_mul(s).map(f64::sqrt);
        Some(Self { g, w, lam })
    }

    fn max_step(&self, d: &DVector<f64>) -> f64 {
        self.lam
            .iter()
            .zip(d.iter())
            .filter(|(_, &di)| di < 0.0)
            .map(|(l, di)| -l / di)
            .fold(f64::INFINITY, f64::min)
    }
}

// ---------------------------------------------------------------------------
// Newton system

enum SchurFactor {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::linalg::FullPivLU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        if let Some(c) = Cholesky::new(m.clone()) {
            return Some(Self::Chol(c));
        }
        let lu = m.full_piv_lu();
        if lu.is_invertible() {
            Some(Self::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, h: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Self::Chol(c) => Some(c.solve(h)),
            Self::Lu(l) => l.solve(h),
        }
    }
}

const REFINE_STEPS: usize = 2;

fn schur_matrix(p: &RealSdpProblem, nt: &[NtBlock], lp: &NtLp) -> DMatrix<f64> {
    let m = p.num_rows();
    let mut mat = DMatrix::zeros(m, m);
    for (b, blk) in nt.iter().enumerate() {
        for j in 0..m {
            let Some(aj) = p.rows[j].blocks[b].as_ref() else { continue };
            let t = &blk.w * aj * &blk.w;
            for i in 0..=j {
                if let Some(ai) = p.rows[i].blocks[b].as_ref() {
                    mat[(i, j)] += ai.dot(&t);
                }
            }
        }
    }
    if p.lp_dim > 0 {
        for j in 0..m {
            let wa = p.rows[j].lp.component_mul(&lp.w);
            for i in 0..=j {
                mat[(i, j)] += p.rows[i].lp.dot(&wa);
            }
        }
    }
    for j in 0..m {
        for i in 0..j {
            mat[(j, i)] = mat[(i, j)];
        }
    }
    mat
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dxl: DVector<f64>,
    dy: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
    dsl: DVector<f64>,
}

#[allow(clippy::too_many_arguments)]
fn newton_direction(
    p: &RealSdpProblem,
    nt: &[NtBlock],
    lp: &NtLp,
    factor: &SchurFactor,
    rp: &DVector<f64>,
    rd: &[DMatrix<f64>],
    rdl: &DVector<f64>,
    rx: &[DMatrix<f64>],
    rxl: &DVector<f64>,
) -> Option<Direction> {
    let tmp: Vec<DMatrix<f64>> = nt
        .iter()
        .enumerate()
        .map(|(b, blk)| &rx[b] - &blk.w * &rd[b] * &blk.w)
        .collect();
    let tmpl = rxl - lp.w.component_mul(rdl);
    let h = rp - apply_a(p, &tmp, &tmpl);
    let mut dy = factor.solve(&h)?;
    let assemble = |dy: &DVector<f64>| {
        let (aty, atyl) = apply_at(p, dy);
        let ds: Vec<DMatrix<f64>> = rd.iter().zip(aty.iter()).map(|(r, a)| r - a).collect();
        let dsl = rdl - atyl;
        let dx: Vec<DMatrix<f64>> = nt
            .iter()
            .enumerate()
            .map(|(b, blk)| {
                let mut d = &rx[b] - &blk.w * &ds[b] * &blk.w;
                symmetrize(&mut d);
                d
            })
            .collect();
        let dxl = rxl - lp.w.component_mul(&dsl);
        (dx, dxl, ds, dsl)
    };
    let (mut dx, mut dxl, mut ds, mut dsl) = assemble(&dy);
    // Refine against the true residual of `A dx = rp`; the Schur matrix
    // loses accuracy as the iterates approach the boundary.
    let mut res = rp - apply_a(p, &dx, &dxl);
    for _ in 0..REFINE_STEPS {
        let Some(corr) = factor.solve(&res) else { break };
        let trial_dy = &dy + corr;
        let (tdx, tdxl, tds, tdsl) = assemble(&trial_dy);
        let tres = rp - apply_a(p, &tdx, &tdxl);
        if !(tres.norm() < res.norm()) {
            break;
        }
        (dy, dx, dxl, ds, dsl, res) = (trial_dy, tdx, tdxl, tds, tdsl, tres);
    }
    if dy.iter().chain(dxl.iter()).chain(dsl.iter()).any(|v| !v.is_finite()) {
        return None;
    }
    Some(Direction { dx, dxl, dy, ds, dsl })
}

// ---------------------------------------------------------------------------
// Main loop

fn starting_point(p: &RealSdpProblem, scale: f64) -> (Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>, DVector<f64>) {
    let mut xb = Vec::new();
    let mut sb = Vec::new();
    for (b, &n) in p.block_dims.iter().enumerate() {
        let nf = n as f64;
        let mut xi: f64 = 10.0f64.max(nf.sqrt());
        let mut zeta: f64 = 10.0f64.max(nf.sqrt()).max(p.c_blocks[b].norm());
        for (i, r) in p.rows.iter().enumerate() {
            if let Some(a) = r.blocks[b].as_ref() {
                let na = a.norm();
                xi = xi.max(nf * (1.0 + p.b[i].abs()) / (1.0 + na));
                zeta = zeta.max(na);
            }
        }
        xb.push(DMatrix::identity(n, n) * (xi * scale));
        sb.push(DMatrix::identity(n, n) * (zeta * scale));
    }
    let nl = p.lp_dim as f64;
    let mut xi: f64 = 10.0f64.max(nl.sqrt());
    let mut zeta: f64 = 10.0f64.max(nl.sqrt()).max(p.c_lp.norm());
    for (i, r) in p.rows.iter().enumerate() {
        let na = r.lp.norm();
        if na > 0.0 {
            xi = xi.max(nl * (1.0 + p.b[i].abs()) / (1.0 + na));
            zeta = zeta.max(na);
        }
    }
    let xl = DVector::from_element(p.lp_dim, xi * scale);
    let sl = DVector::from_element(p.lp_dim, zeta * scale);
    (xb, xl, sb, sl)
}

fn run_ipm(p: &RealSdpProblem, opts: &SolverOptions, start_scale: f64) -> RealSolution {
    let tol = &opts.tol;
    let (mut xb, mut xl, mut sb, mut sl) = starting_point(p, start_scale);
    let mut y = DVector::zeros(p.num_rows());
    let nu = p.degree().max(1) as f64;
    let bnorm = p.b.norm();
    let cnorm = (p.c_blocks.iter().map(|c| c.norm_squared()).sum::<f64>() + p.c_lp.norm_squared()).sqrt();

    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut pinf = f64::INFINITY;
    let mut dinf = f64::INFINITY;
    let mut gap = f64::INFINITY;
    let mut comp = f64::INFINITY;
    let mut block_comp = vec![f64::INFINITY; p.block_dims.len()];
    let mut certificate = None;
    let mut stalls = 0;

    for iter in 0..=tol.max_iter {
        iterations = iter;
        // Residuals.
        let rp = &p.b - apply_a(p, &xb, &xl);
        let (aty, atyl) = apply_at(p, &y);
        let rd: Vec<DMatrix<f64>> = (0..xb.len()).map(|b| &p.c_blocks[b] - &aty[b] - &sb[b]).collect();
        let rdl = &p.c_lp - &atyl - &sl;
        let pobj: f64 = p.c_blocks.iter().zip(&xb).map(|(c, x)| c.dot(x)).sum::<f64>() + p.c_lp.dot(&xl);
        let dobj = p.b.dot(&y);
        let xs: f64 = xb.iter().zip(&sb).map(|(x, s)| x.dot(s)).sum::<f64>() + xl.dot(&sl);
        let mu = xs / nu;

        pinf = rp.norm() / (1.0 + bnorm);
        dinf = (rd.iter().map(|r| r.norm_squared()).sum::<f64>() + rdl.norm_squared()).sqrt() / (1.0 + cnorm);
        gap = relative_gap(pobj, dobj);
        let denom = 1.0 + pobj.abs() + dobj.abs();
        comp = xs.abs() / denom;
        block_comp = xb.iter().zip(&sb).map(|(x, s)| x.dot(s).abs() / denom).collect();
        if !(pinf.is_finite() && dinf.is_finite() && gap.is_finite() && mu.is_finite()) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        log::trace!(
            "sdp iter {iter:3}: pobj {pobj:+.10e} dobj {dobj:+.10e} pinf {pinf:.2e} dinf {dinf:.2e} gap {gap:.2e} mu {mu:.2e}"
        );
        if pinf <= tol.feas && dinf <= tol.feas && gap <= tol.gap && comp <= tol.kkt {
            status = SolveStatus::Optimal;
            break;
        }

        // Improving-ray tests.
        if dobj > 0.0 {
            let (ray, rayl) = apply_at(p, &y);
            let nr = (ray.iter().zip(&sb).map(|(a, s)| (a + s).norm_squared()).sum::<f64>()
                + (&rayl + &sl).norm_squared())
            .sqrt();
            let ratio = nr / dobj;
            if ratio < opts.infeasibility_tol && pinf > tol.feas {
                status = SolveStatus::Infeasible;
                certificate = Some(InfeasibilityCertificate {
                    y: y.iter().map(|v| v / dobj).collect(),
                    ray_blocks: Vec::new(),
                    ray_lp: Vec::new(),
                    residual_ratio: ratio,
                });
                break;
            }
        }
        if pobj < 0.0 {
            let ax = apply_a(p, &xb, &xl);
            let ratio = ax.norm() / (-pobj);
            if ratio < opts.infeasibility_tol && dinf > tol.feas {
                status = SolveStatus::Unbounded;
                certificate = Some(InfeasibilityCertificate {
                    y: Vec::new(),
                    ray_blocks: xb.iter().map(|x| x / (-pobj)).collect(),
                    ray_lp: xl.iter().map(|v| v / (-pobj)).collect(),
                    residual_ratio: ratio,
                });
                break;
            }
        }
        if iter == tol.max_iter {
            break;
        }

        // Scaling and Schur complement.
        let Some(nt) = xb.iter().zip(&sb).map(|(x, s)| NtBlock::new(x, s)).collect::<Option<Vec<_>>>() else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let lp = if p.lp_dim > 0 {
            match NtLp::new(&xl, &sl) {
                Some(l) => l,
                None => {
                    status = SolveStatus::NumericalFailure;
                    break;
                }
            }
        } else {
            NtLp { g: DVector::zeros(0), w: DVector::zeros(0), lam: DVector::zeros(0) }
        };
        let Some(factor) = SchurFactor::new(schur_matrix(p, &nt, &lp)) else {
            status = SolveStatus::NumericalFailure;
            break;
        };

        // Predictor.
        let rx: Vec<DMatrix<f64>> = xb.iter().map(|x| -x).collect();
        let rxl = -&xl;
        let Some(aff) = newton_direction(p, &nt, &lp, &factor, &rp, &rd, &rdl, &rx, &rxl) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let dxt: Vec<DMatrix<f64>> = nt.iter().zip(&aff.dx).map(|(n, d)| n.to_scaled_primal(d)).collect();
        let dst: Vec<DMatrix<f64>> = nt.iter().zip(&aff.ds).map(|(n, d)| n.to_scaled_dual(d)).collect();
        let dxtl = aff.dxl.component_div(&lp.g);
        let dstl = aff.dsl.component_mul(&lp.g);
        let ap = step_limit(&nt, &lp, &dxt, &dxtl).min(1.0);
        let ad = step_limit(&nt, &lp, &dst, &dstl).min(1.0);
        let xs_aff: f64 = (0..xb.len())
            .map(|b| (&xb[b] + &aff.dx[b] * ap).dot(&(&sb[b] + &aff.ds[b] * ad)))
            .sum::<f64>()
            + (&xl + &aff.dxl * ap).dot(&(&sl + &aff.dsl * ad));
        let sigma = (xs_aff.max(0.0) / xs).powi(3).clamp(0.0, 1.0);

        // Corrector.
        let rx: Vec<DMatrix<f64>> = nt
            .iter()
            .enumerate()
            .map(|(b, n)| {
                let k = n.lam.len();
                let mut rc = (&dxt[b] * &dst[b] + &dst[b] * &dxt[b]) * -0.5;
                for i in 0..k {
                    rc[(i, i)] += sigma * mu - n.lam[i] * n.lam[i];
                }
                n.rx_from_rc(&rc)
            })
            .collect();
        let rcl = DVector::from_fn(p.lp_dim, |k, _| {
            sigma * mu - lp.lam[k] * lp.lam[k] - dxtl[k] * dstl[k]
        });
        let rxl = lp.g.component_mul(&rcl.component_div(&lp.lam));
        let Some(dir) = newton_direction(p, &nt, &lp, &factor, &rp, &rd, &rdl, &rx, &rxl) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let dxt: Vec<DMatrix<f64>> = nt.iter().zip(&dir.dx).map(|(n, d)| n.to_scaled_primal(d)).collect();
        let dst: Vec<DMatrix<f64>> = nt.iter().zip(&dir.ds).map(|(n, d)| n.to_scaled_dual(d)).collect();
        let amax_p = step_limit(&nt, &lp, &dxt, &dir.dxl.component_div(&lp.g));
        let amax_d = step_limit(&nt, &lp, &dst, &dir.dsl.component_mul(&lp.g));
        let frac = 0.9 + 0.09 * amax_p.min(amax_d).min(1.0);
        let ap = (frac * amax_p).min(1.0);
        let ad = (frac * amax_d).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                status = SolveStatus::NumericalFailure;
                break;
            }
        } else {
            stalls = 0;
        }

        for b in 0..xb.len() {
            xb[b] += &dir.dx[b] * ap;
            sb[b] += &dir.ds[b] * ad;
            symmetrize(&mut xb[b]);
            symmetrize(&mut sb[b]);
        }
        xl.axpy(ap, &dir.dxl, 1.0);
        sl.axpy(ad, &dir.dsl, 1.0);
        y.axpy(ad, &dir.dy, 1.0);
    }

    RealSolution {
        x_blocks: xb,
        x_lp: xl,
        y,
        s_blocks: sb,
        s_lp: sl,
        status,
        iterations,
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        relative_gap: gap,
        complementarity: comp,
        block_complementarity: block_comp,
        certificate,
    }
}

fn step_limit(nt: &[NtBlock], lp: &NtLp, d: &[DMatrix<f64>], dl: &DVector<f64>) -> f64 {
    let mut a = lp.max_step(dl);
    for (n, m) in nt.iter().zip(d) {
        a = a.min(n.max_step(m));
    }
    a
}

// ---------------------------------------------------------------------------
// Mapping back to the complex problem

fn to_complex_solution(problem: &SdpProblem, real: &RealSdpProblem, rs: RealSolution) -> SdpSolution {
    let sign = real.objective_sign;
    let blocks: Vec<DMatrix<Complex64>> = rs.x_blocks.iter().map(readback_hermitian).collect();
    let scalars: Vec<f64> = rs.x_lp.iter().take(real.num_scalars).cloned().collect();
    let duals: Vec<f64> = rs.y.iter().map(|v| sign * v).collect();
    let dual_blocks: Vec<DMatrix<Complex64>> = rs
        .s_blocks
        .iter()
        .map(|s| readback_hermitian(s) * Complex64::new(2.0, 0.0))
        .collect();
    let dual_scalars: Vec<f64> = rs.s_lp.iter().take(real.num_scalars).cloned().collect();
    let slacks = problem
        .constraints
        .iter()
        .map(|c| {
            let v = c.lhs.evaluate(&blocks, &scalars);
            match c.relation {
                Relation::Le => c.rhs - v,
                Relation::Ge => v - c.rhs,
                Relation::Eq => v - c.rhs,
            }
        })
        .collect();
    let primal_objective = problem.objective.evaluate(&blocks, &scalars);
    let dual_objective = sign * real.b.dot(&rs.y);
    let duality_gap = relative_gap(primal_objective, dual_objective);
    let complementarity = rs.block_complementarity.clone();
    let max_kkt_residual = complementarity
        .iter()
        .cloned()
        .fold(rs.primal_infeasibility.max(rs.dual_infeasibility), f64::max);
    SdpSolution {
        status: rs.status,
        blocks,
        scalars,
        duals,
        dual_blocks,
        dual_scalars,
        slacks,
        primal_objective,
        dual_objective,
        duality_gap,
        primal_infeasibility: rs.primal_infeasibility,
        dual_infeasibility: rs.dual_infeasibility,
        complementarity,
        max_kkt_residual,
        iterations: rs.iterations,
        certificate: rs.certificate,
    }
}
