use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SdpError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    /// Primal infeasible; a dual improving ray is attached.
    Infeasible,
    /// Dual infeasible; a primal improving ray is attached.
    Unbounded,
    MaxIterations,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSet {
    pub feas: f64,
    pub gap: f64,
    pub kkt: f64,
    /// Most negative eigenvalue accepted for a PSD block (a negative number).
    pub psd: f64,
    pub max_iter: usize,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        Self {
            feas: 1e-8,
            gap: 1e-8,
            kkt: 1e-7,
            psd: -1e-9,
            max_iter: 100,
        }
    }
}

/// Improving ray proving infeasibility of the primal (`Infeasible`) or the
/// dual (`Unbounded`), expressed on the real standard form.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityCertificate {
    pub y: Vec<f64>,
    pub ray_blocks: Vec<DMatrix<f64>>,
    pub ray_lp: Vec<f64>,
    /// Ratio of the ray's residual norm to its objective improvement.
    pub residual_ratio: f64,
}

/// Iterate of the real standard-form solver.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSolution {
    pub x_blocks: Vec<DMatrix<f64>>,
    pub x_lp: DVector<f64>,
    pub y: DVector<f64>,
    pub s_blocks: Vec<DMatrix<f64>>,
    pub s_lp: DVector<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    /// `<X, S> / (1 + |p| + |d|)` on the equilibrated problem, total and per block.
    pub complementarity: f64,
    pub block_complementarity: Vec<f64>,
    pub certificate: Option<InfeasibilityCertificate>,
}

/// Solution in the terms of the source [`crate::SdpProblem`].
///
/// `duals[i]` is the sensitivity of the optimal objective to the right-hand
/// side of constraint `i`. `dual_blocks` are the dual slack matrices of the
/// minimization form, `C - Σ y_i A_i` (with `C` negated for maximization).
#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub blocks: Vec<DMatrix<Complex64>>,
    pub scalars: Vec<f64>,
    pub duals: Vec<f64>,
    pub dual_blocks: Vec<DMatrix<Complex64>>,
    pub dual_scalars: Vec<f64>,
    /// Constraint slack `rhs - lhs` for `≤`, `lhs - rhs` for `≥`, residual for `=`.
    pub slacks: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// See [`relative_gap`].
    pub duality_gap: f64,
    /// Measured on the equilibrated problem.
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    /// Per block, `|tr(X S)| / (1 + |p| + |d|)` on the equilibrated problem.
    pub complementarity: Vec<f64>,
    pub max_kkt_residual: f64,
    pub iterations: usize,
    pub certificate: Option<InfeasibilityCertificate>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn require_optimal(self) -> Result<Self> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(SdpError::NotOptimal(self.status))
        }
    }

    pub fn objective(&self) -> f64 {
        self.primal_objective
    }

    /// Smallest eigenvalue across all primal blocks.
    pub fn min_primal_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| min_hermitian_eigenvalue(m))
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest eigenvalue across all dual slack blocks.
    pub fn min_dual_eigenvalue(&self) -> f64 {
        self.dual_blocks
            .iter()
            .map(|m| min_hermitian_eigenvalue(m))
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn min_hermitian_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// `|p - d| / (1e-10 + max(|p|, |d|))`: relative once the objective is
/// meaningfully nonzero, absolute near zero.
pub fn relative_gap(p: f64, d: f64) -> f64 {
    (p - d).abs() / (1e-10 + p.abs().max(d.abs()))
}
