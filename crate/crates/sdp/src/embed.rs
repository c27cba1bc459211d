use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Result;
use crate::problem::{Relation, SdpProblem, Sense};

/// One equality row of a [`RealSdpProblem`]; `None` marks an absent block.
#[derive(Debug, Clone, PartialEq)]
pub struct RealConstraint {
    pub blocks: Vec<Option<DMatrix<f64>>>,
    pub lp: DVector<f64>,
}

/// Real symmetric SDP in standard form:
/// minimize `<C, X>` subject to `<A_i, X> = b_i`, `X_b ⪰ 0`, `x_lp ≥ 0`.
///
/// The LP part holds the user scalars first, then one slack per inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSdpProblem {
    pub block_dims: Vec<usize>,
    pub lp_dim: usize,
    pub c_blocks: Vec<DMatrix<f64>>,
    pub c_lp: DVector<f64>,
    pub rows: Vec<RealConstraint>,
    pub b: DVector<f64>,
    pub num_scalars: usize,
    pub slack_index: Vec<Option<usize>>,
    /// `+1` when the source problem minimizes, `-1` when it maximizes.
    pub objective_sign: f64,
}

impl RealSdpProblem {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Barrier parameter denominator: total cone dimension.
    pub fn degree(&self) -> usize {
        self.block_dims.iter().sum::<usize>() + self.lp_dim
    }
}

/// `(1/2) [[Re, -Im], [Im, Re]]`, so that `<embed(C), embed_var(X)> = Re tr(C X)`.
pub(crate) fn embed_coeff(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let d = m.nrows();
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    for j in 0..d {
        for i in 0..d {
            let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            out[(i, j)] = 0.5 * z.re;
            out[(i + d, j + d)] = 0.5 * z.re;
            out[(i, j + d)] = -0.5 * z.im;
            out[(i + d, j)] = 0.5 * z.im;
        }
    }
    out
}

/// Real image `[[Re, -Im], [Im, Re]]` of a Hermitian variable.
pub fn embed_variable(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    embed_coeff(m) * 2.0
}

/// Inverse of the variable embedding, averaging the duplicated entries.
pub fn readback_hermitian(x: &DMatrix<f64>) -> DMatrix<Complex64> {
    let d = x.nrows() / 2;
    let mut out = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for j in 0..d {
        for i in 0..d {
            let re = 0.5 * (x[(i, j)] + x[(i + d, j + d)]);
            let im = 0.5 * (x[(i + d, j)] - x[(i, j + d)]);
            out[(i, j)] = Complex64::new(re, im);
        }
    }
    // Enforce exact Hermitian symmetry.
    let adj = out.adjoint();
    (out + adj) * Complex64::new(0.5, 0.0)
}

/// Maps a complex Hermitian problem onto an equivalent real symmetric one.
///
/// Each `d × d` complex block becomes a `2d × 2d` real block; coefficient
/// matrices carry a factor 1/2 so every functional value is unchanged.
/// Inequalities receive slacks in the LP part and maximization is negated.
pub fn embed_hermitian(problem: &SdpProblem) -> Result<RealSdpProblem> {
    problem.validate()?;
    let nb = problem.block_dims.len();
    let num_ineq = problem
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();
    let lp_dim = problem.num_scalars + num_ineq;
    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    let block_dims: Vec<usize> = problem.block_dims.iter().map(|d| 2 * d).collect();
    let c_blocks = (0..nb)
        .map(|b| match problem.objective.block_coeff(b) {
            Some(m) => embed_coeff(&m) * sign,
            None => DMatrix::zeros(block_dims[b], block_dims[b]),
        })
        .collect();
    let mut c_lp = DVector::zeros(lp_dim);
    for s in 0..problem.num_scalars {
        c_lp[s] = sign * problem.objective.scalar_coeff(s);
    }

    let mut rows = Vec::with_capacity(problem.constraints.len());
    let mut slack_index = Vec::with_capacity(problem.constraints.len());
    let mut b = DVector::zeros(problem.constraints.len());
    let mut next_slack = problem.num_scalars;
    for (i, c) in problem.constraints.iter().enumerate() {
        let blocks = (0..nb)
            .map(|bi| c.lhs.block_coeff(bi).map(|m| embed_coeff(&m)))
            .collect();
        let mut lp = DVector::zeros(lp_dim);
        for s in 0..problem.num_scalars {
            lp[s] = c.lhs.scalar_coeff(s);
        }
        let slack = match c.relation {
            Relation::Eq => None,
            Relation::Le | Relation::Ge => {
                lp[next_slack] = if c.relation == Relation::Le { 1.0 } else { -1.0 };
                next_slack += 1;
                Some(next_slack - 1)
            }
        };
        rows.push(RealConstraint { blocks, lp });
        slack_index.push(slack);
        b[i] = c.rhs;
    }

    Ok(RealSdpProblem {
        block_dims,
        lp_dim,
        c_blocks,
        c_lp,
        rows,
        b,
        num_scalars: problem.num_scalars,
        slack_index,
        objective_sign: sign,
    })
}
