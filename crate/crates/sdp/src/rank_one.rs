use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, SdpError};

#[derive(Debug, Clone, PartialEq)]
pub struct RankOne {
    /// `sqrt(λ₁) u₁` with the first nonzero entry of `u₁` real and positive.
    pub vector: DVector<Complex64>,
    /// `‖M − q q†‖_F / ‖M‖_F`.
    pub residual: f64,
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
}

/// Best rank-one factor of a Hermitian PSD matrix from its leading eigenpair.
///
/// `tol` is the relative magnitude below which leading entries count as zero
/// when fixing the phase.
pub fn extract_rank_one(m: &DMatrix<Complex64>, tol: f64) -> Result<RankOne> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(SdpError::InvalidArgument("rank-one extraction needs a square matrix".into()));
    }
    let norm = m.norm();
    if !(norm > 0.0) {
        return Err(SdpError::Degenerate("rank-one extraction of a zero matrix".into()));
    }
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lead = order[0];
    let lambda = eig.eigenvalues[lead].max(0.0);
    let mut u: DVector<Complex64> = eig.eigenvectors.column(lead).into_owned();

    let umax = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cut = tol.max(f64::EPSILON) * umax;
    if let Some(first) = u.iter().find(|z| z.norm() > cut).cloned() {
        let phase = first.conj() / first.norm();
        u *= phase;
    }
    let q = u * Complex64::new(lambda.sqrt(), 0.0);
    let residual = (m - &q * q.adjoint()).norm() / norm;
    Ok(RankOne {
        vector: q,
        residual,
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
    })
}
