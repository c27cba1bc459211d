//! Small dense semidefinite programs with complex Hermitian blocks.
//!
//! Problems are stated in trace form over Hermitian PSD blocks and
//! nonnegative scalars ([`SdpProblem`]), embedded into a real symmetric
//! problem ([`embed_hermitian`]) and solved by a primal-dual path-following
//! method with Nesterov-Todd scaling and Mehrotra predictor-corrector steps.

mod dump;
mod embed;
mod error;
mod ipm;
mod problem;
mod rank_one;
mod solution;

pub use dump::{dump_json, write_dump};
pub use embed::{embed_hermitian, embed_variable, readback_hermitian, RealConstraint, RealSdpProblem};
pub use error::{Result, SdpError};
pub use ipm::{solve, solve_real, solve_with, SolverOptions};
pub use problem::{Constraint, LinearFunctional, Relation, SdpProblem, Sense};
pub use rank_one::{extract_rank_one, RankOne};
pub use solution::{relative_gap, InfeasibilityCertificate, RealSolution, SdpSolution, SolveStatus, ToleranceSet};

pub use nalgebra::DMatrix;
pub use num_complex::Complex64;

/// Frobenius inner product `Re tr(A† B)`.
pub fn inner(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `Re tr(A B)` for Hermitian `A`, `B`; equals [`inner`] in that case.
pub fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    inner(a, b)
}
