use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SdpError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

/// `Σ_b tr(C_b X_b) + Σ_s c_s x_s`, with unspecified terms equal to zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearFunctional {
    pub blocks: Vec<(usize, DMatrix<Complex64>)>,
    pub scalars: Vec<(usize, f64)>,
}

impl LinearFunctional {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn block(mut self, index: usize, coeff: DMatrix<Complex64>) -> Self {
        self.blocks.push((index, coeff));
        self
    }

    pub fn scalar(mut self, index: usize, coeff: f64) -> Self {
        self.scalars.push((index, coeff));
        self
    }

    /// Coefficient of block `b`, summing repeated entries.
    pub fn block_coeff(&self, b: usize) -> Option<DMatrix<Complex64>> {
        let mut acc: Option<DMatrix<Complex64>> = None;
        for (i, m) in &self.blocks {
            if *i == b {
                acc = Some(match acc {
                    None => m.clone(),
                    Some(a) => a + m,
                });
            }
        }
        acc
    }

    pub fn scalar_coeff(&self, s: usize) -> f64 {
        self.scalars.iter().filter(|(i, _)| *i == s).map(|(_, c)| c).sum()
    }

    pub fn evaluate(&self, blocks: &[DMatrix<Complex64>], scalars: &[f64]) -> f64 {
        let mut v = 0.0;
        for (b, m) in &self.blocks {
            v += crate::trace_product(m, &blocks[*b]);
        }
        for (s, c) in &self.scalars {
            v += c * scalars[*s];
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub lhs: LinearFunctional,
    pub relation: Relation,
    pub rhs: f64,
}

/// Linear program over Hermitian PSD blocks and nonnegative scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub num_scalars: usize,
    pub sense: Sense,
    pub objective: LinearFunctional,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            block_dims: Vec::new(),
            num_scalars: 0,
            sense,
            objective: LinearFunctional::default(),
            constraints: Vec::new(),
        }
    }

    /// Adds a PSD block of the given dimension and returns its index.
    pub fn add_block(&mut self, dim: usize) -> usize {
        self.block_dims.push(dim);
        self.block_dims.len() - 1
    }

    /// Adds a nonnegative scalar and returns its index.
    pub fn add_scalar(&mut self) -> usize {
        self.num_scalars += 1;
        self.num_scalars - 1
    }

    pub fn set_objective(&mut self, f: LinearFunctional) {
        self.objective = f;
    }

    /// Appends a constraint and returns its index.
    pub fn add_constraint(&mut self, lhs: LinearFunctional, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint { lhs, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.constraints.is_empty() {
            return Err(SdpError::InvalidArgument("problem has no constraints".into()));
        }
        if self.block_dims.iter().any(|&d| d == 0) {
            return Err(SdpError::InvalidArgument("zero-dimensional block".into()));
        }
        if self.block_dims.is_empty() && self.num_scalars == 0 {
            return Err(SdpError::InvalidArgument("problem has no variables".into()));
        }
        let check = |f: &LinearFunctional, what: &str| -> Result<()> {
            for (b, m) in &f.blocks {
                let dim = *self.block_dims.get(*b).ok_or_else(|| {
                    SdpError::InvalidArgument(format!("{what}: block index {b} out of range"))
                })?;
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(SdpError::InvalidArgument(format!(
                        "{what}: block {b} coefficient is {}x{}, expected {dim}x{dim}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(SdpError::InvalidArgument(format!("{what}: non-finite coefficient")));
                }
                let asym = (m - m.adjoint()).norm();
                if asym > 1e-10 * (1.0 + m.norm()) {
                    return Err(SdpError::InvalidArgument(format!(
                        "{what}: block {b} coefficient is not Hermitian (asymmetry {asym:.3e})"
                    )));
                }
            }
            for (s, c) in &f.scalars {
                if *s >= self.num_scalars {
                    return Err(SdpError::InvalidArgument(format!(
                        "{what}: scalar index {s} out of range"
                    )));
                }
                if !c.is_finite() {
                    return Err(SdpError::InvalidArgument(format!("{what}: non-finite coefficient")));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (i, c) in self.constraints.iter().enumerate() {
            check(&c.lhs, &format!("constraint {i}"))?;
            if !c.rhs.is_finite() {
                return Err(SdpError::InvalidArgument(format!("constraint {i}: non-finite rhs")));
            }
        }
        Ok(())
    }
}
