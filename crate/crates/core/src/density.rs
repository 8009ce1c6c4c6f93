//! Validated density matrices.

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Keep};

/// Hermiticity tolerance enforced on every [`DensityMatrix`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default positivity tolerance (smallest eigenvalue may dip this far below 0).
pub const PSD_TOL: f64 = 1e-8;

/// A hermitian, positive semidefinite matrix of (approximately) unit trace.
///
/// How far the trace may stray from one is decided by whoever constructs the
/// state; the kernel's step map drifts at second order in the time step.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `m` with the given trace and positivity tolerances.
    pub fn new(m: ComplexMatrix, trace_tol: f64, psd_tol: f64) -> Result<Self> {
        validate_density(&m, trace_tol, psd_tol)?;
        Ok(Self { matrix: m })
    }

    /// Wraps a matrix already known to be a valid state (e.g. the output of a
    /// structurally hermitian map).
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// `|k⟩⟨k|`.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange { index: k, dim });
        }
        Ok(Self { matrix: linalg::outer_basis(dim, k, k) })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: linalg::identity(dim) * linalg::c(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix).unwrap_or(f64::NAN)
    }

    /// Basis-state populations `ρ_kk`.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// `V ρ V†` for a unitary change of basis.
    pub fn transformed(&self, v: &ComplexMatrix) -> Result<Self> {
        if v.ncols() != self.dim() {
            return Err(Error::dims(self.dim(), v.ncols()));
        }
        Ok(Self { matrix: linalg::conjugate(v, &self.matrix) })
    }

    /// Reduced state on one factor of `A ⊗ B`.
    pub fn partial_trace(&self, dims: (usize, usize), keep: Keep) -> Result<Self> {
        Ok(Self { matrix: linalg::partial_trace(&self.matrix, dims, keep)? })
    }
}

/// Checks the density-matrix invariants and reports the first violation.
pub fn validate_density(m: &ComplexMatrix, trace_tol: f64, psd_tol: f64) -> Result<()> {
    linalg::check_square(m)?;
    linalg::check_finite(m)?;
    linalg::check_hermitian(m, HERMITIAN_TOL)?;
    let trace = linalg::trace(m).re;
    if (trace - 1.0).abs() > trace_tol {
        return Err(Error::TraceOutOfTolerance { trace, tolerance: trace_tol });
    }
    let min_eigenvalue = linalg::min_eigenvalue(m)?;
    if min_eigenvalue < -psd_tol {
        return Err(Error::NotPositive { min_eigenvalue, tolerance: psd_tol });
    }
    Ok(())
}
