//! Dense complex-matrix primitives shared by the kernel, the oracle and the
//! circuit backend.
//!
//! Energies are in cm⁻¹ and times in fs throughout the crate. The reduced
//! Planck constant in those units is [`HBAR_CM1_FS`], so that a level at
//! `E` cm⁻¹ accumulates a phase of `E * t / HBAR_CM1_FS` radians after `t` fs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealMatrix = DMatrix<f64>;

/// Speed of light in cm/fs.
pub const SPEED_OF_LIGHT_CM_PER_FS: f64 = 2.997_924_58e-5;

/// ħ in cm⁻¹·fs, i.e. `1 / (2πc)`.
pub const HBAR_CM1_FS: f64 = 1.0 / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_FS);

/// Boltzmann constant in cm⁻¹/K.
pub const BOLTZMANN_CM1_PER_K: f64 = 0.695_034_800;

/// Tolerance on `‖m − m†‖_max` accepted by [`eigh`].
pub const EIGH_HERMITIAN_TOL: f64 = 1e-10;

#[cfg(test)]
pub(crate) const C0: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const C1: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `|k⟩⟨l|` in dimension `n`.
pub fn outer_basis(n: usize, k: usize, l: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(k, l)] = C1;
    m
}

pub fn from_real(m: &RealMatrix) -> ComplexMatrix {
    m.map(c)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `‖m − m†‖_max`.
pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `‖U U† − 1‖_max`.
pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    let prod = u * u.adjoint();
    max_abs(&(prod - identity(u.nrows())))
}

pub fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dims("square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.nrows())
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn check_hermitian(m: &ComplexMatrix, tolerance: f64) -> Result<()> {
    check_square(m)?;
    let deviation = hermiticity_deviation(m);
    if deviation > tolerance || deviation.is_nan() {
        return Err(Error::NotHermitian { deviation, tolerance });
    }
    Ok(())
}

pub fn check_unitary(u: &ComplexMatrix, tolerance: f64) -> Result<()> {
    check_square(u)?;
    let deviation = unitarity_deviation(u);
    if deviation > tolerance || deviation.is_nan() {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// `U ρ U†`.
pub fn conjugate(u: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    u * rho * u.adjoint()
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Eigendecomposition of a hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, column `k` belongs to `values[k]`.
    pub vectors: ComplexMatrix,
}

impl Eigh {
    /// `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn apply_fn(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, k)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(c)
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// The matrix is symmetrised before factorisation; the input must already be
/// hermitian to [`EIGH_HERMITIAN_TOL`].
pub fn eigh(m: &ComplexMatrix) -> Result<Eigh> {
    check_hermitian(m, EIGH_HERMITIAN_TOL)?;
    check_finite(m)?;
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Eigh { values, vectors })
}

/// Smallest eigenvalue of a hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    check_hermitian(m, EIGH_HERMITIAN_TOL)?;
    let values = hermitian_part(m).symmetric_eigenvalues();
    Ok(values.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `exp(−i h dt / ħ)` through the eigendecomposition of `h`.
pub fn mat_exp_unitary(h: &ComplexMatrix, dt: f64, hbar: f64) -> Result<ComplexMatrix> {
    if !(dt >= 0.0) {
        return Err(Error::SpecInvalid(format!("time step must be non-negative, got {dt}")));
    }
    let decomposition = eigh(h)?;
    let scale = dt / hbar;
    Ok(decomposition.apply_fn(|lambda| Complex64::from_polar(1.0, -lambda * scale)))
}

/// Which factor of a bipartite space survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of an operator on `A ⊗ B` (A is the slow index).
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), keep: Keep) -> Result<ComplexMatrix> {
    let n = check_square(m)?;
    let (da, db) = dims;
    if da * db != n || da == 0 || db == 0 {
        return Err(Error::dims(format!("{da}*{db}"), n));
    }
    Ok(match keep {
        Keep::A => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Keep::B => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    })
}

/// Frobenius distance `√Σ|a_ij − b_ij|²`.
pub fn frob_dist(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::dims(format!("{:?}", a.shape()), format!("{:?}", b.shape())));
    }
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}
