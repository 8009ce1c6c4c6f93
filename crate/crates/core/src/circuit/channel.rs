//! Channel-level comparison of compiled circuits and the operator model.

use rayon::prelude::*;

use super::compile::{build_step_circuit, lexicographic_jumps};
use super::layout::QubitLayout;
use super::sim::apply_circuit_operator;
use crate::error::{Error, Result};
use crate::kernel::{build_evolution_operators, JumpRateSpec};
use crate::linalg::{self, c, ComplexMatrix, Keep};

/// Choi matrix `Σ_{a,b} |a⟩⟨b| ⊗ Φ(|a⟩⟨b|)`, `dim² × dim²`.
pub type ChannelMatrix = ComplexMatrix;

/// Builds the Choi matrix of a linear map by evaluating it on every matrix
/// unit. Inputs are evaluated in parallel.
pub fn channel_choi<F>(apply: F, dim: usize) -> Result<ChannelMatrix>
where
    F: Fn(&ComplexMatrix) -> Result<ComplexMatrix> + Sync,
{
    let blocks: Vec<ComplexMatrix> = (0..dim * dim)
        .into_par_iter()
        .map(|ab| apply(&linalg::outer_basis(dim, ab / dim, ab % dim)))
        .collect::<Result<_>>()?;
    let mut choi = ComplexMatrix::zeros(dim * dim, dim * dim);
    for (ab, block) in blocks.iter().enumerate() {
        if block.shape() != (dim, dim) {
            return Err(Error::dims(format!("{dim}x{dim}"), format!("{}x{}", block.nrows(), block.ncols())));
        }
        let (a, b) = (ab / dim, ab % dim);
        choi.view_mut((a * dim, b * dim), (dim, dim)).copy_from(block);
    }
    Ok(choi)
}

/// For a trace-preserving map, tracing the output
/// factor of the Choi matrix gives the identity. Returns the max deviation.
pub fn choi_trace_deviation(choi: &ChannelMatrix, dim: usize) -> Result<f64> {
    let reduced = linalg::partial_trace(choi, (dim, dim), Keep::A)?;
    Ok(linalg::max_abs(&(reduced - linalg::identity(dim))))
}

/// The compiled step as a black-box linear map on `dim × dim` operators.
pub fn circuit_step_map<'a>(
    gates: &'a [super::gate::Gate],
    layout: &'a QubitLayout,
) -> impl Fn(&ComplexMatrix) -> Result<ComplexMatrix> + Sync + 'a {
    move |m| apply_circuit_operator(m, gates, layout)
}

/// The step built directly from Kraus matrices on `B1 ⊗ system`, without
/// going through gates: each jump applies
///
/// ```text
/// K0 = √(1−γ)|0,i⟩⟨0,i| + |1,i⟩⟨1,i| + 1 ⊗ Σ_{m≠i}|m⟩⟨m|,   K1 = √γ|1,j⟩⟨0,i|
/// ```
///
/// in the given order, then `|0⟩⟨0| ⊗ U + |1⟩⟨1| ⊗ 1`, then `B1` is traced out.
pub fn sequential_kraus_step_ordered(
    m: &ComplexMatrix,
    rates: &JumpRateSpec,
    u: &ComplexMatrix,
    order: &[(usize, usize)],
) -> Result<ComplexMatrix> {
    let dim = rates.dim();
    if m.shape() != (dim, dim) || u.shape() != (dim, dim) {
        return Err(Error::dims(dim, m.nrows()));
    }
    let mut rho = linalg::kron(&linalg::outer_basis(2, 0, 0), m);
    for &(i, j) in order {
        let gamma = rates.get(i, j);
        let mut k0 = linalg::identity(2 * dim);
        k0[(i, i)] = c((1.0 - gamma).sqrt());
        let mut k1 = ComplexMatrix::zeros(2 * dim, 2 * dim);
        k1[(dim + j, i)] = c(gamma.sqrt());
        rho = linalg::conjugate(&k0, &rho) + linalg::conjugate(&k1, &rho);
    }
    let mut coherent = linalg::identity(2 * dim);
    coherent.view_mut((0, 0), (dim, dim)).copy_from(u);
    rho = linalg::conjugate(&coherent, &rho);
    linalg::partial_trace(&rho, (2, dim), Keep::B)
}

pub fn sequential_kraus_step(m: &ComplexMatrix, rates: &JumpRateSpec, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    sequential_kraus_step_ordered(m, rates, u, &lexicographic_jumps(rates.dim()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelComparisonRow {
    pub scale: f64,
    pub distance: f64,
}

/// Choi distance between the compiled step and the operator-sum step map as
/// the jump probabilities are scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelComparison {
    pub rows: Vec<ChannelComparisonRow>,
}

impl ChannelComparison {
    /// `distance[k] / distance[k+1]`.
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[0].distance / w[1].distance).collect()
    }
}

pub fn compare_step_channels(rates: &JumpRateSpec, u: &ComplexMatrix, scales: &[f64]) -> Result<ChannelComparison> {
    let dim = rates.dim();
    let layout = QubitLayout::new(dim)?;
    let rows = scales
        .iter()
        .map(|&scale| {
            let scaled = rates.scaled(scale)?;
            let gates = build_step_circuit(&scaled, u, &layout)?;
            let circuit = channel_choi(circuit_step_map(&gates.gates, &layout), dim)?;
            let ops = build_evolution_operators(&scaled, u)?;
            let operator = channel_choi(|m| Ok(ops.apply(m)), dim)?;
            Ok(ChannelComparisonRow { scale, distance: linalg::frob_dist(&circuit, &operator)? })
        })
        .collect::<Result<_>>()?;
    Ok(ChannelComparison { rows })
}
