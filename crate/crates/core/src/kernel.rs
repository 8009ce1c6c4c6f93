//! Discrete-time operator-sum step for environment-assisted transport.
//!
//! One step combines coherent evolution `U` with incoherent jumps between
//! basis states. For jump probabilities `γ[M][N]` (per step, `M → N`) the
//! Kraus factors are
//!
//! ```text
//! M_MN = √γ[M][N] |N⟩⟨M|                 (N ≠ M)
//! M_MM = √(1 − Σ_N γ[M][N]) |M⟩⟨M|
//! ```
//!
//! and the step map is
//!
//! ```text
//! ρ' = Σ_M [ M_MM U ρ U† M_MM† + Σ_{N≠M} ( M_MN ρ M_MN† + M_MM U ρ U† M_NN† ) ]
//! ```
//!
//! The diagonal factors carry the unitary while the jump factors do not. The
//! cross terms `M_MM U ρ U† M_NN†` appear for every ordered pair, so the whole
//! coherent block collapses to `(S U) ρ (S U)†` with `S = Σ_M M_MM`.
//!
//! The `M`s satisfy `Σ M†M = 1` exactly, but the map only preserves trace to
//! second order in the step because `U` need not commute with the projectors.

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix, RealMatrix};
use crate::trajectory::{self, Observer, Trajectory};

/// Tolerance for treating the supplied `U` as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Slack on the per-source survival sum before it counts as an underflow.
const SURVIVAL_SLACK: f64 = 1e-12;

/// Per-step jump probabilities between basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpRateSpec {
    gamma: RealMatrix,
}

impl JumpRateSpec {
    /// `gamma[(M, N)]` is the probability of `|M⟩ → |N⟩` in one step.
    pub fn new(gamma: RealMatrix) -> Result<Self> {
        let dim = gamma.nrows();
        if gamma.ncols() != dim || dim == 0 {
            return Err(Error::dims("square rate matrix", format!("{}x{}", dim, gamma.ncols())));
        }
        for m in 0..dim {
            if gamma[(m, m)] != 0.0 {
                return Err(Error::SpecInvalid(format!(
                    "diagonal jump probability gamma[{m}][{m}] = {} must be zero",
                    gamma[(m, m)]
                )));
            }
            let mut total = 0.0;
            for n in 0..dim {
                let g = gamma[(m, n)];
                // anything above one is reported as a survival underflow below
                if !(g >= 0.0) || !g.is_finite() {
                    return Err(Error::ProbabilityOutOfRange { value: g });
                }
                total += g;
            }
            if total > 1.0 + SURVIVAL_SLACK {
                return Err(Error::SurvivalUnderflow { source_state: m, total });
            }
        }
        Ok(Self { gamma })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { gamma: RealMatrix::zeros(dim, dim) }
    }

    /// Probabilities `Γ·dt` from rates in fs⁻¹.
    pub fn from_rates(rates_per_fs: &RealMatrix, dt_fs: f64) -> Result<Self> {
        Self::new(rates_per_fs * dt_fs)
    }

    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn gamma(&self) -> &RealMatrix {
        &self.gamma
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.gamma[(from, to)]
    }

    /// Total jump probability out of `from`.
    pub fn outflow(&self, from: usize) -> f64 {
        self.gamma.row(from).sum()
    }

    /// Amplitude `√(1 − Σ_N γ[M][N])` of staying in `M`.
    pub fn survival_amplitude(&self, from: usize) -> f64 {
        (1.0 - self.outflow(from)).max(0.0).sqrt()
    }

    /// Same jump pattern with every probability multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(&self.gamma * s)
    }
}

/// A rank-one jump factor `amplitude · |target⟩⟨source|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpOperator {
    pub source: usize,
    pub target: usize,
    pub amplitude: f64,
}

impl JumpOperator {
    pub fn matrix(&self, dim: usize) -> ComplexMatrix {
        linalg::outer_basis(dim, self.target, self.source) * c(self.amplitude)
    }
}

/// The evolution operators of one step: `M_MM U` and the bare jumps `M_MN`.
#[derive(Debug, Clone)]
pub struct EvolutionOperators {
    dim: usize,
    unitary: ComplexMatrix,
    survival: Vec<f64>,
    diagonal_ops: Vec<ComplexMatrix>,
    jump_ops: Vec<JumpOperator>,
    /// `Σ_M M_MM U`.
    coherent: ComplexMatrix,
}

impl EvolutionOperators {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    /// `M_MM U` for each `M`.
    pub fn diagonal_ops(&self) -> &[ComplexMatrix] {
        &self.diagonal_ops
    }

    /// Jump factors with non-zero probability, in `(source, target)` order.
    pub fn jump_ops(&self) -> &[JumpOperator] {
        &self.jump_ops
    }

    /// Survival amplitudes `√(1 − Σ_N γ[M][N])`.
    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    /// `M_MM` without the unitary.
    pub fn survival_op(&self, m: usize) -> ComplexMatrix {
        linalg::outer_basis(self.dim, m, m) * c(self.survival[m])
    }

    /// `‖Σ M†M − 1‖_max` over the underlying Kraus factors.
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for m in 0..self.dim {
            let op = self.survival_op(m);
            sum += op.adjoint() * &op;
        }
        for jump in &self.jump_ops {
            let op = jump.matrix(self.dim);
            sum += op.adjoint() * &op;
        }
        linalg::max_abs(&(sum - linalg::identity(self.dim)))
    }

    /// The step map applied to an arbitrary operator (it is linear).
    pub fn apply(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = linalg::conjugate(&self.coherent, m);
        for jump in &self.jump_ops {
            let w = jump.amplitude * jump.amplitude;
            out[(jump.target, jump.target)] += m[(jump.source, jump.source)] * w;
        }
        out
    }
}

/// Kraus pair of a single `|0⟩ → |1⟩` jump with probability `p`.
pub fn single_jump_kraus(p: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    let mut m0 = ComplexMatrix::zeros(2, 2);
    m0[(0, 0)] = c((1.0 - p).sqrt());
    m0[(1, 1)] = c(1.0);
    let m1 = linalg::outer_basis(2, 1, 0) * c(p.sqrt());
    Ok((m0, m1))
}

/// `M0 U ρ U† M0† + M1 ρ M1†` for a two-level system.
pub fn single_jump_step(rho: &DensityMatrix, u: &ComplexMatrix, p: f64) -> Result<DensityMatrix> {
    if rho.dim() != 2 || u.nrows() != 2 {
        return Err(Error::dims(2, format!("rho {} / U {}", rho.dim(), u.nrows())));
    }
    linalg::check_unitary(u, UNITARY_TOL)?;
    let (m0, m1) = single_jump_kraus(p)?;
    let coherent = &m0 * u;
    let out = linalg::conjugate(&coherent, rho.matrix()) + linalg::conjugate(&m1, rho.matrix());
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Assembles the evolution operators for jump probabilities `rates` and the
/// one-step propagator `u`.
pub fn build_evolution_operators(rates: &JumpRateSpec, u: &ComplexMatrix) -> Result<EvolutionOperators> {
    let dim = rates.dim();
    if u.nrows() != dim || u.ncols() != dim {
        return Err(Error::dims(dim, format!("{}x{}", u.nrows(), u.ncols())));
    }
    linalg::check_unitary(u, UNITARY_TOL)?;
    let mut survival = Vec::with_capacity(dim);
    for m in 0..dim {
        let total = rates.outflow(m);
        if total > 1.0 + SURVIVAL_SLACK {
            return Err(Error::SurvivalUnderflow { source_state: m, total });
        }
        survival.push(rates.survival_amplitude(m));
    }
    let diagonal_ops: Vec<ComplexMatrix> = (0..dim)
        .map(|m| {
            let mut op = ComplexMatrix::zeros(dim, dim);
            op.set_row(m, &(u.row(m) * c(survival[m])));
            op
        })
        .collect();
    let mut coherent = u.clone();
    for (m, s) in survival.iter().enumerate() {
        let row = coherent.row(m) * c(*s);
        coherent.set_row(m, &row);
    }
    let mut jump_ops = Vec::new();
    for source in 0..dim {
        for target in 0..dim {
            let g = rates.get(source, target);
            if source != target && g > 0.0 {
                jump_ops.push(JumpOperator { source, target, amplitude: g.sqrt() });
            }
        }
    }
    Ok(EvolutionOperators {
        dim,
        unitary: u.clone(),
        survival,
        diagonal_ops,
        jump_ops,
        coherent,
    })
}

/// One full step of the transport map.
pub fn enaqt_step(rho: &DensityMatrix, ops: &EvolutionOperators) -> Result<DensityMatrix> {
    if rho.dim() != ops.dim() {
        return Err(Error::dims(ops.dim(), rho.dim()));
    }
    Ok(DensityMatrix::from_matrix_unchecked(ops.apply(rho.matrix())))
}

/// Step settings shared by every step of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt_fs: f64,
    /// Fraction of the full bath coupling, in `[0, 1]`.
    pub chi: f64,
    pub renormalize_trace: bool,
}

impl StepConfig {
    pub fn new(dt_fs: f64, chi: f64, renormalize_trace: bool) -> Result<Self> {
        if !(dt_fs > 0.0) || !dt_fs.is_finite() {
            return Err(Error::SpecInvalid(format!("dt must be positive, got {dt_fs}")));
        }
        if !(0.0..=1.0).contains(&chi) {
            return Err(Error::ChiOutOfRange(chi));
        }
        Ok(Self { dt_fs, chi, renormalize_trace })
    }
}

/// `(1 − χ) U ρ U† + χ · step(ρ)`, on a raw operator.
pub fn tunable_apply(m: &ComplexMatrix, ops: &EvolutionOperators, cfg: &StepConfig) -> ComplexMatrix {
    // χ = 0 and χ = 1 skip the blend and reproduce the plain maps bit for bit
    let mut out = if cfg.chi == 1.0 {
        ops.apply(m)
    } else if cfg.chi == 0.0 {
        linalg::conjugate(&ops.unitary, m)
    } else {
        linalg::conjugate(&ops.unitary, m) * c(1.0 - cfg.chi) + ops.apply(m) * c(cfg.chi)
    };
    if cfg.renormalize_trace {
        let t = linalg::trace(&out);
        if t.norm() > 0.0 {
            out /= t;
        }
    }
    out
}

pub fn tunable_step(rho: &DensityMatrix, ops: &EvolutionOperators, cfg: &StepConfig) -> Result<DensityMatrix> {
    if rho.dim() != ops.dim() {
        return Err(Error::dims(ops.dim(), rho.dim()));
    }
    if !(0.0..=1.0).contains(&cfg.chi) {
        return Err(Error::ChiOutOfRange(cfg.chi));
    }
    Ok(DensityMatrix::from_matrix_unchecked(tunable_apply(rho.matrix(), ops, cfg)))
}

/// Iterates [`tunable_step`] and records `observer` populations at every step.
pub fn evolve_trajectory<O: Observer + ?Sized>(
    rho0: &DensityMatrix,
    ops: &EvolutionOperators,
    cfg: &StepConfig,
    steps: usize,
    observer: &O,
) -> Result<Trajectory> {
    if rho0.dim() != ops.dim() {
        return Err(Error::dims(ops.dim(), rho0.dim()));
    }
    if !(0.0..=1.0).contains(&cfg.chi) {
        return Err(Error::ChiOutOfRange(cfg.chi));
    }
    trajectory::drive(rho0, cfg.dt_fs, steps, observer, |m| Ok(tunable_apply(m, ops, cfg)))
}

/// Pure coherent evolution `ρ → U ρ U†`.
pub fn evolve_unitary<O: Observer + ?Sized>(
    rho0: &DensityMatrix,
    u: &ComplexMatrix,
    dt_fs: f64,
    steps: usize,
    observer: &O,
) -> Result<Trajectory> {
    if rho0.dim() != u.nrows() {
        return Err(Error::dims(u.nrows(), rho0.dim()));
    }
    trajectory::drive(rho0, dt_fs, steps, observer, |m| Ok(linalg::conjugate(u, m)))
}
