//! Continuous-time Lindblad reference integrator.
//!
//! The generator is the standard GKSL form
//!
//! ```text
//! dρ/dt = −(i/ħ)[H, ρ] + Σ_k Γ_k ( L_k ρ L_k† − ½ L_k†L_k ρ − ½ ρ L_k†L_k )
//! ```
//!
//! integrated with classical fixed-step RK4. It deliberately does not use the
//! eigensolver or the matrix exponential, so agreement with the discrete
//! kernel is a check between two independent routes.

use log::warn;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::kernel::{self, JumpRateSpec, StepConfig};
use crate::linalg::{self, c, ComplexMatrix, RealMatrix, HBAR_CM1_FS};
use crate::trajectory::{Observer, Trajectory, TrajectoryPoint};

/// `‖rhs‖·dt` above which an RK4 step is flagged as too coarse.
pub const STEP_WARNING_THRESHOLD: f64 = 0.1;

/// A jump channel `L` with rate `Γ` in fs⁻¹.
#[derive(Debug, Clone)]
pub struct JumpTerm {
    pub op: ComplexMatrix,
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: ComplexMatrix,
    jumps: Vec<JumpTerm>,
    /// Cached `L†L` per jump.
    decay: Vec<ComplexMatrix>,
}

impl LindbladModel {
    pub fn new(hamiltonian: ComplexMatrix, jumps: Vec<JumpTerm>) -> Result<Self> {
        let dim = linalg::check_square(&hamiltonian)?;
        linalg::check_hermitian(&hamiltonian, 1e-10)?;
        for term in &jumps {
            if term.op.shape() != (dim, dim) {
                return Err(Error::dims(dim, format!("{:?}", term.op.shape())));
            }
            if !(term.rate >= 0.0) {
                return Err(Error::SpecInvalid(format!("negative jump rate {}", term.rate)));
            }
        }
        let decay = jumps.iter().map(|t| t.op.adjoint() * &t.op).collect();
        Ok(Self { hamiltonian, jumps, decay })
    }

    /// Rank-one jumps `|N⟩⟨M|` with rates `rates_per_fs[(M, N)]`.
    pub fn from_rate_matrix(hamiltonian: ComplexMatrix, rates_per_fs: &RealMatrix) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if rates_per_fs.shape() != (dim, dim) {
            return Err(Error::dims(dim, format!("{:?}", rates_per_fs.shape())));
        }
        let mut jumps = Vec::new();
        for m in 0..dim {
            for n in 0..dim {
                let rate = rates_per_fs[(m, n)];
                if m != n && rate != 0.0 {
                    jumps.push(JumpTerm { op: linalg::outer_basis(dim, n, m), rate });
                }
            }
        }
        Self::new(hamiltonian, jumps)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpTerm] {
        &self.jumps
    }

    fn rhs_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = linalg::commutator(&self.hamiltonian, rho) * num_complex::Complex64::new(0.0, -1.0 / HBAR_CM1_FS);
        for (term, decay) in self.jumps.iter().zip(&self.decay) {
            let anti = decay * rho + rho * decay;
            out += (linalg::conjugate(&term.op, rho) - anti * c(0.5)) * c(term.rate);
        }
        out
    }
}

/// Time derivative of ρ under the model.
pub fn lindblad_rhs(rho: &ComplexMatrix, model: &LindbladModel) -> Result<ComplexMatrix> {
    if rho.shape() != (model.dim(), model.dim()) {
        return Err(Error::dims(model.dim(), format!("{:?}", rho.shape())));
    }
    Ok(model.rhs_unchecked(rho))
}

/// Output of [`rk4_integrate`].
#[derive(Debug, Clone)]
pub struct Rk4Run {
    pub trajectory: Trajectory,
    pub final_state: ComplexMatrix,
    /// Set when the first step exceeded `‖rhs‖·dt <` [`STEP_WARNING_THRESHOLD`].
    pub step_too_large: bool,
}

/// Fixed-step RK4 from `rho0` over `steps` steps of `dt_fs`, recording every
/// `record_every` steps.
pub fn rk4_integrate<O: Observer + ?Sized>(
    rho0: &DensityMatrix,
    model: &LindbladModel,
    dt_fs: f64,
    steps: usize,
    record_every: usize,
    observer: &O,
) -> Result<Rk4Run> {
    if rho0.dim() != model.dim() {
        return Err(Error::dims(model.dim(), rho0.dim()));
    }
    if !(dt_fs > 0.0) {
        return Err(Error::SpecInvalid(format!("dt must be positive, got {dt_fs}")));
    }
    let record_every = record_every.max(1);
    let mut rho = rho0.matrix().clone();
    let initial_rhs = model.rhs_unchecked(&rho);
    let step_too_large = initial_rhs.norm() * dt_fs >= STEP_WARNING_THRESHOLD;
    if step_too_large {
        warn!(
            "RK4 step {dt_fs} fs is coarse: |rhs|*dt = {:.3} >= {STEP_WARNING_THRESHOLD}",
            initial_rhs.norm() * dt_fs
        );
    }
    let mut points = vec![record(0.0, &rho, observer)];
    let half = c(0.5 * dt_fs);
    let sixth = c(dt_fs / 6.0);
    for k in 1..=steps {
        let k1 = model.rhs_unchecked(&rho);
        let k2 = model.rhs_unchecked(&(&rho + &k1 * half));
        let k3 = model.rhs_unchecked(&(&rho + &k2 * half));
        let k4 = model.rhs_unchecked(&(&rho + &k3 * c(dt_fs)));
        rho += (k1 + (k2 + k3) * c(2.0) + k4) * sixth;
        rho = linalg::hermitian_part(&rho);
        if k % record_every == 0 || k == steps {
            points.push(record(k as f64 * dt_fs, &rho, observer));
        }
    }
    Ok(Rk4Run { trajectory: Trajectory { points }, final_state: rho, step_too_large })
}

fn record<O: Observer + ?Sized>(t_fs: f64, rho: &ComplexMatrix, observer: &O) -> TrajectoryPoint {
    TrajectoryPoint {
        t_fs,
        populations: observer.populations(rho),
        trace: linalg::trace(rho).re,
        min_eigenvalue: rho.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// A Hamiltonian plus rank-one basis jumps with rates in fs⁻¹: the common
/// description behind both the discrete kernel and the Lindblad oracle.
#[derive(Debug, Clone)]
pub struct TransportModel {
    pub hamiltonian: ComplexMatrix,
    pub rates_per_fs: RealMatrix,
}

impl TransportModel {
    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn lindblad(&self) -> Result<LindbladModel> {
        LindbladModel::from_rate_matrix(self.hamiltonian.clone(), &self.rates_per_fs)
    }

    pub fn evolution_operators(&self, dt_fs: f64) -> Result<kernel::EvolutionOperators> {
        let rates = JumpRateSpec::from_rates(&self.rates_per_fs, dt_fs)?;
        let u = linalg::mat_exp_unitary(&self.hamiltonian, dt_fs, HBAR_CM1_FS)?;
        kernel::build_evolution_operators(&rates, &u)
    }

    /// State after `total_fs` of discrete steps of size `dt_fs`.
    pub fn discrete_state(&self, rho0: &DensityMatrix, total_fs: f64, dt_fs: f64) -> Result<ComplexMatrix> {
        let steps = steps_for(total_fs, dt_fs)?;
        let ops = self.evolution_operators(dt_fs)?;
        let cfg = StepConfig::new(dt_fs, 1.0, false)?;
        let mut rho = rho0.matrix().clone();
        for _ in 0..steps {
            rho = kernel::tunable_apply(&rho, &ops, &cfg);
        }
        Ok(rho)
    }
}

fn steps_for(total_fs: f64, dt_fs: f64) -> Result<usize> {
    let ratio = total_fs / dt_fs;
    let steps = ratio.round();
    if !(dt_fs > 0.0) || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::SpecInvalid(format!("{total_fs} fs is not a whole number of {dt_fs} fs steps")));
    }
    Ok(steps as usize)
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub dt_fs: f64,
    pub distance: f64,
    /// `distance(previous dt) / distance(this dt)`; `None` on the first row.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub total_fs: f64,
    pub oracle_dt_fs: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.ratio).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dt_fs,frob_distance,ratio\n");
        for row in &self.rows {
            let ratio = row.ratio.map(|r| r.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", row.dt_fs, row.distance, ratio));
        }
        out
    }
}

/// Frobenius distance at `total_fs` between the discrete kernel at each `dt`
/// and an RK4 reference run at `min(dt_list) / 10` or finer.
pub fn convergence_report(
    model: &TransportModel,
    rho0: &DensityMatrix,
    total_fs: f64,
    dt_list: &[f64],
) -> Result<ConvergenceReport> {
    let finest = dt_list.iter().copied().fold(f64::INFINITY, f64::min);
    if dt_list.is_empty() || !(finest > 0.0) {
        return Err(Error::SpecInvalid("convergence report needs positive step sizes".into()));
    }
    // an RK4 step that tiles both total_fs and every listed dt
    let oracle_dt = finest / 10.0;
    let oracle_steps = steps_for(total_fs, oracle_dt)?;
    let oracle = rk4_integrate(rho0, &model.lindblad()?, oracle_dt, oracle_steps, oracle_steps, &crate::trajectory::BasisPopulations)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let discrete = model.discrete_state(rho0, total_fs, dt)?;
        let distance = linalg::frob_dist(&discrete, &oracle.final_state)?;
        let ratio = rows.last().map(|prev| prev.distance / distance);
        rows.push(ConvergenceRow { dt_fs: dt, distance, ratio });
    }
    Ok(ConvergenceReport { total_fs, oracle_dt_fs: oracle_dt, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testing::lcg_density;
    use crate::linalg::max_abs;
    use crate::trajectory::BasisPopulations;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn diag_h(values: &[f64]) -> ComplexMatrix {
        let n = values.len();
        ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(values[i]) } else { c(0.0) })
    }

    #[test]
    fn free_model_has_zero_rhs() {
        let model = LindbladModel::new(ComplexMatrix::zeros(3, 3), vec![]).unwrap();
        let rhs = lindblad_rhs(&lcg_density(3, 1), &model).unwrap();
        assert_eq!(max_abs(&rhs), 0.0);
    }

    #[test]
    fn single_decay_substitution() {
        let gamma = 0.01;
        let model = LindbladModel::new(
            ComplexMatrix::zeros(2, 2),
            vec![JumpTerm { op: linalg::outer_basis(2, 1, 0), rate: gamma }],
        )
        .unwrap();
        let rhs = lindblad_rhs(&linalg::outer_basis(2, 0, 0), &model).unwrap();
        let expected = (linalg::outer_basis(2, 1, 1) - linalg::outer_basis(2, 0, 0)) * c(gamma);
        assert!(max_abs(&(rhs - expected)) < 1e-18);
    }

    #[test]
    fn rhs_matches_term_assembly_dim3() {
        let mut h = diag_h(&[0.0, 80.0, 200.0]);
        h[(0, 1)] = Complex64::new(40.0, 10.0);
        h[(1, 0)] = Complex64::new(40.0, -10.0);
        h[(1, 2)] = c(25.0);
        h[(2, 1)] = c(25.0);
        let jumps = vec![
            JumpTerm { op: linalg::outer_basis(3, 1, 0), rate: 0.004 },
            JumpTerm { op: linalg::outer_basis(3, 2, 1), rate: 0.002 },
            JumpTerm { op: linalg::outer_basis(3, 0, 2), rate: 0.001 },
        ];
        let model = LindbladModel::new(h.clone(), jumps.clone()).unwrap();
        let rho = lcg_density(3, 7);
        let rhs = lindblad_rhs(&rho, &model).unwrap();

        // entry-wise assembly
        let i_over_hbar = Complex64::new(0.0, 1.0 / HBAR_CM1_FS);
        let mut expected = ComplexMatrix::zeros(3, 3);
        for a in 0..3 {
            for b in 0..3 {
                let mut z = Complex64::new(0.0, 0.0);
                for k in 0..3 {
                    z -= i_over_hbar * (h[(a, k)] * rho[(k, b)] - rho[(a, k)] * h[(k, b)]);
                }
                expected[(a, b)] = z;
            }
        }
        for term in &jumps {
            // L = |n⟩⟨m|: L ρ L† = ρ_mm |n⟩⟨n|, L†L = |m⟩⟨m|
            let (n, m) = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .find(|&(i, j)| term.op[(i, j)] != c(0.0))
                .unwrap();
            expected[(n, n)] += rho[(m, m)] * term.rate;
            for b in 0..3 {
                expected[(m, b)] -= rho[(m, b)] * (0.5 * term.rate);
                expected[(b, m)] -= rho[(b, m)] * (0.5 * term.rate);
            }
        }
        assert!(max_abs(&(rhs - expected)) < 1e-15);
    }

    #[test]
    fn populations_constant_without_jumps() {
        let model = LindbladModel::new(diag_h(&[0.0, 100.0, 250.0]), vec![]).unwrap();
        let rho0 = DensityMatrix::new(lcg_density(3, 4), 1e-12, 1e-12).unwrap();
        let run = rk4_integrate(&rho0, &model, 0.5, 2000, 100, &BasisPopulations).unwrap();
        let p0 = &run.trajectory.points[0].populations;
        for point in &run.trajectory.points {
            for (a, b) in point.populations.iter().zip(p0) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn exponential_decay() {
        let gamma = 0.01;
        let model = LindbladModel::new(
            ComplexMatrix::zeros(2, 2),
            vec![JumpTerm { op: linalg::outer_basis(2, 0, 1), rate: gamma }],
        )
        .unwrap();
        let rho0 = DensityMatrix::basis_state(2, 1).unwrap();
        let dt = 1.0 / gamma / 1000.0;
        let run = rk4_integrate(&rho0, &model, dt, 1000, 1000, &BasisPopulations).unwrap();
        let excited = run.final_state[(1, 1)].re;
        assert_abs_diff_eq!(excited, (-1.0f64).exp(), epsilon = 1e-6);
        assert!(!run.step_too_large);
    }

    #[test]
    fn flags_coarse_steps() {
        let model = LindbladModel::new(
            ComplexMatrix::zeros(2, 2),
            vec![JumpTerm { op: linalg::outer_basis(2, 0, 1), rate: 0.5 }],
        )
        .unwrap();
        let rho0 = DensityMatrix::basis_state(2, 1).unwrap();
        let run = rk4_integrate(&rho0, &model, 1.0, 2, 1, &BasisPopulations).unwrap();
        assert!(run.step_too_large);
    }

    fn dim3_model() -> LindbladModel {
        let mut h = diag_h(&[0.0, 120.0, 60.0]);
        h[(0, 1)] = c(60.0);
        h[(1, 0)] = c(60.0);
        h[(1, 2)] = Complex64::new(30.0, 15.0);
        h[(2, 1)] = Complex64::new(30.0, -15.0);
        let rates = RealMatrix::from_row_slice(3, 3, &[0.0, 0.004, 0.002, 0.001, 0.0, 0.003, 0.002, 0.001, 0.0]);
        LindbladModel::from_rate_matrix(h, &rates).unwrap()
    }

    #[test]
    fn rk4_is_fourth_order() {
        let model = dim3_model();
        let rho0 = DensityMatrix::basis_state(3, 0).unwrap();
        let run = |dt: f64| {
            let steps = (400.0 / dt).round() as usize;
            rk4_integrate(&rho0, &model, dt, steps, steps, &BasisPopulations).unwrap().final_state
        };
        let reference = run(0.05);
        let coarse = linalg::frob_dist(&run(4.0), &reference).unwrap();
        let fine = linalg::frob_dist(&run(2.0), &reference).unwrap();
        let ratio = coarse / fine;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn trace_conserved_over_long_runs() {
        let model = dim3_model();
        let rho0 = DensityMatrix::new(lcg_density(3, 2), 1e-12, 1e-12).unwrap();
        let run = rk4_integrate(&rho0, &model, 0.5, 10_000, 500, &BasisPopulations).unwrap();
        for p in &run.trajectory.points {
            assert!((p.trace - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn pure_dephasing_keeps_populations() {
        let jumps = (0..3)
            .map(|k| JumpTerm { op: linalg::outer_basis(3, k, k), rate: 0.01 })
            .collect();
        let model = LindbladModel::new(diag_h(&[0.0, 50.0, 75.0]), jumps).unwrap();
        let rho0 = DensityMatrix::new(lcg_density(3, 8), 1e-12, 1e-12).unwrap();
        let run = rk4_integrate(&rho0, &model, 0.5, 2000, 2000, &BasisPopulations).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(run.final_state[(k, k)].re, rho0.matrix()[(k, k)].re, epsilon = 1e-10);
        }
        // coherences decayed
        assert!(run.final_state[(0, 1)].norm() < rho0.matrix()[(0, 1)].norm());
    }

    #[test]
    fn zero_rates_agree_with_unitary_kernel() {
        let mut h = diag_h(&[0.0, 100.0]);
        h[(0, 1)] = c(50.0);
        h[(1, 0)] = c(50.0);
        let model = TransportModel { hamiltonian: h, rates_per_fs: RealMatrix::zeros(2, 2) };
        let rho0 = DensityMatrix::basis_state(2, 0).unwrap();
        let report = convergence_report(&model, &rho0, 200.0, &[4.0, 2.0, 1.0]).unwrap();
        for row in &report.rows {
            assert!(row.distance <= 1e-9, "distance {}", row.distance);
        }
    }

    #[test]
    fn single_jump_first_order_convergence() {
        let mut h = diag_h(&[0.0, 150.0]);
        h[(0, 1)] = c(70.0);
        h[(1, 0)] = c(70.0);
        let rates = RealMatrix::from_row_slice(2, 2, &[0.0, 0.005, 0.0, 0.0]);
        let model = TransportModel { hamiltonian: h, rates_per_fs: rates };
        let rho0 = DensityMatrix::basis_state(2, 0).unwrap();
        let report = convergence_report(&model, &rho0, 1000.0, &[4.0, 2.0, 1.0]).unwrap();
        for ratio in report.ratios() {
            assert!((1.7..=2.3).contains(&ratio), "{report:?}");
        }
        let distances: Vec<f64> = report.rows.iter().map(|r| r.distance).collect();
        assert!(distances.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rejects_negative_rate() {
        let err = LindbladModel::new(
            ComplexMatrix::zeros(2, 2),
            vec![JumpTerm { op: linalg::outer_basis(2, 1, 0), rate: -1.0 }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::SpecInvalid(_)));
    }
}
