//! Exciton transport model for multichromophoric complexes such as FMO.
//!
//! Sites are coupled by a single-exciton Hamiltonian. Its eigenstates (the
//! excitons) are the basis in which jumps act: a jump from exciton `M` down to
//! exciton `N` (`ω = Ω_M − Ω_N > 0`) has rate
//!
//! ```text
//! Γ_{M→N} = 2π J(ω) (1 + n(ω)) · Σ_m |c_m(M)|² |c_m(N)|²
//! J(ω)    = (λ / ω_c) ω exp(−ω / ω_c)
//! n(ω)    = 1 / (exp(ω / k_B T) − 1)
//! ```
//!
//! Uphill jumps use `2π J(ω) n(ω)` with the same weight under
//! [`UphillRates::DetailedBalance`], or are absent under [`UphillRates::None`].

use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::kernel::JumpRateSpec;
use crate::linalg::{self, c, ComplexMatrix, RealMatrix, BOLTZMANN_CM1_PER_K, HBAR_CM1_FS};
use crate::lindblad::TransportModel;
use crate::trajectory::{Observer, Trajectory};

/// Site energies and inter-site couplings, both in cm⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    site_energies: Vec<f64>,
    couplings: RealMatrix,
}

impl HamiltonianSpec {
    pub fn new(site_energies: Vec<f64>, couplings: RealMatrix) -> Result<Self> {
        let n = site_energies.len();
        if n < 2 {
            return Err(Error::SpecInvalid(format!("need at least two sites, got {n}")));
        }
        if couplings.shape() != (n, n) {
            return Err(Error::SpecInvalid(format!(
                "coupling matrix is {}x{}, expected {n}x{n}",
                couplings.nrows(),
                couplings.ncols()
            )));
        }
        if let Some(e) = site_energies.iter().find(|e| !e.is_finite()) {
            return Err(Error::SpecInvalid(format!("non-finite site energy {e}")));
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::SpecInvalid(format!("coupling V[{0}][{0}] must be zero", i + 1)));
            }
            for j in 0..i {
                if couplings[(i, j)] != couplings[(j, i)] || !couplings[(i, j)].is_finite() {
                    return Err(Error::SpecInvalid(format!(
                        "couplings must be symmetric and finite: V[{}][{}] = {}, V[{}][{}] = {}",
                        i + 1,
                        j + 1,
                        couplings[(i, j)],
                        j + 1,
                        i + 1,
                        couplings[(j, i)]
                    )));
                }
            }
        }
        Ok(Self { site_energies, couplings })
    }

    pub fn n_sites(&self) -> usize {
        self.site_energies.len()
    }

    pub fn site_energies(&self) -> &[f64] {
        &self.site_energies
    }

    pub fn couplings(&self) -> &RealMatrix {
        &self.couplings
    }
}

/// Single-exciton Hamiltonian `H[m][m] = ε_m`, `H[m][n] = V_mn`.
pub fn site_hamiltonian(spec: &HamiltonianSpec) -> ComplexMatrix {
    let n = spec.n_sites();
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(spec.site_energies[i])
        } else {
            c(spec.couplings[(i, j)])
        }
    })
}

/// Exciton energies and the site→exciton transform.
#[derive(Debug, Clone)]
pub struct ExcitonBasis {
    /// Ω_M in cm⁻¹, ascending.
    energies: Vec<f64>,
    /// Column `M` holds `c_m(M)`, the site amplitudes of exciton `M`.
    transform: ComplexMatrix,
}

impl ExcitonBasis {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn transform(&self) -> &ComplexMatrix {
        &self.transform
    }

    /// `|c_m(M)|²`.
    pub fn site_weight(&self, site: usize, exciton: usize) -> f64 {
        self.transform[(site, exciton)].norm_sqr()
    }

    /// `Σ_m |c_m(M)|² |c_m(N)|²`.
    pub fn overlap(&self, a: usize, b: usize) -> f64 {
        (0..self.dim()).map(|m| self.site_weight(m, a) * self.site_weight(m, b)).sum()
    }

    /// Exciton Hamiltonian `diag(Ω)`.
    pub fn hamiltonian(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(self.energies[i]) } else { c(0.0) })
    }

    /// Site-basis state expressed in the exciton basis, `D† ρ D`.
    pub fn to_exciton(&self, rho_site: &DensityMatrix) -> Result<DensityMatrix> {
        rho_site.transformed(&self.transform.adjoint())
    }

    /// Exciton-basis state expressed in the site basis, `D ρ D†`.
    pub fn to_site(&self, rho_exciton: &DensityMatrix) -> Result<DensityMatrix> {
        rho_exciton.transformed(&self.transform)
    }
}

impl Observer for ExcitonBasis {
    fn populations(&self, rho: &ComplexMatrix) -> Vec<f64> {
        let site = linalg::conjugate(&self.transform, rho);
        site.diagonal().iter().map(|z| z.re).collect()
    }
}

/// Diagonalises the site Hamiltonian.
pub fn exciton_basis(h: &ComplexMatrix) -> Result<ExcitonBasis> {
    let e = linalg::eigh(h)?;
    Ok(ExcitonBasis { energies: e.values, transform: e.vectors })
}

/// How uphill (energy-gaining) jump rates are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UphillRates {
    /// `2π J(ω) n(ω)`, the thermal completion of the downhill rate.
    #[default]
    DetailedBalance,
    /// Downhill jumps only.
    None,
}

/// Phonon bath description.
#[derive(Debug, Clone, PartialEq)]
pub enum BathSpec {
    /// Ohmic spectral density with exponential cutoff at temperature `T`.
    Ohmic {
        temperature_k: f64,
        lambda_cm1: f64,
        omega_c_cm1: f64,
        uphill: UphillRates,
    },
    /// Exciton-basis rate table, `rates_per_fs[(M, N)]` for `M → N`.
    Explicit { rates_per_fs: RealMatrix },
}

impl BathSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            BathSpec::Ohmic { temperature_k, lambda_cm1, omega_c_cm1, .. } => {
                if !(*temperature_k > 0.0) || !temperature_k.is_finite() {
                    return Err(Error::SpecInvalid(format!("temperature must be positive, got {temperature_k} K")));
                }
                if !(*lambda_cm1 >= 0.0) || !(*omega_c_cm1 > 0.0) {
                    return Err(Error::SpecInvalid(format!(
                        "Ohmic parameters need lambda >= 0 and omega_c > 0, got {lambda_cm1}, {omega_c_cm1}"
                    )));
                }
            }
            BathSpec::Explicit { rates_per_fs } => {
                if rates_per_fs.shape() != (dim, dim) {
                    return Err(Error::SpecInvalid(format!(
                        "rate table is {}x{}, expected {dim}x{dim}",
                        rates_per_fs.nrows(),
                        rates_per_fs.ncols()
                    )));
                }
                if let Some(r) = rates_per_fs.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
                    return Err(Error::SpecInvalid(format!("rates must be non-negative, got {r}")));
                }
            }
        }
        Ok(())
    }

    /// Same bath at a different temperature (no-op for explicit tables).
    pub fn with_temperature(&self, t: f64) -> Self {
        match self {
            BathSpec::Ohmic { lambda_cm1, omega_c_cm1, uphill, .. } => BathSpec::Ohmic {
                temperature_k: t,
                lambda_cm1: *lambda_cm1,
                omega_c_cm1: *omega_c_cm1,
                uphill: *uphill,
            },
            other => other.clone(),
        }
    }

    /// Every rate multiplied by `s` (coupling strength).
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            BathSpec::Ohmic { temperature_k, lambda_cm1, omega_c_cm1, uphill } => BathSpec::Ohmic {
                temperature_k: *temperature_k,
                lambda_cm1: lambda_cm1 * s,
                omega_c_cm1: *omega_c_cm1,
                uphill: *uphill,
            },
            BathSpec::Explicit { rates_per_fs } => BathSpec::Explicit { rates_per_fs: rates_per_fs * s },
        }
    }
}

/// `(λ / ω_c) ω exp(−ω / ω_c)` for `ω ≥ 0`.
pub fn ohmic_spectral_density(omega_cm1: f64, lambda_cm1: f64, omega_c_cm1: f64) -> f64 {
    lambda_cm1 / omega_c_cm1 * omega_cm1 * (-omega_cm1 / omega_c_cm1).exp()
}

/// Bose–Einstein occupation `1 / (exp(ω / k_B T) − 1)`.
pub fn bose_occupation(omega_cm1: f64, temperature_k: f64) -> f64 {
    1.0 / (omega_cm1 / (BOLTZMANN_CM1_PER_K * temperature_k)).exp_m1()
}

/// Exciton-basis jump rates in fs⁻¹, `Γ[(M, N)]` for `M → N`.
pub fn rates_per_fs(basis: &ExcitonBasis, bath: &BathSpec) -> Result<RealMatrix> {
    let n = basis.dim();
    bath.validate(n)?;
    let (temperature_k, lambda_cm1, omega_c_cm1, uphill) = match bath {
        BathSpec::Explicit { rates_per_fs } => {
            let mut rates = rates_per_fs.clone();
            rates.fill_diagonal(0.0);
            return Ok(rates);
        }
        BathSpec::Ohmic { temperature_k, lambda_cm1, omega_c_cm1, uphill } => {
            (*temperature_k, *lambda_cm1, *omega_c_cm1, *uphill)
        }
    };
    let energies = basis.energies();
    let mut rates = RealMatrix::zeros(n, n);
    for from in 0..n {
        for to in 0..n {
            let omega = energies[from] - energies[to];
            // degenerate pairs have no preferred direction
            if from == to || omega.abs() < 1e-12 {
                continue;
            }
            let gap = omega.abs();
            let density = ohmic_spectral_density(gap, lambda_cm1, omega_c_cm1);
            let occupation = bose_occupation(gap, temperature_k);
            let thermal = if omega > 0.0 {
                1.0 + occupation
            } else {
                match uphill {
                    UphillRates::DetailedBalance => occupation,
                    UphillRates::None => 0.0,
                }
            };
            let rate_cm1 = 2.0 * std::f64::consts::PI * density * thermal * basis.overlap(from, to);
            rates[(from, to)] = rate_cm1 / HBAR_CM1_FS;
        }
    }
    Ok(rates)
}

/// Per-step jump probabilities `Γ · dt`.
pub fn jump_rates(basis: &ExcitonBasis, bath: &BathSpec, dt_fs: f64) -> Result<JumpRateSpec> {
    JumpRateSpec::from_rates(&rates_per_fs(basis, bath)?, dt_fs)
}

/// `1 / max_M Σ_N Γ[(M, N)]`, the fastest exciton relaxation time in fs.
pub fn fastest_relaxation_time(rates_per_fs: &RealMatrix) -> f64 {
    let fastest = (0..rates_per_fs.nrows())
        .map(|m| rates_per_fs.row(m).sum())
        .fold(0.0, f64::max);
    1.0 / fastest
}

/// Site populations `⟨m| D ρ D† |m⟩` of an exciton-basis state.
pub fn site_populations(rho: &DensityMatrix, basis: &ExcitonBasis) -> Result<Vec<f64>> {
    if rho.dim() != basis.dim() {
        return Err(Error::dims(basis.dim(), rho.dim()));
    }
    Ok(basis.populations(rho.matrix()))
}

/// Summed population of the 1-based `sink_sites` at `at_time_fs`.
pub fn transfer_efficiency(traj: &Trajectory, sink_sites: &[usize], at_time_fs: f64) -> Result<f64> {
    let point = traj.point_at(at_time_fs)?;
    let n = point.populations.len();
    let mut total = 0.0;
    for &site in sink_sites {
        if site == 0 || site > n {
            return Err(Error::IndexOutOfRange { index: site, dim: n });
        }
        total += point.populations[site - 1];
    }
    Ok(total)
}

/// Earliest time at which the summed sink population reaches `level`.
pub fn first_passage_time(traj: &Trajectory, sink_sites: &[usize], level: f64) -> Option<f64> {
    traj.points
        .iter()
        .find(|p| sink_sites.iter().map(|&s| p.populations[s - 1]).sum::<f64>() >= level)
        .map(|p| p.t_fs)
}

/// A complete transport model: Hamiltonian, bath and sink.
#[derive(Debug, Clone)]
pub struct FmoModel {
    pub name: String,
    pub hamiltonian: HamiltonianSpec,
    pub bath: BathSpec,
    /// 1-based sink sites.
    pub sink_sites: Vec<usize>,
}

impl FmoModel {
    pub fn n_sites(&self) -> usize {
        self.hamiltonian.n_sites()
    }

    pub fn site_hamiltonian(&self) -> ComplexMatrix {
        site_hamiltonian(&self.hamiltonian)
    }

    pub fn exciton_basis(&self) -> Result<ExcitonBasis> {
        exciton_basis(&self.site_hamiltonian())
    }

    /// The model expressed in the exciton basis, where `H` is diagonal.
    pub fn exciton_transport(&self, basis: &ExcitonBasis, bath: &BathSpec) -> Result<TransportModel> {
        Ok(TransportModel { hamiltonian: basis.hamiltonian(), rates_per_fs: rates_per_fs(basis, bath)? })
    }

    /// Initial excitation localised on a 1-based site, in the exciton basis.
    pub fn initial_state(&self, basis: &ExcitonBasis, site: usize) -> Result<DensityMatrix> {
        let n = self.n_sites();
        if site == 0 || site > n {
            return Err(Error::IndexOutOfRange { index: site, dim: n });
        }
        basis.to_exciton(&DensityMatrix::basis_state(n, site - 1)?)
    }
}
