#![allow(dead_code)]

use std::path::PathBuf;

use enaqt::config::RunConfig;
use enaqt::density::DensityMatrix;
use enaqt::kernel::JumpRateSpec;
use enaqt::lindblad::TransportModel;
use enaqt::linalg::{self, c, ComplexMatrix, RealMatrix};
use enaqt::run::Prepared;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_hermitian(n: usize, rng: &mut StdRng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = c(rng.random_range(-1.0..1.0));
        for j in 0..i {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

pub fn random_unitary(n: usize, rng: &mut StdRng) -> ComplexMatrix {
    linalg::mat_exp_unitary(&random_hermitian(n, rng), 1.0, 1.0).unwrap()
}

pub fn random_density(n: usize, rng: &mut StdRng) -> DensityMatrix {
    let a = random_hermitian(n, rng) + random_hermitian(n, rng) * Complex64::i();
    let p = &a * a.adjoint();
    let t = linalg::trace(&p);
    DensityMatrix::new(p / t, 1e-12, 1e-12).unwrap()
}

/// Off-diagonal probabilities in `[0, max)`.
pub fn random_rates(n: usize, max: f64, rng: &mut StdRng) -> JumpRateSpec {
    let gamma = RealMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { rng.random_range(0.0..max) });
    JumpRateSpec::new(gamma).unwrap()
}

/// Three sites in a chain with downhill-biased site jumps (cm⁻¹, fs⁻¹).
pub fn toy3() -> TransportModel {
    let h = RealMatrix::from_row_slice(3, 3, &[0.0, 60.0, 0.0, 60.0, 120.0, 40.0, 0.0, 40.0, 250.0]);
    let rates = RealMatrix::from_row_slice(3, 3, &[0.0, 0.004, 0.001, 0.002, 0.0, 0.005, 0.0005, 0.001, 0.0]);
    TransportModel { hamiltonian: linalg::from_real(&h), rates_per_fs: rates }
}

/// A state with coherences between all three sites.
pub fn toy3_superposition() -> DensityMatrix {
    let s = 1.0 / 3f64.sqrt();
    let psi = nalgebra::DVector::from_vec(vec![c(s), Complex64::new(0.0, s), c(-s)]);
    DensityMatrix::new(&psi * psi.adjoint(), 1e-12, 1e-12).unwrap()
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn fmo_run_config() -> RunConfig {
    RunConfig::load(&data_dir().join("fmo_run.json")).unwrap()
}

pub fn fmo_prepared() -> Prepared {
    Prepared::new(fmo_run_config().resolve_model().unwrap()).unwrap()
}
