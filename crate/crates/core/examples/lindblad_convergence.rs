//! First-order convergence of the discrete step to the Lindblad equation,
//! measured against a fine RK4 reference.

use enaqt::density::DensityMatrix;
use enaqt::lindblad::{convergence_report, TransportModel};
use enaqt::linalg::{self, RealMatrix};

fn main() -> Result<(), enaqt::error::Error> {
    // a three-site chain, energies and couplings in cm⁻¹, rates in fs⁻¹
    let h = RealMatrix::from_row_slice(3, 3, &[0.0, 60.0, 0.0, 60.0, 120.0, 40.0, 0.0, 40.0, 250.0]);
    let rates = RealMatrix::from_row_slice(3, 3, &[0.0, 0.004, 0.001, 0.002, 0.0, 0.005, 0.0005, 0.001, 0.0]);
    let model = TransportModel { hamiltonian: linalg::from_real(&h), rates_per_fs: rates };
    let rho0 = DensityMatrix::basis_state(3, 0)?;

    let report = convergence_report(&model, &rho0, 1000.0, &[8.0, 4.0, 2.0, 1.0])?;
    println!("reference: RK4 with dt = {} fs to t = {} fs", report.oracle_dt_fs, report.total_fs);
    print!("{}", report.to_csv());
    println!("halving dt should halve the distance (ratio near 2)");
    Ok(())
}
