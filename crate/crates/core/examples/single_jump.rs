//! A two-level system with one jump channel `|0⟩ → |1⟩`: the Kraus pair,
//! its completeness, and a few steps of population transfer.

use enaqt::density::DensityMatrix;
use enaqt::kernel::{single_jump_kraus, single_jump_step};
use enaqt::linalg;

fn main() -> Result<(), enaqt::error::Error> {
    let p = 0.25;
    let (m0, m1) = single_jump_kraus(p)?;
    let completeness = m0.adjoint() * &m0 + m1.adjoint() * &m1 - linalg::identity(2);
    println!("p = {p}, completeness residual {:.1e}", linalg::max_abs(&completeness));

    let u = linalg::identity(2);
    let mut rho = DensityMatrix::basis_state(2, 0)?;
    println!("step  P0        P1");
    for k in 0..=6 {
        let pops = rho.populations();
        println!("{k:>4}  {:.6}  {:.6}", pops[0], pops[1]);
        rho = single_jump_step(&rho, &u, p)?;
    }
    // with U = 1 the ground population decays as (1 - p)^k
    println!("(1-p)^6 = {:.6}", (1.0 - p).powi(6));
    Ok(())
}
