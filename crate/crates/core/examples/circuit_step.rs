//! Compiles one step of a small model to gates, prints the gate list, and
//! checks the compiled channel against the Kraus construction and the
//! operator step map.

use enaqt::circuit::{
    build_step_circuit, channel_choi, choi_trace_deviation, circuit_step_map, compare_step_channels,
    sequential_kraus_step, QubitLayout,
};
use enaqt::kernel::JumpRateSpec;
use enaqt::linalg::{self, ComplexMatrix, RealMatrix};
use num_complex::Complex64;

fn main() -> Result<(), enaqt::error::Error> {
    let dim = 3;
    let rates = JumpRateSpec::new(RealMatrix::from_row_slice(3, 3, &[0.0, 0.08, 0.02, 0.01, 0.0, 0.06, 0.0, 0.03, 0.0]))?;
    // exciton-basis propagators are diagonal
    let u = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |k, _| Complex64::from_polar(1.0, 0.7 * k as f64)));
    let layout = QubitLayout::new(dim)?;
    let list = build_step_circuit(&rates, &u, &layout)?;
    println!("{} excitons on {} wires, {} jumps", dim, layout.total_wires(), list.jumps);
    print!("{}", list.to_text());

    let circuit = channel_choi(circuit_step_map(&list.gates, &layout), dim)?;
    let kraus = channel_choi(|m| sequential_kraus_step(m, &rates, &u), dim)?;
    println!("\ncircuit vs Kraus construction: {:.2e}", linalg::frob_dist(&circuit, &kraus)?);
    println!("Choi min eigenvalue {:.2e}, trace deviation {:.2e}", linalg::min_eigenvalue(&circuit)?, choi_trace_deviation(&circuit, dim)?);

    let cmp = compare_step_channels(&rates, &u, &[1.0, 0.5, 0.25])?;
    for row in &cmp.rows {
        println!("rates x{:<5} distance to step map {:.3e}", row.scale, row.distance);
    }
    println!("ratios {:?}", cmp.ratios());
    Ok(())
}
