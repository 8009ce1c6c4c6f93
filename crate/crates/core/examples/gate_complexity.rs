//! Gate and qubit counts of one compiled step as the number of excitons grows.
//! `expanded` counts the unitary gates left after the Toffoli-ladder
//! decomposition; resets and the final trace are not gates.

use enaqt::circuit::{counting_circuit, gate_count};

fn main() -> Result<(), enaqt::error::Error> {
    println!("dim  jumps  per-jump  elementary  expanded  qubits");
    for dim in 2..=16 {
        let (list, layout) = counting_circuit(dim)?;
        let count = gate_count(&list, &layout)?;
        println!(
            "{dim:>3}  {:>5}  {:>8}  {:>10}  {:>8}  {:>6}",
            count.jumps,
            count.per_jump(),
            count.elementary_gates(),
            count.expanded_gates,
            count.qubits
        );
    }
    Ok(())
}
