//! Quantum-circuit compilation of one evolution step.
//!
//! A step on `dim` excitons uses `n = ⌈log₂ dim⌉` system qubits, two bath
//! qubits and `n` ancillas. Each ordered jump `i → j` is a controlled
//! rotation on `B2` followed by a controlled exchange that flags the jump on
//! `B1`; `B2` is reset after every jump. The coherent evolution is applied
//! only on the no-jump branch (`B1 = 0`) and `B1` is discarded at the end.

mod channel;
mod compile;
mod gate;
mod layout;
mod sim;

pub use channel::{
    channel_choi, choi_trace_deviation, circuit_step_map, compare_step_channels, sequential_kraus_step,
    sequential_kraus_step_ordered, ChannelComparison, ChannelComparisonRow, ChannelMatrix,
};
pub use compile::{
    basis_change_circuit, build_jump_circuit, build_step_circuit, build_step_circuit_ordered, coherent_gate,
    counting_circuit, decompose, expected_gate_count, gate_count, lexicographic_jumps, GateCount, GateList,
};
pub use gate::{all_unitary, ry_matrix, Control, Gate, LocalOp};
pub use layout::{QubitLayout, MAX_SYSTEM_QUBITS};
pub use sim::{
    apply_circuit, apply_circuit_operator, embed_codes, extract_codes, register_width, run_on_codes, run_on_wires,
    Register,
};
