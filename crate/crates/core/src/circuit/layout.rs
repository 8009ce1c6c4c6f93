use std::ops::Range;

use crate::error::{Error, Result};

/// Largest number of system qubits the dense simulator accepts.
pub const MAX_SYSTEM_QUBITS: usize = 5;

/// Wire assignment for one evolution step.
///
/// Wires are ordered `B1, s_1 … s_n, B2, a_1 … a_n` with `s_1` the most
/// significant bit of the system register. Exciton `m` (0-based) is encoded as
/// the computational basis state `m + 2^n − dim`, so the unused codes sit at
/// the bottom: for seven excitons `|000⟩` is unused and exciton 1 is `|001⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitLayout {
    dim: usize,
    n_system: usize,
}

impl QubitLayout {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::LayoutMismatch(format!("need at least two excitons, got {dim}")));
        }
        let n_system = dim.next_power_of_two().trailing_zeros() as usize;
        if n_system > MAX_SYSTEM_QUBITS {
            return Err(Error::LayoutMismatch(format!(
                "{dim} excitons need {n_system} system qubits, more than the supported {MAX_SYSTEM_QUBITS}"
            )));
        }
        Ok(Self { dim, n_system })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn n_ancillas(&self) -> usize {
        self.n_system
    }

    pub fn b1(&self) -> usize {
        0
    }

    pub fn system_wires(&self) -> Range<usize> {
        1..1 + self.n_system
    }

    pub fn b2(&self) -> usize {
        1 + self.n_system
    }

    pub fn ancilla_wires(&self) -> Range<usize> {
        2 + self.n_system..2 + 2 * self.n_system
    }

    pub fn total_wires(&self) -> usize {
        2 + 2 * self.n_system
    }

    /// Size of the system register's code space, `2^n`.
    pub fn code_space(&self) -> usize {
        1 << self.n_system
    }

    /// Number of unused codes below the first exciton.
    pub fn code_offset(&self) -> usize {
        self.code_space() - self.dim
    }

    pub fn code(&self, exciton: usize) -> Result<usize> {
        if exciton >= self.dim {
            return Err(Error::IndexOutOfRange { index: exciton, dim: self.dim });
        }
        Ok(exciton + self.code_offset())
    }

    /// Value of system wire `s_k` (0-based `k`) in the code of `exciton`.
    pub fn code_bit(&self, exciton: usize, k: usize) -> Result<bool> {
        Ok(self.code(exciton)? >> (self.n_system - 1 - k) & 1 == 1)
    }
}
