use std::fmt::{self, Write as _};

use num_complex::Complex64;

use crate::linalg::{self, c, ComplexMatrix};

/// A control condition: the gate fires only when `wire` holds `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub wire: usize,
    pub value: bool,
}

impl Control {
    pub fn on(wire: usize) -> Self {
        Self { wire, value: true }
    }

    pub fn off(wire: usize) -> Self {
        Self { wire, value: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `Ry(θ) = exp(−iθY/2)` on `target`.
    ControlledRy { controls: Vec<Control>, target: usize, theta: f64 },
    /// Bit flip on `target`; two controls make a Toffoli, one a CNOT.
    MultiControlledX { controls: Vec<Control>, target: usize },
    /// Exchanges local basis states `swap.0` and `swap.1` of `targets`
    /// (first target most significant) and leaves every other state alone.
    ControlledPermutation { controls: Vec<Control>, targets: Vec<usize>, swap: (usize, usize) },
    /// `unitary` on `targets`, e.g. the coherent step `|0⟩⟨0|_{B1} ⊗ U + |1⟩⟨1|_{B1} ⊗ 1`.
    ControlledUnitary { controls: Vec<Control>, targets: Vec<usize>, unitary: ComplexMatrix },
    /// Uncontrolled change of basis on `targets`.
    BasisChange { targets: Vec<usize>, unitary: ComplexMatrix },
    /// Discard `wire` and prepare it again in `|0⟩`.
    Reset { wire: usize },
    /// Discard `wire` for good; the simulator leaves it in `|0⟩`.
    TraceOut { wire: usize },
}

/// A controlled operation on a few wires, the form the simulator applies.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOp {
    pub controls: Vec<Control>,
    pub targets: Vec<usize>,
    pub matrix: ComplexMatrix,
}

pub fn ry_matrix(theta: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
}

fn transposition_matrix(size: usize, a: usize, b: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(size, size, |row, col| {
        let image = if col == a {
            b
        } else if col == b {
            a
        } else {
            col
        };
        if row == image {
            c(1.0)
        } else {
            c(0.0)
        }
    })
}

impl Gate {
    pub fn kind(&self) -> &'static str {
        match self {
            Gate::ControlledRy { .. } => "RY",
            Gate::MultiControlledX { .. } => "X",
            Gate::ControlledPermutation { .. } => "PERM",
            Gate::ControlledUnitary { .. } => "CU",
            Gate::BasisChange { .. } => "D",
            Gate::Reset { .. } => "RESET",
            Gate::TraceOut { .. } => "TRACE",
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Gate::Reset { .. } | Gate::TraceOut { .. })
    }

    pub fn controls(&self) -> &[Control] {
        match self {
            Gate::ControlledRy { controls, .. }
            | Gate::MultiControlledX { controls, .. }
            | Gate::ControlledPermutation { controls, .. }
            | Gate::ControlledUnitary { controls, .. } => controls,
            _ => &[],
        }
    }

    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::ControlledRy { target, .. } | Gate::MultiControlledX { target, .. } => vec![*target],
            Gate::ControlledPermutation { targets, .. }
            | Gate::ControlledUnitary { targets, .. }
            | Gate::BasisChange { targets, .. } => targets.clone(),
            Gate::Reset { wire } | Gate::TraceOut { wire } => vec![*wire],
        }
    }

    /// Highest wire index touched.
    pub fn max_wire(&self) -> usize {
        self.controls()
            .iter()
            .map(|c| c.wire)
            .chain(self.targets())
            .max()
            .unwrap_or(0)
    }

    /// The unitary part as a controlled local matrix; `None` for resets and
    /// trace-outs.
    pub fn local_op(&self) -> Option<LocalOp> {
        let matrix = match self {
            Gate::ControlledRy { theta, .. } => ry_matrix(*theta),
            Gate::MultiControlledX { .. } => transposition_matrix(2, 0, 1),
            Gate::ControlledPermutation { targets, swap, .. } => {
                transposition_matrix(1 << targets.len(), swap.0, swap.1)
            }
            Gate::ControlledUnitary { unitary, .. } | Gate::BasisChange { unitary, .. } => unitary.clone(),
            Gate::Reset { .. } | Gate::TraceOut { .. } => return None,
        };
        Some(LocalOp { controls: self.controls().to_vec(), targets: self.targets(), matrix })
    }

    /// Number of elementary gates this gate stands for.
    ///
    /// A gate conditioned on `k` wires costs `k − 1` (a ladder of `k − 2`
    /// Toffolis onto ancillas plus the doubly-controlled target operation;
    /// the mirrored uncompute half is not counted). A permutation of two
    /// basis states of `t` wires is a bit flip on one of them conditioned on
    /// the other `t − 1`. Dense unitaries count as one.
    pub fn elementary_cost(&self) -> usize {
        match self {
            Gate::ControlledRy { controls, .. } | Gate::MultiControlledX { controls, .. } => {
                controls.len().saturating_sub(1).max(1)
            }
            Gate::ControlledPermutation { controls, targets, .. } => {
                (controls.len() + targets.len() - 1).saturating_sub(1).max(1)
            }
            Gate::ControlledUnitary { .. } | Gate::BasisChange { .. } => 1,
            Gate::Reset { .. } | Gate::TraceOut { .. } => 0,
        }
    }
}

fn write_matrix(out: &mut String, m: &ComplexMatrix) {
    out.push_str(&format!(" n={}", m.nrows()));
    out.push_str(" u=");
    let entries: Vec<String> = m
        .row_iter()
        .flat_map(|row| row.iter().map(format_complex).collect::<Vec<_>>())
        .collect();
    out.push_str(&entries.join(","));
}

fn format_complex(z: &Complex64) -> String {
    format!("{}:{}", z.re, z.im)
}

/// One line per gate: `KIND cW=V … tW … key=value …`.
impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut line = String::from(self.kind());
        for control in self.controls() {
            let _ = write!(line, " c{}={}", control.wire, u8::from(control.value));
        }
        for target in self.targets() {
            let _ = write!(line, " t{target}");
        }
        match self {
            Gate::ControlledRy { theta, .. } => {
                let _ = write!(line, " theta={theta}");
            }
            Gate::ControlledPermutation { swap, .. } => {
                let _ = write!(line, " swap={}:{}", swap.0, swap.1);
            }
            Gate::ControlledUnitary { unitary, .. } | Gate::BasisChange { unitary, .. } => {
                write_matrix(&mut line, unitary);
            }
            _ => {}
        }
        f.write_str(&line)
    }
}

/// True when every unitary gate's matrix is unitary to `tol`.
pub fn all_unitary(gates: &[Gate], tol: f64) -> bool {
    gates
        .iter()
        .filter_map(Gate::local_op)
        .all(|op| linalg::unitarity_deviation(&op.matrix) <= tol)
}
