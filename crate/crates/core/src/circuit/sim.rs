//! Dense density-matrix simulation of gate lists.

use num_complex::Complex64;

use super::gate::{Gate, LocalOp};
use super::layout::QubitLayout;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix};

/// A density matrix over `n_wires` qubits, wire 0 most significant.
#[derive(Debug, Clone)]
pub struct Register {
    n_wires: usize,
    rho: ComplexMatrix,
}

impl Register {
    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    fn mask(&self, wire: usize) -> usize {
        1 << (self.n_wires - 1 - wire)
    }

    /// Row/column indices touched by `op`: one group per setting of the
    /// non-target wires that satisfies the controls, each group listing the
    /// `2^t` target patterns in local order.
    fn groups(&self, op: &LocalOp) -> Vec<Vec<usize>> {
        let size = 1 << self.n_wires;
        let target_masks: Vec<usize> = op.targets.iter().map(|&w| self.mask(w)).collect();
        let all_targets: usize = target_masks.iter().sum();
        let t = target_masks.len();
        let patterns: Vec<usize> = (0..1usize << t)
            .map(|local| {
                (0..t)
                    .filter(|k| local >> (t - 1 - k) & 1 == 1)
                    .map(|k| target_masks[k])
                    .sum()
            })
            .collect();
        (0..size)
            .filter(|base| base & all_targets == 0)
            .filter(|base| {
                op.controls
                    .iter()
                    .all(|ctl| (base & self.mask(ctl.wire) != 0) == ctl.value)
            })
            .map(|base| patterns.iter().map(|p| base | p).collect())
            .collect()
    }

    /// `ρ → G ρ G†` for the full-register extension of `op`.
    pub fn apply(&mut self, op: &LocalOp) {
        let groups = self.groups(op);
        let g = &op.matrix;
        let k = g.nrows();
        let size = self.rho.nrows();
        let mut buf = vec![Complex64::new(0.0, 0.0); k];
        // rows: ρ ← G ρ
        for col in 0..size {
            for idx in &groups {
                for (a, out) in buf.iter_mut().enumerate() {
                    *out = (0..k).map(|b| g[(a, b)] * self.rho[(idx[b], col)]).sum();
                }
                for (a, &row) in idx.iter().enumerate() {
                    self.rho[(row, col)] = buf[a];
                }
            }
        }
        // columns: ρ ← ρ G†
        for row in 0..size {
            for idx in &groups {
                for (a, out) in buf.iter_mut().enumerate() {
                    *out = (0..k).map(|b| self.rho[(row, idx[b])] * g[(a, b)].conj()).sum();
                }
                for (a, &col) in idx.iter().enumerate() {
                    self.rho[(row, col)] = buf[a];
                }
            }
        }
    }

    /// Traces out `wire` and re-prepares it in `|0⟩`.
    pub fn reset(&mut self, wire: usize) {
        let m = self.mask(wire);
        let size = self.rho.nrows();
        for col in (0..size).filter(|j| j & m == 0) {
            for row in (0..size).filter(|i| i & m == 0) {
                let moved = self.rho[(row | m, col | m)];
                self.rho[(row, col)] += moved;
            }
        }
        for col in 0..size {
            for row in 0..size {
                if row & m != 0 || col & m != 0 {
                    self.rho[(row, col)] = c(0.0);
                }
            }
        }
    }

    pub fn run(&mut self, gate: &Gate) {
        match gate {
            Gate::Reset { wire } | Gate::TraceOut { wire } => self.reset(*wire),
            other => self.apply(&other.local_op().expect("unitary gate")),
        }
    }
}

/// Number of wires needed to run `gates` on `layout`.
pub fn register_width(gates: &[Gate], layout: &QubitLayout) -> usize {
    gates
        .iter()
        .map(|g| g.max_wire() + 1)
        .max()
        .unwrap_or(0)
        .max(layout.b2() + 1)
}

/// Runs `gates` on an operator over the contiguous wires
/// `first..first + count`, with every other wire starting in `|0⟩`, and
/// returns the reduced operator on the same wires.
pub fn run_on_wires(
    rho_in: &ComplexMatrix,
    gates: &[Gate],
    layout: &QubitLayout,
    first: usize,
    count: usize,
) -> Result<ComplexMatrix> {
    let local = 1usize << count;
    if rho_in.shape() != (local, local) {
        return Err(Error::LayoutMismatch(format!(
            "operator is {}x{}, {count} wires hold {local} states",
            rho_in.nrows(),
            rho_in.ncols()
        )));
    }
    if let Some(g) = gates.iter().find(|g| g.max_wire() >= layout.total_wires()) {
        return Err(Error::LayoutMismatch(format!(
            "gate `{g}` uses a wire beyond the {} available",
            layout.total_wires()
        )));
    }
    let n_wires = register_width(gates, layout).max(first + count);
    let shift = n_wires - first - count;
    let size = 1usize << n_wires;
    let mut rho = ComplexMatrix::zeros(size, size);
    for i in 0..local {
        for j in 0..local {
            rho[(i << shift, j << shift)] = rho_in[(i, j)];
        }
    }
    let mut register = Register { n_wires, rho };
    for gate in gates {
        register.run(gate);
    }
    let kept = (local - 1) << shift;
    let mut out = ComplexMatrix::zeros(local, local);
    for j in 0..size {
        for i in 0..size {
            if i & !kept == j & !kept {
                out[((i & kept) >> shift, (j & kept) >> shift)] += register.rho[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Runs `gates` on a system operator given in the `2^n` code space; every
/// other wire starts in `|0⟩` and is traced out at the end.
pub fn run_on_codes(rho_codes: &ComplexMatrix, gates: &[Gate], layout: &QubitLayout) -> Result<ComplexMatrix> {
    run_on_wires(rho_codes, gates, layout, layout.system_wires().start, layout.n_system())
}

/// Places a `dim × dim` operator on the exciton codes.
pub fn embed_codes(m: &ComplexMatrix, layout: &QubitLayout) -> ComplexMatrix {
    let off = layout.code_offset();
    let codes = layout.code_space();
    let mut out = ComplexMatrix::zeros(codes, codes);
    out.view_mut((off, off), (layout.dim(), layout.dim())).copy_from(m);
    out
}

/// The exciton block of a code-space operator.
pub fn extract_codes(m: &ComplexMatrix, layout: &QubitLayout) -> ComplexMatrix {
    let off = layout.code_offset();
    m.view((off, off), (layout.dim(), layout.dim())).into_owned()
}

/// Raw linear action of a gate list on a `dim × dim` system operator.
pub fn apply_circuit_operator(m: &ComplexMatrix, gates: &[Gate], layout: &QubitLayout) -> Result<ComplexMatrix> {
    if m.shape() != (layout.dim(), layout.dim()) {
        return Err(Error::LayoutMismatch(format!(
            "state is {}x{}, layout holds {} excitons",
            m.nrows(),
            m.ncols(),
            layout.dim()
        )));
    }
    Ok(extract_codes(&run_on_codes(&embed_codes(m, layout), gates, layout)?, layout))
}

/// Runs a compiled circuit on a system state and returns the reduced system
/// state.
pub fn apply_circuit(rho: &DensityMatrix, gates: &[Gate], layout: &QubitLayout) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_matrix_unchecked(apply_circuit_operator(rho.matrix(), gates, layout)?))
}
