//! Compilation of jumps and whole evolution steps into gate lists.

use super::gate::{Control, Gate};
use super::layout::QubitLayout;
use crate::error::{Error, Result};
use crate::kernel::{JumpRateSpec, UNITARY_TOL};
use crate::linalg::{self, c, ComplexMatrix};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GateList {
    pub gates: Vec<Gate>,
    /// Number of jump sub-circuits.
    pub jumps: usize,
}

impl GateList {
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn extend(&mut self, other: GateList) {
        self.gates.extend(other.gates);
        self.jumps += other.jumps;
    }

    /// Unitary gates in the list (resets and trace-outs excluded).
    pub fn unitary_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_unitary()).count()
    }

    /// Line-oriented export, one gate per line.
    pub fn to_text(&self) -> String {
        self.gates.iter().map(|g| format!("{g}\n")).collect()
    }
}

fn system_controls(layout: &QubitLayout, exciton: usize) -> Result<Vec<Control>> {
    layout
        .system_wires()
        .enumerate()
        .map(|(k, wire)| Ok(Control { wire, value: layout.code_bit(exciton, k)? }))
        .collect()
}

/// The two gates that realise one jump `i → j` with probability `gamma`.
///
/// The first rotates `B2` by `θ = 2 arcsin √γ` when the system is in `|i⟩`
/// and `B1` is `|0⟩`. The second exchanges `|0⟩_{B1}|i⟩|1⟩_{B2}` with
/// `|1⟩_{B1}|j⟩|1⟩_{B2}`. Tracing out `B2` afterwards leaves the Kraus pair
///
/// ```text
/// K0 = √(1−γ)|0,i⟩⟨0,i| + |1,i⟩⟨1,i| + 1_{B1} ⊗ Σ_{m≠i} |m⟩⟨m|
/// K1 = √γ |1,j⟩⟨0,i|
/// ```
pub fn build_jump_circuit(i: usize, j: usize, gamma: f64, layout: &QubitLayout) -> Result<GateList> {
    if i >= layout.dim() || j >= layout.dim() {
        return Err(Error::IndexOutOfRange { index: i.max(j), dim: layout.dim() });
    }
    if i == j {
        return Err(Error::SpecInvalid(format!("jump from exciton {i} to itself")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::ProbabilityOutOfRange { value: gamma });
    }
    let n = layout.n_system();
    let mut rotation_controls = vec![Control::off(layout.b1())];
    rotation_controls.extend(system_controls(layout, i)?);
    let rotation = Gate::ControlledRy {
        controls: rotation_controls,
        target: layout.b2(),
        theta: 2.0 * gamma.sqrt().asin(),
    };
    let mut targets = vec![layout.b1()];
    targets.extend(layout.system_wires());
    let transfer = Gate::ControlledPermutation {
        controls: vec![Control::on(layout.b2())],
        targets,
        swap: (layout.code(i)?, (1 << n) | layout.code(j)?),
    };
    Ok(GateList { gates: vec![rotation, transfer], jumps: 1 })
}

/// All ordered pairs `(i, j)`, `i ≠ j`, in lexicographic order.
pub fn lexicographic_jumps(dim: usize) -> Vec<(usize, usize)> {
    (0..dim)
        .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

/// `|0⟩⟨0|_{B1} ⊗ U + |1⟩⟨1|_{B1} ⊗ 1` with `U` acting on the exciton codes.
pub fn coherent_gate(u: &ComplexMatrix, layout: &QubitLayout) -> Result<Gate> {
    if u.shape() != (layout.dim(), layout.dim()) {
        return Err(Error::LayoutMismatch(format!(
            "unitary is {}x{}, layout holds {} excitons",
            u.nrows(),
            u.ncols(),
            layout.dim()
        )));
    }
    linalg::check_unitary(u, UNITARY_TOL)?;
    let off = layout.code_offset();
    let mut full = linalg::identity(layout.code_space());
    full.view_mut((off, off), (layout.dim(), layout.dim())).copy_from(u);
    Ok(Gate::ControlledUnitary {
        controls: vec![Control::off(layout.b1())],
        targets: layout.system_wires().collect(),
        unitary: full,
    })
}

/// One evolution step with the jumps compiled in the given order.
pub fn build_step_circuit_ordered(
    rates: &JumpRateSpec,
    u: &ComplexMatrix,
    layout: &QubitLayout,
    order: &[(usize, usize)],
) -> Result<GateList> {
    if rates.dim() != layout.dim() {
        return Err(Error::LayoutMismatch(format!(
            "rates cover {} excitons, layout holds {}",
            rates.dim(),
            layout.dim()
        )));
    }
    let mut list = GateList::default();
    for &(i, j) in order {
        list.extend(build_jump_circuit(i, j, rates.get(i, j), layout)?);
        list.gates.push(Gate::Reset { wire: layout.b2() });
    }
    list.gates.push(coherent_gate(u, layout)?);
    list.gates.push(Gate::TraceOut { wire: layout.b1() });
    Ok(list)
}

/// One evolution step: every jump in lexicographic order, each followed by a
/// reset of `B2`, then the coherent gate, then the trace-out of `B1`.
pub fn build_step_circuit(rates: &JumpRateSpec, u: &ComplexMatrix, layout: &QubitLayout) -> Result<GateList> {
    build_step_circuit_ordered(rates, u, layout, &lexicographic_jumps(layout.dim()))
}

/// A basis change on the system wires, e.g. site → exciton at the start of a
/// trajectory.
pub fn basis_change_circuit(d: &ComplexMatrix, layout: &QubitLayout) -> Result<GateList> {
    let mut gate = coherent_gate(d, layout)?;
    if let Gate::ControlledUnitary { targets, unitary, .. } = gate {
        gate = Gate::BasisChange { targets, unitary };
    }
    Ok(GateList { gates: vec![gate], jumps: 0 })
}

/// Conjunction of `controls` computed onto ancillas with Toffolis. Returns
/// the computing gates and the (at most two) controls that remain.
fn ladder(controls: &[Control], ancillas: &[usize]) -> Result<(Vec<Gate>, Vec<Control>)> {
    if controls.len() <= 2 {
        return Ok((Vec::new(), controls.to_vec()));
    }
    let needed = controls.len() - 2;
    if ancillas.len() < needed {
        return Err(Error::LayoutMismatch(format!(
            "{} controls need {needed} ancillas, only {} available",
            controls.len(),
            ancillas.len()
        )));
    }
    let mut gates = Vec::with_capacity(needed);
    let mut acc = controls[0];
    for (k, &next) in controls[1..controls.len() - 1].iter().enumerate() {
        let anc = ancillas[k];
        gates.push(Gate::MultiControlledX { controls: vec![acc, next], target: anc });
        acc = Control::on(anc);
    }
    Ok((gates, vec![acc, controls[controls.len() - 1]]))
}

fn with_ladder(controls: &[Control], ancillas: &[usize], core: impl FnOnce(Vec<Control>) -> Gate) -> Result<Vec<Gate>> {
    let (compute, remaining) = ladder(controls, ancillas)?;
    let mut out = compute.clone();
    out.push(core(remaining));
    out.extend(compute.into_iter().rev());
    Ok(out)
}

/// Expands every multiply-controlled gate into Toffolis, CNOTs and gates
/// with at most two controls, using the layout's ancillas as scratch.
pub fn decompose(list: &GateList, layout: &QubitLayout) -> Result<GateList> {
    let ancillas: Vec<usize> = layout.ancilla_wires().collect();
    let mut gates = Vec::new();
    for gate in &list.gates {
        match gate {
            Gate::ControlledRy { controls, target, theta } => {
                gates.extend(with_ladder(controls, &ancillas, |remaining| Gate::ControlledRy {
                    controls: remaining,
                    target: *target,
                    theta: *theta,
                })?);
            }
            Gate::MultiControlledX { controls, target } => {
                gates.extend(with_ladder(controls, &ancillas, |remaining| Gate::MultiControlledX {
                    controls: remaining,
                    target: *target,
                })?);
            }
            Gate::ControlledPermutation { controls, targets, swap } => {
                gates.extend(decompose_transposition(controls, targets, *swap, &ancillas)?);
            }
            other => gates.push(other.clone()),
        }
    }
    Ok(GateList { gates, jumps: list.jumps })
}

/// `V · MCX · V` where the CNOTs `V` move the second state next to the first,
/// so the two differ only on a pivot wire.
fn decompose_transposition(
    controls: &[Control],
    targets: &[usize],
    (a, b): (usize, usize),
    ancillas: &[usize],
) -> Result<Vec<Gate>> {
    let t = targets.len();
    let bit = |state: usize, k: usize| state >> (t - 1 - k) & 1 == 1;
    let differing: Vec<usize> = (0..t).filter(|&k| bit(a, k) != bit(b, k)).collect();
    let Some(&pivot) = differing.first() else {
        return Ok(Vec::new());
    };
    let moves: Vec<Gate> = differing[1..]
        .iter()
        .map(|&k| Gate::MultiControlledX {
            controls: vec![Control { wire: targets[pivot], value: bit(b, pivot) }],
            target: targets[k],
        })
        .collect();
    let mut flip_controls: Vec<Control> = (0..t)
        .filter(|&k| k != pivot)
        .map(|k| Control { wire: targets[k], value: bit(a, k) })
        .collect();
    flip_controls.extend_from_slice(controls);
    let mut out = moves.clone();
    out.extend(with_ladder(&flip_controls, ancillas, |remaining| Gate::MultiControlledX {
        controls: remaining,
        target: targets[pivot],
    })?);
    out.extend(moves);
    Ok(out)
}

/// Resource summary of a compiled step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateCount {
    pub dim: usize,
    pub jumps: usize,
    /// Per-jump gates under the ladder counting convention, see
    /// [`Gate::elementary_cost`].
    pub jump_gates: usize,
    /// The coherent gate (and any basis change).
    pub coherent_gates: usize,
    /// Unitary gates actually emitted by [`decompose`].
    pub expanded_gates: usize,
    pub qubits: usize,
}

impl GateCount {
    pub fn elementary_gates(&self) -> usize {
        self.jump_gates + self.coherent_gates
    }

    pub fn per_jump(&self) -> usize {
        if self.jumps == 0 {
            0
        } else {
            self.jump_gates / self.jumps
        }
    }
}

pub fn gate_count(list: &GateList, layout: &QubitLayout) -> Result<GateCount> {
    let (jump_gates, coherent_gates) = list.gates.iter().fold((0, 0), |(jumps, coherent), g| match g {
        Gate::ControlledUnitary { .. } | Gate::BasisChange { .. } => (jumps, coherent + g.elementary_cost()),
        _ => (jumps + g.elementary_cost(), coherent),
    });
    Ok(GateCount {
        dim: layout.dim(),
        jumps: list.jumps,
        jump_gates,
        coherent_gates,
        expanded_gates: decompose(list, layout)?.unitary_count(),
        qubits: layout.total_wires(),
    })
}

/// Closed-form count for a full step on `dim` excitons.
pub fn expected_gate_count(dim: usize) -> Result<(usize, usize, usize)> {
    let layout = QubitLayout::new(dim)?;
    let n = layout.n_system();
    let jumps = dim * (dim - 1);
    Ok((jumps, 2 * n * jumps + 1, 2 * n + 2))
}

/// Step circuit with zero rates and identity coherent part, for counting.
pub fn counting_circuit(dim: usize) -> Result<(GateList, QubitLayout)> {
    let layout = QubitLayout::new(dim)?;
    let u = ComplexMatrix::from_diagonal_element(dim, dim, c(1.0));
    Ok((build_step_circuit(&JumpRateSpec::zeros(dim), &u, &layout)?, layout))
}
