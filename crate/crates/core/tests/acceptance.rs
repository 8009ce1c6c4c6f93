//! End-to-end acceptance checks. Runs as a plain binary (no test harness) so
//! that every check prints one PASS/FAIL line under `cargo test`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use enaqt::circuit::{
    build_step_circuit, channel_choi, choi_trace_deviation, circuit_step_map, compare_step_channels,
    counting_circuit, gate_count, sequential_kraus_step, QubitLayout,
};
use enaqt::config::RunConfig;
use enaqt::fmo::{first_passage_time, transfer_efficiency};
use enaqt::kernel::{enaqt_step, evolve_trajectory, evolve_unitary, StepConfig};
use enaqt::lindblad::convergence_report;
use enaqt::linalg;
use enaqt::run::{simulate, unused_code_leakage, Prepared};
use enaqt::trajectory::{drive, Trajectory};

use common::*;

const SINK: [usize; 2] = [3, 4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn run(prepared: &Prepared, cfg: &RunConfig) -> Trajectory {
    simulate(prepared, cfg).expect("simulation")
}

fn lindblad_equivalence() -> Outcome {
    let start = Instant::now();
    let model = toy3();
    let rho0 = enaqt::density::DensityMatrix::basis_state(3, 0).unwrap();
    let report = convergence_report(&model, &rho0, 1000.0, &[4.0, 2.0, 1.0]).unwrap();
    let ratios = report.ratios();
    let elapsed = start.elapsed();
    let pass = ratios.iter().all(|r| (1.7..=2.3).contains(r)) && within(elapsed, 5.0);
    let distances: Vec<String> = report.rows.iter().map(|r| format!("{:.3e}", r.distance)).collect();
    outcome(pass, format!("distances [{}], ratios {ratios:.3?}, {elapsed:.2?}", distances.join(", ")))
}

fn fmo_efficiency() -> Outcome {
    let prepared = fmo_prepared();
    let mut cfg = fmo_run_config();
    let mut parts = Vec::new();
    let mut pass = true;
    for site in [1, 6] {
        cfg.initial_site = site;
        let start = Instant::now();
        let traj = run(&prepared, &cfg);
        let elapsed = start.elapsed();
        let eff = transfer_efficiency(&traj, &SINK, 4000.0).unwrap();
        pass &= eff >= 0.93 && within(elapsed, 2.0);
        parts.push(format!("site {site}: {eff:.4} ({elapsed:.2?})"));
    }
    outcome(pass, parts.join(", "))
}

fn localization() -> Outcome {
    let prepared = fmo_prepared();
    let cfg = fmo_run_config();
    let coherent = run(&prepared.coherent_only(), &cfg);
    let peak = coherent.summed_series(&[2, 3]).into_iter().fold(0.0, f64::max);
    let coherent_eff = transfer_efficiency(&coherent, &SINK, 4000.0).unwrap();
    let enaqt_eff = transfer_efficiency(&run(&prepared, &cfg), &SINK, 4000.0).unwrap();
    let ratio = enaqt_eff / coherent_eff;
    outcome(
        peak <= 0.4 && ratio >= 2.0,
        format!("coherent-only sink peak {peak:.4}, efficiency ratio {ratio:.1} ({enaqt_eff:.4} / {coherent_eff:.4})"),
    )
}

fn directionality() -> Outcome {
    let prepared = fmo_prepared();
    let mut cfg = fmo_run_config();
    let mut times = Vec::new();
    for site in [1, 6] {
        cfg.initial_site = site;
        times.push(first_passage_time(&run(&prepared, &cfg), &SINK, 0.5));
    }
    let pass = matches!((times[0], times[1]), (Some(t1), Some(t6)) if t6 < t1);
    outcome(pass, format!("time to 50% sink: site 1 {:?} fs, site 6 {:?} fs", times[0], times[1]))
}

fn peak_to_peak(series: &[f64]) -> f64 {
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

fn tunable_coupling() -> Outcome {
    let prepared = fmo_prepared();
    let cfg = RunConfig { steps: 50, ..fmo_run_config() };
    let amplitude = |chi: f64| peak_to_peak(&run(&prepared, &RunConfig { chi, ..cfg.clone() }).series(1));
    let (weak, full) = (amplitude(0.06), amplitude(1.0));

    let full_cfg = fmo_run_config();
    let rho0 = prepared.model.initial_state(&prepared.basis, 1).unwrap();
    let ops = prepared.transport.evolution_operators(full_cfg.dt_fs).unwrap();
    let at = |chi| StepConfig::new(full_cfg.dt_fs, chi, false).unwrap();
    let tuned_one = evolve_trajectory(&rho0, &ops, &at(1.0), full_cfg.steps, &prepared.basis).unwrap();
    let plain = drive(&rho0, full_cfg.dt_fs, full_cfg.steps, &prepared.basis, |m| {
        let state = enaqt::density::DensityMatrix::new(m.clone(), 1e-6, 1e-6)?;
        Ok(enaqt_step(&state, &ops)?.into_matrix())
    })
    .unwrap();
    let tuned_zero = evolve_trajectory(&rho0, &ops, &at(0.0), full_cfg.steps, &prepared.basis).unwrap();
    let unitary = evolve_unitary(&rho0, ops.unitary(), full_cfg.dt_fs, full_cfg.steps, &prepared.basis).unwrap();
    let one_identical = tuned_one == plain;
    let zero_identical = tuned_zero == unitary;
    outcome(
        weak > full && one_identical && zero_identical,
        format!(
            "site-2 amplitude chi=0.06 {weak:.4} vs chi=1 {full:.4}; chi=1 bit-identical {one_identical}, chi=0 bit-identical {zero_identical}"
        ),
    )
}

fn circuit_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(6);
    let prepared = fmo_prepared();
    let (fmo_rates, fmo_u) = prepared.step_data(10.0).unwrap();
    let mut distances = Vec::new();
    for dim in [2, 4, 7] {
        let (rates, u) = if dim == 7 {
            (fmo_rates.clone(), fmo_u.clone())
        } else {
            (random_rates(dim, 0.8 / dim as f64, &mut rng), random_unitary(dim, &mut rng))
        };
        let layout = QubitLayout::new(dim).unwrap();
        let gates = build_step_circuit(&rates, &u, &layout).unwrap();
        let circuit = channel_choi(circuit_step_map(&gates.gates, &layout), dim).unwrap();
        let oracle = channel_choi(|m| sequential_kraus_step(m, &rates, &u), dim).unwrap();
        distances.push(linalg::frob_dist(&circuit, &oracle).unwrap());
    }
    let comparison = compare_step_channels(&fmo_rates, &fmo_u, &[1.0, 0.5]).unwrap();
    let ratio = comparison.ratios()[0];
    let elapsed = start.elapsed();
    let pass = distances.iter().all(|&d| d <= 1e-10) && (2.8..=5.2).contains(&ratio) && within(elapsed, 30.0);
    outcome(
        pass,
        format!("sequential-Kraus distances (dims 2, 4, 7) [{}]; step-map distance ratio {ratio:.3} when rates halve; {elapsed:.2?}", distances.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join(", ")),
    )
}

fn complexity_accounting() -> Outcome {
    let mut failures = Vec::new();
    for n in 2..=8usize {
        let (list, layout) = counting_circuit(n).unwrap();
        let count = gate_count(&list, &layout).unwrap();
        let log = (n as f64).log2().ceil() as usize;
        let ok = count.jumps == n * (n - 1) && count.per_jump() == 2 * log && count.qubits == 2 * log + 2;
        if !ok {
            failures.push(n);
        }
    }
    let (list, layout) = counting_circuit(7).unwrap();
    let fmo = gate_count(&list, &layout).unwrap();
    outcome(
        failures.is_empty() && fmo.jumps == 42,
        format!(
            "n=7: {} jumps, {} gates per jump, {} qubits; mismatching n: {failures:?}",
            fmo.jumps,
            fmo.per_jump(),
            fmo.qubits
        ),
    )
}

fn trace_deviation_per_step(dt: f64) -> f64 {
    let model = toy3();
    let ops = model.evolution_operators(dt).unwrap();
    let rho = toy3_superposition();
    (linalg::trace(&ops.apply(rho.matrix())).re - 1.0).abs()
}

fn invariant_suite() -> Outcome {
    let start = Instant::now();
    let prepared = fmo_prepared();
    let cfg = fmo_run_config();
    let ops = prepared.transport.evolution_operators(cfg.dt_fs).unwrap();
    let completeness = ops.completeness_residual();

    let mut hermiticity: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for site in [1, 6] {
        let rho0 = prepared.model.initial_state(&prepared.basis, site).unwrap();
        let traj = drive(&rho0, cfg.dt_fs, cfg.steps, &prepared.basis, |m| {
            let next = ops.apply(m);
            hermiticity = hermiticity.max(linalg::hermiticity_deviation(&next));
            Ok(next)
        })
        .unwrap();
        min_eig = traj.points.iter().map(|p| p.min_eigenvalue).fold(min_eig, f64::min);
    }

    let drifts: Vec<f64> = [4.0, 2.0, 1.0].iter().map(|&dt| trace_deviation_per_step(dt)).collect();
    let drift_ratios: Vec<f64> = drifts.windows(2).map(|w| w[0] / w[1]).collect();

    let layout = QubitLayout::new(prepared.dim()).unwrap();
    let (rates, u) = prepared.step_data(cfg.dt_fs).unwrap();
    let gates = build_step_circuit(&rates, &u, &layout).unwrap();
    let choi = channel_choi(circuit_step_map(&gates.gates, &layout), prepared.dim()).unwrap();
    let circuit_trace = choi_trace_deviation(&choi, prepared.dim()).unwrap();
    let leakage = unused_code_leakage(&prepared, &gates, &layout).unwrap();
    let elapsed = start.elapsed();

    let pass = completeness <= 1e-12
        && hermiticity <= 1e-13
        && drift_ratios.iter().all(|r| (2.8..=5.2).contains(r))
        && min_eig >= -1e-8
        && circuit_trace <= 1e-12
        && leakage <= 1e-12
        && within(elapsed, 60.0);
    outcome(
        pass,
        format!(
            "completeness {completeness:.1e}, hermiticity {hermiticity:.1e}, trace drift ratios {drift_ratios:.3?}, min eigenvalue {min_eig:.1e}, circuit trace {circuit_trace:.1e}, leakage {leakage:.1e}"
        ),
    )
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Outcome); 8] = [
        ("1 Lindblad equivalence", lindblad_equivalence),
        ("2 FMO efficiency", fmo_efficiency),
        ("3 localization", localization),
        ("4 directionality", directionality),
        ("5 tunable coupling", tunable_coupling),
        ("6 circuit equivalence", circuit_equivalence),
        ("7 complexity accounting", complexity_accounting),
        ("8 invariant suite", invariant_suite),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let o = check();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
