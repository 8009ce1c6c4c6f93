//! Simulation orchestration behind the command-line subcommands.
//!
//! Everything here returns in-memory text (CSV, JSON, reports); the binary
//! decides where it goes.

use std::path::Path;

use rayon::prelude::*;

use crate::circuit::{
    self, apply_circuit, apply_circuit_operator, basis_change_circuit, build_step_circuit, channel_choi,
    choi_trace_deviation, circuit_step_map, compare_step_channels, embed_codes, gate_count, run_on_codes,
    sequential_kraus_step, GateCount, GateList, QubitLayout,
};
use crate::config::{sha256_hex, Backend, ConfigError, RunConfig};
use crate::density::DensityMatrix;
use crate::error::Error;
use crate::fmo::{self, ExcitonBasis, FmoModel};
use crate::kernel::{evolve_trajectory, JumpRateSpec, StepConfig};
use crate::lindblad::{convergence_report, rk4_integrate, ConvergenceReport, TransportModel};
use crate::linalg::{self, c, ComplexMatrix, HBAR_CM1_FS};
use crate::trajectory::{drive, Trajectory, TRAJECTORY_PSD_TOL};

/// Time at which transfer efficiency is quoted by default.
pub const EFFICIENCY_TIME_FS: f64 = 4000.0;

/// RK4 sub-steps per recorded step for the Lindblad backend.
pub const ORACLE_SUBSTEPS: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("numerical invariant violated: {0}")]
    Numerical(#[from] Error),

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    /// 1 for configuration problems (including parameters the kernels
    /// reject up front), 2 for invariant violations during a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numerical(
                Error::SpecInvalid(_)
                | Error::SurvivalUnderflow { .. }
                | Error::ChiOutOfRange(_)
                | Error::IndexOutOfRange { .. }
                | Error::TimeOutOfRange { .. }
                | Error::LayoutMismatch(_),
            ) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

/// A model prepared for simulation in its exciton basis.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub model: FmoModel,
    pub basis: ExcitonBasis,
    pub transport: TransportModel,
}

impl Prepared {
    pub fn new(model: FmoModel) -> Result<Self, Error> {
        let basis = model.exciton_basis()?;
        let transport = model.exciton_transport(&basis, &model.bath)?;
        Ok(Self { model, basis, transport })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Per-step probabilities and coherent propagator at `dt_fs`.
    pub fn step_data(&self, dt_fs: f64) -> Result<(JumpRateSpec, ComplexMatrix), Error> {
        let rates = JumpRateSpec::from_rates(&self.transport.rates_per_fs, dt_fs)?;
        let u = linalg::mat_exp_unitary(&self.transport.hamiltonian, dt_fs, HBAR_CM1_FS)?;
        Ok((rates, u))
    }

    /// The same model with every jump rate set to zero.
    pub fn coherent_only(&self) -> Self {
        let mut out = self.clone();
        out.transport.rates_per_fs.fill(0.0);
        out
    }
}

/// Runs one trajectory; populations are reported per site.
pub fn simulate(prepared: &Prepared, cfg: &RunConfig) -> Result<Trajectory, Error> {
    let rho0 = prepared.model.initial_state(&prepared.basis, cfg.initial_site)?;
    match cfg.backend {
        Backend::Operator => {
            let ops = prepared.transport.evolution_operators(cfg.dt_fs)?;
            let step = StepConfig::new(cfg.dt_fs, cfg.chi, cfg.renormalize)?;
            evolve_trajectory(&rho0, &ops, &step, cfg.steps, &prepared.basis)
        }
        Backend::Circuit => simulate_circuit(prepared, cfg),
        Backend::LindbladOracle => {
            // χ scales the dissipator to first order, so the continuous
            // counterpart of a tunable run has rates χ·Γ
            let mut transport = prepared.transport.clone();
            transport.rates_per_fs *= cfg.chi;
            let run = rk4_integrate(
                &rho0,
                &transport.lindblad()?,
                cfg.dt_fs / ORACLE_SUBSTEPS as f64,
                cfg.steps * ORACLE_SUBSTEPS,
                ORACLE_SUBSTEPS,
                &prepared.basis,
            )?;
            let mut traj = run.trajectory;
            for (k, p) in traj.points.iter_mut().enumerate() {
                p.t_fs = k as f64 * cfg.dt_fs;
                if !(p.min_eigenvalue >= -TRAJECTORY_PSD_TOL) {
                    return Err(Error::StateInvalid {
                        step: k,
                        reason: format!("minimum eigenvalue {:e}", p.min_eigenvalue),
                    });
                }
            }
            Ok(traj)
        }
    }
}

fn simulate_circuit(prepared: &Prepared, cfg: &RunConfig) -> Result<Trajectory, Error> {
    StepConfig::new(cfg.dt_fs, cfg.chi, cfg.renormalize)?;
    let layout = QubitLayout::new(prepared.dim())?;
    let (rates, u) = prepared.step_data(cfg.dt_fs)?;
    let step = build_step_circuit(&rates, &u, &layout)?;
    let to_exciton = basis_change_circuit(&prepared.basis.transform().adjoint(), &layout)?;
    let site = DensityMatrix::basis_state(prepared.dim(), cfg.initial_site - 1)?;
    let rho0 = apply_circuit(&site, &to_exciton.gates, &layout)?;
    let chi = cfg.chi;
    drive(&rho0, cfg.dt_fs, cfg.steps, &prepared.basis, |m| {
        let jumped = apply_circuit_operator(m, &step.gates, &layout)?;
        let mut out = if chi == 1.0 {
            jumped
        } else {
            linalg::conjugate(&u, m) * c(1.0 - chi) + jumped * c(chi)
        };
        if cfg.renormalize {
            let tr = linalg::trace(&out);
            out /= tr;
        }
        Ok(out)
    })
}

/// Shortest round-trip decimal, switching to exponent form for tiny or huge
/// magnitudes.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// `t_fs,site1..siteN,trace,min_eig`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.points.first().map_or(0, |p| p.populations.len());
    let mut out = String::from("t_fs");
    for k in 1..=n {
        out.push_str(&format!(",site{k}"));
    }
    out.push_str(",trace,min_eig\n");
    for p in &traj.points {
        out.push_str(&format_number(p.t_fs));
        for &v in p.populations.iter().chain([p.trace, p.min_eigenvalue].iter()) {
            out.push(',');
            out.push_str(&format_number(v));
        }
        out.push('\n');
    }
    out
}

/// The run configuration with a `provenance` block; loadable again as a
/// run file.
pub fn metadata_json(cfg: &RunConfig, extra: serde_json::Value) -> Result<String, CliError> {
    let model_bytes = std::fs::read(&cfg.model)
        .map_err(|source| CliError::Io { context: cfg.model.display().to_string(), source })?;
    let config_text = serde_json::to_string(cfg).expect("config serialises");
    let mut value = serde_json::to_value(cfg).expect("config serialises");
    let mut provenance = serde_json::json!({
        "crate_version": env!("CARGO_PKG_VERSION"),
        "backend": cfg.backend.to_string(),
        "config_sha256": sha256_hex([config_text.as_bytes()]),
        "model_sha256": sha256_hex([model_bytes.as_slice()]),
    });
    if let (Some(p), serde_json::Value::Object(e)) = (provenance.as_object_mut(), extra) {
        p.extend(e);
    }
    value["provenance"] = provenance;
    Ok(serde_json::to_string_pretty(&value).expect("json") + "\n")
}

pub struct SimulationOutput {
    pub trajectory: Trajectory,
    pub csv: String,
    pub efficiency: f64,
    pub sink_sites: Vec<usize>,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulationOutput, CliError> {
    let model = cfg.resolve_model()?;
    let prepared = Prepared::new(model)?;
    let trajectory = simulate(&prepared, cfg)?;
    let end = trajectory.last().map_or(0.0, |p| p.t_fs);
    let efficiency = fmo::transfer_efficiency(&trajectory, &prepared.model.sink_sites, end)?;
    Ok(SimulationOutput {
        csv: trajectory_csv(&trajectory),
        trajectory,
        efficiency,
        sink_sites: prepared.model.sink_sites.clone(),
    })
}

pub struct OracleOutput {
    pub csv: String,
    pub convergence: ConvergenceReport,
}

/// Lindblad reference trajectory plus the discrete-step convergence table.
pub fn cmd_oracle(cfg: &RunConfig, dt_list: &[f64], total_fs: Option<f64>) -> Result<OracleOutput, CliError> {
    let model = cfg.resolve_model()?;
    let prepared = Prepared::new(model)?;
    let oracle_cfg = RunConfig { backend: Backend::LindbladOracle, ..cfg.clone() };
    let trajectory = simulate(&prepared, &oracle_cfg)?;
    let rho0 = prepared.model.initial_state(&prepared.basis, cfg.initial_site)?;
    let total = total_fs.unwrap_or(cfg.dt_fs * cfg.steps as f64);
    let convergence = convergence_report(&prepared.transport, &rho0, total, dt_list)?;
    Ok(OracleOutput { csv: trajectory_csv(&trajectory), convergence })
}

/// `chi,efficiency` rows, one per χ, efficiency read at `at_fs`.
pub fn cmd_sweep_chi(cfg: &RunConfig, chis: &[f64], at_fs: f64) -> Result<String, CliError> {
    let model = cfg.resolve_model()?;
    for &chi in chis {
        RunConfig { chi, ..cfg.clone() }.validate(model.n_sites())?;
    }
    let prepared = Prepared::new(model)?;
    let rows: Vec<(f64, f64)> = chis
        .par_iter()
        .map(|&chi| {
            let run = RunConfig { chi, ..cfg.clone() };
            let traj = simulate(&prepared, &run)?;
            Ok((chi, fmo::transfer_efficiency(&traj, &prepared.model.sink_sites, at_fs)?))
        })
        .collect::<Result<_, Error>>()?;
    let mut out = String::from("chi,efficiency\n");
    for (chi, eff) in rows {
        out.push_str(&format!("{},{}\n", format_number(chi), format_number(eff)));
    }
    Ok(out)
}

pub fn gatecount_row(count: &GateCount) -> String {
    format!(
        "{},{},{},{},{},{},{},{}\n",
        count.dim,
        count.jumps,
        count.per_jump(),
        count.jump_gates,
        count.coherent_gates,
        count.elementary_gates(),
        count.expanded_gates,
        count.qubits
    )
}

pub const GATECOUNT_HEADER: &str =
    "dim,jumps,gates_per_jump,jump_gates,coherent_gates,elementary_gates,expanded_gates,qubits\n";

/// Resource table for every dimension in `dims`.
pub fn cmd_gatecount(dims: &[usize]) -> Result<String, CliError> {
    let mut out = String::from(GATECOUNT_HEADER);
    for &dim in dims {
        let (list, layout) = circuit::counting_circuit(dim)?;
        out.push_str(&gatecount_row(&gate_count(&list, &layout)?));
    }
    Ok(out)
}

/// The compiled step for a configured model, in exciton basis.
pub fn model_step_circuit(cfg: &RunConfig) -> Result<(GateList, QubitLayout), CliError> {
    let prepared = Prepared::new(cfg.resolve_model()?)?;
    let layout = QubitLayout::new(prepared.dim())?;
    let (rates, u) = prepared.step_data(cfg.dt_fs)?;
    Ok((build_step_circuit(&rates, &u, &layout)?, layout))
}

/// Channel-level checks of the compiled step for a configured model.
#[derive(Debug, Clone)]
pub struct CircuitVerification {
    pub dim: usize,
    pub sequential_distance: f64,
    pub choi_min_eigenvalue: f64,
    pub trace_deviation: f64,
    pub leakage: f64,
    pub scaling: Vec<(f64, f64)>,
    pub ratios: Vec<f64>,
}

pub const SEQUENTIAL_TOL: f64 = 1e-10;
pub const CHOI_PSD_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-12;
pub const LEAKAGE_TOL: f64 = 1e-12;

impl CircuitVerification {
    pub fn passed(&self) -> bool {
        self.sequential_distance <= SEQUENTIAL_TOL
            && self.choi_min_eigenvalue >= -CHOI_PSD_TOL
            && self.trace_deviation <= TRACE_TOL
            && self.leakage <= LEAKAGE_TOL
            && self.ratios.iter().all(|r| (2.8..=5.2).contains(r))
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("dim                         {}\n", self.dim));
        out.push_str(&format!("circuit vs sequential Kraus  {:.3e} (<= {SEQUENTIAL_TOL:e})\n", self.sequential_distance));
        out.push_str(&format!("Choi min eigenvalue          {:.3e} (>= -{CHOI_PSD_TOL:e})\n", self.choi_min_eigenvalue));
        out.push_str(&format!("Choi trace deviation         {:.3e} (<= {TRACE_TOL:e})\n", self.trace_deviation));
        out.push_str(&format!("unused-code leakage          {:.3e} (<= {LEAKAGE_TOL:e})\n", self.leakage));
        out.push_str("rate scale, distance to step map\n");
        for (s, d) in &self.scaling {
            out.push_str(&format!("  {s:<8} {d:.6e}\n"));
        }
        let ratios: Vec<String> = self.ratios.iter().map(|r| format!("{r:.3}")).collect();
        out.push_str(&format!("ratios                       {} (expect ~4)\n", ratios.join(", ")));
        out.push_str(if self.passed() { "PASS\n" } else { "FAIL\n" });
        out
    }
}

pub fn cmd_circuit_verify(cfg: &RunConfig, scales: &[f64]) -> Result<CircuitVerification, CliError> {
    let prepared = Prepared::new(cfg.resolve_model()?)?;
    let dim = prepared.dim();
    let layout = QubitLayout::new(dim)?;
    let (rates, u) = prepared.step_data(cfg.dt_fs)?;
    let gates = build_step_circuit(&rates, &u, &layout)?;
    let circuit_choi = channel_choi(circuit_step_map(&gates.gates, &layout), dim)?;
    let oracle_choi = channel_choi(|m| sequential_kraus_step(m, &rates, &u), dim)?;
    let sequential_distance = linalg::frob_dist(&circuit_choi, &oracle_choi)?;
    let choi_min_eigenvalue = linalg::min_eigenvalue(&circuit_choi)?;
    let trace_deviation = choi_trace_deviation(&circuit_choi, dim)?;
    let leakage = unused_code_leakage(&prepared, &gates, &layout)?;
    let comparison = compare_step_channels(&rates, &u, scales)?;
    Ok(CircuitVerification {
        dim,
        sequential_distance,
        choi_min_eigenvalue,
        trace_deviation,
        leakage,
        scaling: comparison.rows.iter().map(|r| (r.scale, r.distance)).collect(),
        ratios: comparison.ratios(),
    })
}

/// Largest population on unused system codes after one step, over every
/// site-localised input.
pub fn unused_code_leakage(prepared: &Prepared, gates: &GateList, layout: &QubitLayout) -> Result<f64, Error> {
    let mut worst: f64 = 0.0;
    for site in 0..prepared.dim() {
        let rho = prepared.basis.to_exciton(&DensityMatrix::basis_state(prepared.dim(), site)?)?;
        let out = run_on_codes(&embed_codes(rho.matrix(), layout), &gates.gates, layout)?;
        for code in 0..layout.code_offset() {
            worst = worst.max(out[(code, code)].re.abs());
        }
    }
    Ok(worst)
}

/// Loads a run file and applies overrides.
pub fn load_run_config(path: &Path, overrides: &crate::config::Overrides) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::load(path)?;
    cfg.apply(overrides);
    Ok(cfg)
}
