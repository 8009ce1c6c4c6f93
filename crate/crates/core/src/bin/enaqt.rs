use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use enaqt::circuit::{decompose, gate_count};
use enaqt::config::{Backend, Overrides, RunConfig};
use enaqt::run::{self, CliError, EFFICIENCY_TIME_FS, GATECOUNT_HEADER};

/// Discrete-time ENAQT simulation and circuit compilation.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long)]
    dt_fs: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// 1-based site holding the initial excitation.
    #[arg(long)]
    initial_site: Option<usize>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    /// Bath temperature in K, replacing the model's.
    #[arg(long)]
    temperature_k: Option<f64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let overrides = Overrides {
            chi: self.chi,
            dt_fs: self.dt_fs,
            steps: self.steps,
            initial_site: self.initial_site,
            backend: self.backend,
            temperature_k: self.temperature_k,
            out: self.out.clone(),
        };
        Ok(run::load_run_config(&self.config, &overrides)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Site populations over time as CSV, plus a `.meta.json` sidecar.
    Simulate(RunArgs),
    /// Lindblad reference trajectory and discrete-step convergence table.
    Oracle {
        #[command(flatten)]
        run: RunArgs,
        /// Step sizes (fs) for the convergence table.
        #[arg(long, value_delimiter = ',', default_values_t = [20.0, 10.0, 5.0])]
        dt_list: Vec<f64>,
        /// Comparison time; defaults to dt_fs * steps.
        #[arg(long)]
        total_fs: Option<f64>,
        /// Where to write the convergence CSV; stderr when absent.
        #[arg(long)]
        convergence_out: Option<PathBuf>,
    },
    /// Transfer efficiency for each coupling strength chi.
    SweepChi {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.06, 0.25, 0.5, 0.75, 1.0])]
        chis: Vec<f64>,
        /// Time at which efficiency is read.
        #[arg(long, default_value_t = EFFICIENCY_TIME_FS)]
        at_fs: f64,
    },
    /// Jump, gate and qubit counts of one compiled step.
    Gatecount {
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4, 5, 6, 7, 8])]
        dims: Vec<usize>,
        /// Also compile this run's model and report its step.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the compiled gate list of `--config` here, one gate per line.
        #[arg(long, requires = "config")]
        gates_out: Option<PathBuf>,
        /// Export the gate list after ladder decomposition.
        #[arg(long)]
        decomposed: bool,
    },
    /// Channel-level checks of the compiled step against the operator model.
    CircuitVerify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5, 0.25])]
        scales: Vec<f64>,
    },
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { context: path.display().to_string(), source })
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write(p, text),
        None => stdout(text),
    }
}

fn stdout(text: &str) -> Result<(), CliError> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::Io { context: "stdout".into(), source: e })
        }
        _ => Ok(()),
    }
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn execute(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Simulate(args) => {
            let cfg = args.load()?;
            let output = run::cmd_simulate(&cfg)?;
            emit(cfg.out.as_deref(), &output.csv)?;
            if let Some(out) = &cfg.out {
                let extra = serde_json::json!({ "final_sink_population": output.efficiency });
                write(&meta_path(out), &run::metadata_json(&cfg, extra)?)?;
            }
            eprintln!("final sink population (sites {:?}): {:.6}", output.sink_sites, output.efficiency);
        }
        Command::Oracle { run: args, dt_list, total_fs, convergence_out } => {
            let cfg = args.load()?;
            let output = run::cmd_oracle(&cfg, &dt_list, total_fs)?;
            emit(cfg.out.as_deref(), &output.csv)?;
            match convergence_out {
                Some(p) => write(&p, &output.convergence.to_csv())?,
                None => eprint!("{}", output.convergence.to_csv()),
            }
        }
        Command::SweepChi { run: args, chis, at_fs } => {
            let cfg = args.load()?;
            emit(cfg.out.as_deref(), &run::cmd_sweep_chi(&cfg, &chis, at_fs)?)?;
        }
        Command::Gatecount { dims, config, gates_out, decomposed } => {
            let table = run::cmd_gatecount(&dims)?;
            if let Some(path) = config {
                let cfg = run::load_run_config(&path, &Overrides::default())?;
                let (list, layout) = run::model_step_circuit(&cfg)?;
                eprintln!("model step ({} excitons):", layout.dim());
                eprint!("{GATECOUNT_HEADER}{}", run::gatecount_row(&gate_count(&list, &layout)?));
                if let Some(out) = gates_out {
                    let list = if decomposed { decompose(&list, &layout)? } else { list };
                    write(&out, &list.to_text())?;
                }
            }
            stdout(&table)?;
        }
        Command::CircuitVerify { run: args, scales } => {
            let cfg = args.load()?;
            let report = run::cmd_circuit_verify(&cfg, &scales)?;
            emit(cfg.out.as_deref(), &report.report())?;
            if !report.passed() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
