//! Transfer efficiency and early-time oscillation of site 2 as the system-bath
//! coupling `chi` is tuned from purely coherent to fully dissipative.

use std::path::Path;

use enaqt::config::RunConfig;
use enaqt::fmo::transfer_efficiency;
use enaqt::run::{simulate, Prepared};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fmo_run.json"))?;
    let prepared = Prepared::new(cfg.resolve_model()?)?;
    println!("chi    efficiency@4ps  site-2 swing (first 500 fs)");
    for chi in [0.0, 0.06, 0.1, 0.25, 0.5, 0.75, 1.0] {
        let traj = simulate(&prepared, &RunConfig { chi, ..cfg.clone() })?;
        let early: Vec<f64> = traj.series(1).into_iter().take(51).collect();
        let swing = early.iter().copied().fold(f64::MIN, f64::max) - early.iter().copied().fold(f64::MAX, f64::min);
        println!("{chi:<5}  {:<14.4}  {swing:.4}", transfer_efficiency(&traj, &prepared.model.sink_sites, 4000.0)?);
    }
    Ok(())
}
