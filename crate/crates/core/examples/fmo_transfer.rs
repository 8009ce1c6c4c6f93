//! Energy transfer through the seven-site FMO complex from two entry sites,
//! with and without the bath.

use std::path::Path;

use enaqt::config::RunConfig;
use enaqt::fmo::{first_passage_time, transfer_efficiency};
use enaqt::run::{simulate, Prepared};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fmo_run.json");
    let mut cfg = RunConfig::load(&path)?;
    let prepared = Prepared::new(cfg.resolve_model()?)?;
    let sinks = prepared.model.sink_sites.clone();
    println!("model {:?}, sink sites {sinks:?}, {} steps of {} fs", prepared.model.name, cfg.steps, cfg.dt_fs);

    for site in [1, 6] {
        cfg.initial_site = site;
        let traj = simulate(&prepared, &cfg)?;
        let coherent = simulate(&prepared.coherent_only(), &cfg)?;
        println!(
            "site {site}: efficiency {:.4} (coherent only {:.4}), half-transfer time {:?} fs",
            transfer_efficiency(&traj, &sinks, 4000.0)?,
            transfer_efficiency(&coherent, &sinks, 4000.0)?,
            first_passage_time(&traj, &sinks, 0.5),
        );
    }

    cfg.initial_site = 1;
    let traj = simulate(&prepared, &cfg)?;
    println!("\n t_fs   site populations from site 1");
    for p in traj.points.iter().step_by(40) {
        let row: Vec<String> = p.populations.iter().map(|v| format!("{v:.3}")).collect();
        println!("{:>5}  {}", p.t_fs, row.join(" "));
    }
    Ok(())
}
