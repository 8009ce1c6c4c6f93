//! How the reorganisation energy and temperature set the fastest exciton
//! relaxation time and the transfer efficiency of the shipped model.

use std::path::Path;

use enaqt::config::RunConfig;
use enaqt::fmo::{fastest_relaxation_time, transfer_efficiency, BathSpec, UphillRates};
use enaqt::run::{simulate, Prepared};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fmo_run.json"))?;
    let model = cfg.resolve_model()?;
    let BathSpec::Ohmic { omega_c_cm1, .. } = model.bath else {
        return Err("shipped model has an Ohmic bath".into());
    };
    println!("lambda  T(K)  uphill             tau_fast(fs)  efficiency@4ps");
    for (lambda, t, uphill) in [
        (15.0, 300.0, UphillRates::None),
        (31.6, 300.0, UphillRates::None),
        (60.0, 300.0, UphillRates::None),
        (31.6, 300.0, UphillRates::DetailedBalance),
        (31.6, 77.0, UphillRates::DetailedBalance),
    ] {
        let mut m = model.clone();
        m.bath = BathSpec::Ohmic { temperature_k: t, lambda_cm1: lambda, omega_c_cm1, uphill };
        let prepared = Prepared::new(m)?;
        let tau = fastest_relaxation_time(&prepared.transport.rates_per_fs);
        let eff = transfer_efficiency(&simulate(&prepared, &cfg)?, &prepared.model.sink_sites, 4000.0)?;
        println!("{lambda:<6}  {t:<4}  {:<17}  {tau:<12.2}  {eff:.4}", format!("{uphill:?}"));
    }
    Ok(())
}
