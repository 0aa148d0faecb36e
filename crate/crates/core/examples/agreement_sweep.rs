//! How often a panel is classified High, Intermediate or Low as opinion
//! noise grows.
//!
//! ```text
//! cargo run --release --example agreement_sweep
//! ```

use std::path::Path;

use peerstat::model::StatConfig;
use peerstat::sim::{experiment_agreement_sweep, ExperimentSpec, Scenario};

fn main() -> peerstat::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/agreement_sweep.toml");
    let scenario = Scenario::from_toml(&std::fs::read_to_string(&path).expect("scenario file"))?;
    let Some(ExperimentSpec::AgreementSweep { sigmas, trials }) = scenario.experiment.clone()
    else {
        panic!("scenario without an agreement sweep");
    };
    let points = experiment_agreement_sweep(&scenario, &sigmas, trials, &StatConfig::new(0.05)?)?;
    println!("{:>6} {:>6} {:>6} {:>6}", "sigma", "high", "inter", "low");
    for p in points {
        let f = |c: usize| c as f64 / p.trials as f64;
        println!(
            "{:>6.2} {:>6.3} {:>6.3} {:>6.3}",
            p.sigma,
            f(p.high),
            f(p.intermediate),
            f(p.low)
        );
    }
    Ok(())
}
