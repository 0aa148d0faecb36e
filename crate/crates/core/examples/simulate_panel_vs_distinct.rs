//! Paired trials: a full panel against one expert per team, with diverging
//! rating habits.
//!
//! ```text
//! cargo run --release --example simulate_panel_vs_distinct
//! ```

use std::path::Path;

use peerstat::model::StatConfig;
use peerstat::sim::{experiment_panel_vs_distinct, Scenario};

fn main() -> peerstat::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/panel_vs_distinct.toml");
    let text = std::fs::read_to_string(&path).expect("scenario file");
    let scenario = Scenario::from_toml(&text)?;
    let summary = experiment_panel_vs_distinct(&scenario, 500, &StatConfig::new(0.05)?)?;

    let show = |name: &str, m: Option<peerstat::sim::MeanSe>| match m {
        Some(m) => println!(
            "{name:<10} mean r = {:.3} ± {:.3} over {} trials",
            m.mean, m.se, m.count
        ),
        None => println!("{name:<10} no defined trials"),
    };
    show("panel", summary.panel);
    show("distinct", summary.distinct);
    show("difference", summary.difference);
    println!(
        "panel wins {:.1}% of trials",
        100.0 * summary.panel_win_fraction()
    );
    Ok(())
}
