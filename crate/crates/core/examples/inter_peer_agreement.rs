//! Inter-peer correlations and the High / Intermediate / Low agreement
//! class of a simulated panel.
//!
//! ```text
//! cargo run --example inter_peer_agreement
//! ```

use peerstat::agreement::classify_agreement;
use peerstat::model::StatConfig;
use peerstat::report::{agreement_md, AgreementEntry};
use peerstat::sim::{simulate_evaluation, Scenario};

const SCENARIO: &str = r#"
teams = 9
experts = 3
seed = 4

[quality]
base = 6.0
team_sd = 1.5

[[indicators]]
id = "A"
[[indicators]]
id = "B"
[[indicators]]
id = "C"
"#;

fn main() -> peerstat::Result<()> {
    let config = StatConfig::new(0.05)?;
    let base = Scenario::from_toml(SCENARIO)?;
    for noise in [0.3, 1.5, 6.0] {
        let scenario = Scenario {
            noise_sd: noise,
            ..base.clone()
        };
        let matrix = simulate_evaluation(&scenario.materialize(0)?)?;
        let report = classify_agreement(&matrix, &config)?;
        println!("## opinion noise {noise}\n");
        print!(
            "{}",
            agreement_md(&AgreementEntry::Classified(report), &config)
        );
        println!();
    }
    Ok(())
}
