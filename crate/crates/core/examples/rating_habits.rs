//! Correlations between indicators as a habit diagnostic: the same teams
//! rated by one panel and by a different expert per team.
//!
//! ```text
//! cargo run --example rating_habits
//! ```

use peerstat::aggregation::{aggregate_evaluation, Scheme};
use peerstat::agreement::habit_report;
use peerstat::model::StatConfig;
use peerstat::report::habits_md;
use peerstat::sim::{simulate_evaluation, Assignment, Scenario};

const SCENARIO: &str = r#"
teams = 8
experts = 8
noise_sd = 0.3
seed = 12

[quality]
base = 6.0
team_sd = 0.5
indicator_sd = 0.15

[habits]
offset = [-2.0, 2.0]
gain = [0.7, 1.3]

[[indicators]]
id = "quality"
[[indicators]]
id = "productivity"
[[indicators]]
id = "relevance"
"#;

fn main() -> peerstat::Result<()> {
    let config = StatConfig::new(0.05)?;
    let sim = Scenario::from_toml(SCENARIO)?.materialize(0)?;
    for assignment in [Assignment::FullPanel, Assignment::DistinctPerTeam] {
        let matrix = simulate_evaluation(&sim.with_assignment(assignment))?;
        let scores = aggregate_evaluation(&matrix, Scheme::Plain)?;
        println!("## {assignment:?}\n");
        print!("{}", habits_md(&habit_report(&scores, &config)?, &config));
        println!();
    }
    Ok(())
}
