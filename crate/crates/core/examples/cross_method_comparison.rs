//! Correlating peer scores with citation indicators, per evaluation and
//! pooled.
//!
//! ```text
//! cargo run --example cross_method_comparison
//! ```

use std::path::Path;

use peerstat::bibliometrics::{BibIndicator, UncitedRule};
use peerstat::comparison::{cross_method_table, sign_check, CompareOptions, Pooling};
use peerstat::io::load_bundle;
use peerstat::model::StatConfig;
use peerstat::report::correlation_table_md;

fn main() -> peerstat::Result<()> {
    let bundle = load_bundle(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/mini_bundle"))?;
    let config = StatConfig::new(0.05)?;
    let scores = bundle.team_scores(None)?;
    let bib = bundle.bib_indicators(UncitedRule::default())?;

    let first = &scores[0];
    let single = cross_method_table(
        &[first],
        &bib,
        &BibIndicator::STANDARD,
        Pooling::Single {
            evaluation: first.evaluation_id.clone(),
        },
        CompareOptions::default(),
        &config,
    )?;
    print!("{}", correlation_table_md(&single, &config));
    for d in sign_check(&single) {
        println!("unexpected sign: {d:?}");
    }
    println!();

    let all: Vec<_> = scores.iter().collect();
    let pooled = cross_method_table(
        &all,
        &bib,
        &BibIndicator::STANDARD,
        Pooling::Pooled {
            group: "all".into(),
            evaluations: scores.iter().map(|s| s.evaluation_id.clone()).collect(),
        },
        CompareOptions { standardize: true },
        &config,
    )?;
    print!("{}", correlation_table_md(&pooled, &config));
    Ok(())
}
