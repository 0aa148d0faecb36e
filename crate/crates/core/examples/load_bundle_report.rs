//! Loads a data bundle and renders the full Markdown report.
//!
//! ```text
//! cargo run --example load_bundle_report -- path/to/bundle > report.md
//! ```

use std::path::PathBuf;

use peerstat::io::load_bundle;
use peerstat::model::StatConfig;
use peerstat::pipeline::{analyze, render_report, ReportOptions};

fn main() -> peerstat::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/mini_bundle"));
    let bundle = load_bundle(&dir)?;
    let config = StatConfig::new(0.05)?;
    let analysis = analyze(&bundle, &ReportOptions::default(), &config)?;
    print!("{}", render_report(&bundle, &analysis, &config));
    Ok(())
}
