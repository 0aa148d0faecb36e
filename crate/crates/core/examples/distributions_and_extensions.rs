//! Relative frequency distributions and the one-SD extension split of
//! peer scores against CPP/FCSm.
//!
//! ```text
//! cargo run --example distributions_and_extensions -- /tmp/figures
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use peerstat::comparison::extension_overlap_summary;
use peerstat::io::load_bundle;
use peerstat::model::StatConfig;
use peerstat::pipeline::{analyze, ReportOptions};
use peerstat::report::{extensions_md, histogram_md, histogram_svg, scatter_svg};

fn main() -> peerstat::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let bundle = load_bundle(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/mini_bundle"))?;
    let a = analyze(&bundle, &ReportOptions::default(), &StatConfig::new(0.05)?)?;

    for d in a
        .distributions
        .iter()
        .filter(|d| d.indicator == "1A" || d.indicator == "CPP/FCSm")
    {
        let title = format!("{}: {}", d.source, d.indicator);
        print!("{}", histogram_md(&title, &d.histogram));
        println!();
        if let Some(dir) = &out {
            fs::create_dir_all(dir).expect("output directory");
            let name = d.indicator.replace('/', "_");
            fs::write(
                dir.join(format!("hist_{name}.svg")),
                histogram_svg(&title, &d.indicator, &d.histogram),
            )
            .expect("write svg");
        }
    }

    if let Some(split) = &a.extensions {
        print!("{}", extensions_md(split));
        println!("\n{:?}", extension_overlap_summary(split));
        if let Some(dir) = &out {
            fs::write(dir.join("extensions.svg"), scatter_svg("Extensions", split))
                .expect("write svg");
        }
    }
    Ok(())
}
