//! CPP, JCSm, FCSm, the normalized ratios and PNC for a small team.
//!
//! ```text
//! cargo run --example bibliometric_indicators
//! ```

use peerstat::bibliometrics::{normalized_indicators, UncitedRule};
use peerstat::model::{BaselineTable, PublicationRecord};
use peerstat::report::biblio_md;

fn publication(
    id: &str,
    journal: &str,
    fields: &[&str],
    year: i32,
    citations: u64,
    own: u64,
) -> PublicationRecord {
    PublicationRecord {
        pub_id: id.into(),
        team_ids: vec!["T1".into()],
        journal_id: journal.into(),
        field_ids: fields.iter().map(|f| f.to_string()).collect(),
        year,
        citations_total: citations,
        self_citations: own,
    }
}

fn main() -> peerstat::Result<()> {
    let mut baselines = BaselineTable::default();
    baselines.insert_journal("Phys. Rev.", 2001, 6.0)?;
    baselines.insert_journal("Small J.", 2002, 1.5)?;
    baselines.insert_field("physics", 2001, 4.0)?;
    baselines.insert_field("physics", 2002, 3.0)?;
    baselines.insert_field("chemistry", 2002, 5.0)?;

    let pubs = [
        publication("P1", "Phys. Rev.", &["physics"], 2001, 14, 2),
        publication("P2", "Phys. Rev.", &["physics"], 2001, 3, 0),
        publication("P3", "Small J.", &["physics", "chemistry"], 2002, 4, 1),
        publication("P4", "Small J.", &["physics"], 2002, 1, 1),
    ];
    for rule in [
        UncitedRule::ExcludeSelfCitations,
        UncitedRule::IncludeSelfCitations,
    ] {
        let t = normalized_indicators("T1", &pubs, &baselines, rule)?;
        println!("{}\n", rule.describe());
        print!("{}", biblio_md(&[t]));
        println!();
    }
    Ok(())
}
