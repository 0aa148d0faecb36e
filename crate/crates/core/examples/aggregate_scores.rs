//! Team scores under the three aggregation schemes.
//!
//! ```text
//! cargo run --example aggregate_scores
//! ```

use peerstat::aggregation::{aggregate_evaluation, Scheme};
use peerstat::model::{Indicator, IndicatorKind, RatingMatrix, RatingScale};
use peerstat::report;

fn main() -> peerstat::Result<()> {
    let teams = vec!["T1".to_string(), "T2".into(), "T3".into()];
    let experts = vec!["E1".to_string(), "E2".into(), "E3".into()];
    let indicators = vec![
        Indicator::new("1A", "scientific quality", IndicatorKind::Global),
        Indicator::new("2A", "productivity", IndicatorKind::Global),
    ];
    let mut m = RatingMatrix::new(
        "demo",
        "Biology",
        RatingScale::one_to_ten(),
        teams,
        experts,
        indicators,
    );
    let scores = [
        ("E1", [(8.0, 6.0), (5.0, 6.0), (3.0, 4.0)]),
        ("E2", [(9.0, 9.0), (6.0, 5.0), (2.0, 2.0)]),
        ("E3", [(7.0, 8.0), (7.0, 7.0), (4.0, 3.0)]),
    ];
    for (e, rows) in scores {
        for (t, (a, b)) in ["T1", "T2", "T3"].iter().zip(rows) {
            m.set_score(e, t, "1A", a);
            m.set_score(e, t, "2A", b);
        }
    }
    // E3 knows T2 best.
    for (e, t, w) in [("E1", "T2", 1.0), ("E2", "T2", 1.0), ("E3", "T2", 3.0)] {
        m.set_expertise(e, t, w);
    }
    for e in ["E1", "E2", "E3"] {
        for t in ["T1", "T3"] {
            m.set_expertise(e, t, 1.0);
        }
    }

    for scheme in [Scheme::Plain, Scheme::ExpertiseWeighted] {
        println!("{}", report::scores_md(&aggregate_evaluation(&m, scheme)?));
    }

    // A panel that returns one agreed score per cell.
    let mut consensus = RatingMatrix::new(
        "consensus",
        "Economics",
        RatingScale::letters_a_to_d(),
        vec!["X1".into(), "X2".into()],
        vec!["panel".into()],
        vec![Indicator::new("a", "publications", IndicatorKind::Partial)],
    );
    let scale = consensus.scale.clone();
    consensus.set_score("panel", "X1", "a", scale.ordinal_to_numeric("A")?);
    consensus.set_score("panel", "X2", "a", scale.ordinal_to_numeric("C")?);
    print!(
        "{}",
        report::scores_md(&aggregate_evaluation(&consensus, Scheme::PanelConsensus)?)
    );
    Ok(())
}
