//! Regenerates the miniature bundle in `data/mini_bundle` (or the directory
//! given as the first argument) from the rating simulator.
//!
//! Three evaluations: a full panel with expertise weights, an evaluation
//! with a different expert for every team, and a consensus evaluation on
//! partial indicators with a letter scale.
//!
//! ```text
//! cargo run --example build_fixture_bundle -- /tmp/bundle
//! ```

use std::fs;
use std::path::PathBuf;

use peerstat::model::IndicatorKind;
use peerstat::sim::{
    simulate_evaluation, Assignment, HabitSpec, IndicatorSpec, QualitySpec, ScaleSpec, Scenario,
    TransformSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const YEARS: [i32; 4] = [2000, 2001, 2002, 2003];
const JOURNALS: [(&str, f64, &str); 6] = [
    ("J1", 4.0, "F1"),
    ("J2", 9.0, "F1"),
    ("J3", 3.0, "F2"),
    ("J4", 6.5, "F2"),
    ("J5", 5.0, "F1;F2"),
    ("J6", 2.0, "F3"),
];
const FIELDS: [(&str, f64); 3] = [("F1", 5.5), ("F2", 4.5), ("F3", 2.5)];

fn globals(ids: &[&str]) -> Vec<IndicatorSpec> {
    ids.iter()
        .map(|id| IndicatorSpec {
            id: id.to_string(),
            kind: IndicatorKind::Global,
            group: None,
        })
        .collect()
}

fn scenario(
    teams: usize,
    experts: usize,
    quality: QualitySpec,
    noise: f64,
    habits: HabitSpec,
    assignment: Assignment,
    seed: u64,
) -> Scenario {
    Scenario {
        teams,
        experts,
        scale: ScaleSpec {
            min: 1.0,
            max: 10.0,
        },
        indicators: globals(&["1A", "1B", "1C", "2A"]),
        quality,
        noise_sd: noise,
        habits,
        transform: TransformSpec::default(),
        assignment,
        seed,
        experiment: None,
    }
}

struct Rows {
    ratings: Vec<String>,
    indicators: Vec<String>,
    expertise: Vec<String>,
    /// (team, latent impact z)
    teams: Vec<(String, f64)>,
}

fn add_simulated(
    rows: &mut Rows,
    eval: &str,
    discipline: &str,
    prefix: &str,
    s: &Scenario,
    weights: Option<&mut ChaCha8Rng>,
) {
    let cfg = s.materialize(0).expect("valid scenario");
    let m = simulate_evaluation(&cfg).expect("simulation");
    let team = |t: &str| format!("{prefix}-{t}");
    let expert = |e: &str| format!("{prefix}-{e}");
    for ind in &m.indicators {
        rows.indicators.push(format!(
            "{eval},{},{},{},",
            ind.id,
            ind.label,
            ind.kind.as_str()
        ));
    }
    for t in &m.teams {
        for e in &m.experts {
            for ind in &m.indicators {
                if let Some(v) = m.score(e, t, &ind.id) {
                    rows.ratings.push(format!(
                        "{eval},{discipline},{},{},{},{v}",
                        expert(e),
                        team(t),
                        ind.id
                    ));
                }
            }
        }
    }
    if let Some(rng) = weights {
        for t in &m.teams {
            for e in &m.experts {
                let w: u32 = rng.random_range(1..=3);
                rows.expertise
                    .push(format!("{eval},{},{},{w}", expert(e), team(t)));
            }
        }
    }
    let base = s.quality.base;
    let sd = s.quality.team_sd.max(1e-9);
    for (i, t) in m.teams.iter().enumerate() {
        let q = cfg.quality[i].iter().sum::<f64>() / cfg.quality[i].len() as f64;
        rows.teams.push((team(t), (q - base) / sd));
    }
}

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/mini_bundle"));
    fs::create_dir_all(&dir).expect("create bundle directory");
    let mut rng = ChaCha8Rng::seed_from_u64(2006);
    let mut rows = Rows {
        ratings: vec!["evaluation,discipline,expert,team,indicator,score".into()],
        indicators: vec!["evaluation,id,label,kind,group".into()],
        expertise: vec!["evaluation,expert,team,weight".into()],
        teams: Vec::new(),
    };

    let panel = scenario(
        8,
        4,
        QualitySpec {
            base: 6.0,
            team_sd: 1.3,
            indicator_sd: 0.35,
        },
        0.6,
        HabitSpec {
            offset: [-1.0, 1.0],
            gain: [0.85, 1.15],
            shared: false,
        },
        Assignment::FullPanel,
        11,
    );
    add_simulated(
        &mut rows,
        "chem-panel",
        "Chemistry",
        "CP",
        &panel,
        Some(&mut rng),
    );

    let distinct = scenario(
        6,
        6,
        QualitySpec {
            base: 6.0,
            team_sd: 0.4,
            indicator_sd: 0.2,
        },
        0.5,
        HabitSpec {
            offset: [-2.0, 2.0],
            gain: [0.7, 1.3],
            shared: false,
        },
        Assignment::DistinctPerTeam,
        23,
    );
    add_simulated(&mut rows, "phys-distinct", "Physics", "PD", &distinct, None);

    // Consensus scores on independent partial indicators; the global
    // indicator follows their mean.
    let letters = ["D", "C", "B", "A"];
    for (id, label) in [
        ("a", "publications"),
        ("b", "projects"),
        ("c", "conferences"),
    ] {
        rows.indicators
            .push(format!("econ-partial,{id},{label},partial,"));
    }
    rows.indicators
        .push("econ-partial,e,overall evaluation,global,".into());
    for t in 1..=10 {
        let team = format!("EP-T{t:02}");
        let mut codes = Vec::new();
        for id in ["a", "b", "c"] {
            let z: f64 = rng.sample(StandardNormal);
            let code = (2.5 + 0.9 * z).round().clamp(1.0, 4.0);
            codes.push(code);
            rows.ratings.push(format!(
                "econ-partial,Applied Economics,panel,{team},{id},{}",
                letters[code as usize - 1]
            ));
        }
        let z: f64 = rng.sample(StandardNormal);
        let e = (codes.iter().sum::<f64>() / 3.0 + 0.3 * z)
            .round()
            .clamp(1.0, 4.0);
        rows.ratings.push(format!(
            "econ-partial,Applied Economics,panel,{team},e,{}",
            letters[e as usize - 1]
        ));
        let impact = (codes.iter().sum::<f64>() / 3.0 - 2.5) / 0.6;
        rows.teams.push((team, impact));
    }

    let mut baselines = vec!["kind,key,year,expected_cpp".to_string()];
    for (j, base, _) in JOURNALS {
        for y in YEARS {
            baselines.push(format!(
                "journal,{j},{y},{}",
                base * (2004 - y) as f64 / 2.0
            ));
        }
    }
    for (f, base) in FIELDS {
        for y in YEARS {
            baselines.push(format!("field,{f},{y},{}", base * (2004 - y) as f64 / 2.0));
        }
    }

    let mut pubs = vec!["team,pub_id,journal,year,fields,citations,self_citations".to_string()];
    let mut next = 1;
    let mut previous: Option<String> = None;
    for (team, impact) in &rows.teams {
        let n = rng.random_range(3..=7);
        for k in 0..n {
            let (journal, base, fields) = JOURNALS[rng.random_range(0..JOURNALS.len())];
            let year = YEARS[rng.random_range(0..YEARS.len())];
            let noise: f64 = rng.sample(StandardNormal);
            let expected = base * (2004 - year) as f64 / 2.0;
            let lambda = expected * (0.35 * impact + 0.6 * noise).exp();
            let citations = if rng.random::<f64>() < 0.15 {
                0
            } else {
                lambda.round() as u64
            };
            let self_citations = rng.random_range(0..=2u64).min(citations);
            let id = format!("P{next:04}");
            next += 1;
            let line = format!("{journal},{year},{fields},{citations},{self_citations}");
            pubs.push(format!("{team},{id},{line}"));
            // Every fourth team shares its first publication with the previous team.
            if k == 0 && next % 4 == 0 {
                if let Some(prev) = &previous {
                    if prev[..2] == team[..2] {
                        pubs.push(format!("{prev},{id},{line}"));
                    }
                }
            }
        }
        previous = Some(team.clone());
    }

    let manifest = r#"title = "Miniature evaluation bundle"

[scales.ten]
min = 1
max = 10

[scales.letters]
labels = ["A", "B", "C", "D"]

[[evaluations]]
id = "chem-panel"
discipline = "Chemistry"
scale = "ten"
scheme = "weighted"
group = "panel"
reference_period = [2000, 2003]

[[evaluations]]
id = "phys-distinct"
discipline = "Physics"
scale = "ten"
scheme = "plain"
group = "distinct"
reference_period = [2000, 2003]

[[evaluations]]
id = "econ-partial"
discipline = "Applied Economics"
scale = "letters"
scheme = "consensus"
group = "panel"
reference_period = [2000, 2003]
"#;
    let write = |name: &str, lines: &[String]| {
        fs::write(dir.join(name), lines.join("\n") + "\n").expect("write bundle file");
    };
    fs::write(dir.join("manifest.toml"), manifest).expect("write manifest");
    write("ratings.csv", &rows.ratings);
    write("indicators.csv", &rows.indicators);
    write("expertise.csv", &rows.expertise);
    write("baselines.csv", &baselines);
    write("publications.csv", &pubs);
    println!("wrote bundle to {}", dir.display());
}
