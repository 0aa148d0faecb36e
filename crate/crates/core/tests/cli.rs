use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use peerstat::model::StatConfig;
use peerstat::report::parse_compare_csv;
use peerstat::stats;

const MANIFEST: &str = r#"title = "Minimal"

[scales.ten]
min = 1
max = 10

[[evaluations]]
id = "ev"
discipline = "Biology"
scale = "ten"
"#;

const INDICATORS: &str = "evaluation,id,label,kind,group
ev,q,quality,global,
ev,p,productivity,global,
";

/// Two experts who agree perfectly on three teams.
const RATINGS: &str = "evaluation,discipline,expert,team,indicator,score
ev,Biology,E1,T1,q,8
ev,Biology,E1,T1,p,7
ev,Biology,E2,T1,q,9
ev,Biology,E2,T1,p,8
ev,Biology,E1,T2,q,5
ev,Biology,E1,T2,p,4
ev,Biology,E2,T2,q,6
ev,Biology,E2,T2,p,5
ev,Biology,E1,T3,q,3
ev,Biology,E1,T3,p,2
ev,Biology,E2,T3,q,4
ev,Biology,E2,T3,p,3
";

fn minimal_bundle() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("manifest.toml"), MANIFEST).unwrap();
    fs::write(dir.path().join("indicators.csv"), INDICATORS).unwrap();
    fs::write(dir.path().join("ratings.csv"), RATINGS).unwrap();
    dir
}

fn mini_bundle() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/mini_bundle")
}

fn peerstat(data: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peerstat"))
        .arg("--data")
        .arg(data)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn validate_reports_zero_errors() {
    let dir = minimal_bundle();
    let o = peerstat(dir.path(), &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("0 errors"), "{text}");
    assert!(
        text.contains("ev: 3 teams, 2 experts, 2 indicators, 12 scores"),
        "{text}"
    );
}

#[test]
fn perfect_agreement_is_high() {
    let dir = minimal_bundle();
    let o = peerstat(dir.path(), &["--format", "csv", "agreement"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(
        text.split("# agreement_pairs.csv")
            .next()
            .unwrap()
            .trim_start_matches("# agreement.csv\n")
            .as_bytes(),
    );
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row[col("classification")].to_string(), "High");
        assert_eq!(row[col("averaged_r")].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = minimal_bundle();
    for args in [
        vec!["bogus"],
        vec!["--alpha", "2", "validate"],
        vec!["aggregate", "--scheme", "median"],
        vec!["extensions", "--x", "q"],
    ] {
        let o = peerstat(dir.path(), &args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
    let o = peerstat(&mini_bundle(), &["compare", "--pool", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown pool `nope`"));
}

#[test]
fn help_exits_zero() {
    let o = peerstat(Path::new("."), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for cmd in [
        "validate",
        "aggregate",
        "agreement",
        "habits",
        "biblio",
        "compare",
        "distribution",
        "extensions",
        "simulate",
        "report",
    ] {
        assert!(stdout(&o).contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn data_errors_exit_two() {
    let missing = peerstat(Path::new("/definitely/not/here"), &["validate"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = minimal_bundle();
    let o = peerstat(dir.path(), &["biblio"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no publications"));

    let mut ratings = RATINGS.to_string();
    ratings.push_str("ev,Biology,E2,T3,p,4\n");
    fs::write(dir.path().join("ratings.csv"), ratings).unwrap();
    let o = peerstat(dir.path(), &["validate"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("ratings.csv:14") && err.contains("first on line 13"),
        "{err}"
    );
}

#[test]
fn out_directory_gets_named_files() {
    let dir = minimal_bundle();
    let out = tempfile::tempdir().unwrap();
    let o = peerstat(
        dir.path(),
        &[
            "--format",
            "csv",
            "agreement",
            "--out",
            out.path().to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    assert!(out.path().join("agreement.csv").is_file());
    assert!(out.path().join("agreement_pairs.csv").is_file());
}

#[test]
fn compare_csv_round_trips_and_flags_match_thresholds() {
    let o = peerstat(
        &mini_bundle(),
        &["--format", "csv", "compare", "--pool", "group"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let tables = parse_compare_csv(&text).unwrap();
    assert_eq!(tables.len(), 2);
    assert_eq!(peerstat::report::compare_csv(&tables).unwrap(), text);

    let config = StatConfig::new(0.05).unwrap();
    let mut checked = 0;
    for t in &tables {
        for row in &t.cells {
            for outcome in row {
                if let Some(c) = outcome.defined() {
                    assert_eq!(
                        c.significant,
                        stats::is_significant(c.r, c.n, &config).unwrap()
                    );
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 20);
}

#[test]
fn bold_cells_are_significant() {
    let o = peerstat(&mini_bundle(), &["compare", "--pool", "all"]);
    let text = stdout(&o);
    let config = StatConfig::new(0.05).unwrap();
    let mut numeric = 0;
    for cell in text
        .lines()
        .filter(|l| l.starts_with("| "))
        .flat_map(|l| l.split('|').skip(2))
    {
        let Some((value, n)) = cell.trim().split_once(" (") else {
            continue;
        };
        let Ok(n) = n.trim_end_matches(')').parse::<usize>() else {
            continue;
        };
        let (bold, value) = match value.strip_prefix("**").and_then(|s| s.strip_suffix("**")) {
            Some(v) => (true, v),
            None => (false, value),
        };
        let r: f64 = value.parse().unwrap();
        let crit = stats::critical_r(n, config.alpha()).unwrap();
        numeric += 1;
        if bold {
            assert!(r.abs() + 0.005 >= crit, "{r} bold below {crit}");
        } else {
            assert!(r.abs() - 0.005 <= crit, "{r} not bold above {crit}");
        }
    }
    assert!(numeric >= 20);
}

#[test]
fn simulate_is_reproducible_and_seed_sensitive() {
    let scenario =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/panel_vs_distinct.toml");
    let s = scenario.to_str().unwrap();
    let run = |seed: &str| {
        stdout(&peerstat(
            Path::new("."),
            &[
                "simulate",
                "--scenario",
                s,
                "--trials",
                "40",
                "--seed",
                seed,
            ],
        ))
    };
    let a = run("5");
    assert_eq!(a, run("5"));
    assert_ne!(a, run("6"));
    assert!(a.contains("# simulate_trials.csv"));
    assert_eq!(
        a.lines()
            .filter(|l| l.ends_with(",true") || l.ends_with(",false"))
            .count(),
        40
    );
}

#[test]
fn simulate_single_writes_loadable_ratings() {
    let scenario =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/single_panel.toml");
    let out = tempfile::tempdir().unwrap();
    let o = peerstat(
        Path::new("."),
        &[
            "simulate",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            out.path().to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let ratings = fs::read_to_string(out.path().join("simulate_ratings.csv")).unwrap();
    assert!(ratings.starts_with("evaluation,discipline,expert,team,indicator,score"));
    assert_eq!(ratings.lines().count(), 1 + 10 * 4 * 3);
}
