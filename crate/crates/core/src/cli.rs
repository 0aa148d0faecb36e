//! The `peerstat` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::aggregation::Scheme;
use crate::bibliometrics::UncitedRule;
use crate::comparison::CompareOptions;
use crate::error::{Error, Result};
use crate::io::{load_bundle, write_ratings_csv, DataBundle};
use crate::model::StatConfig;
use crate::pipeline::{self, PoolMode, ReportOptions};
use crate::report::{self, csv_string};
use crate::sim::{
    experiment_agreement_sweep, experiment_panel_vs_distinct, simulate_evaluation, ExperimentSpec,
    Scenario,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Md,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Plain,
    Weighted,
    Consensus,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Plain => Scheme::Plain,
            SchemeArg::Weighted => Scheme::ExpertiseWeighted,
            SchemeArg::Consensus => Scheme::PanelConsensus,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "peerstat",
    version,
    about = "Peer review reliability and citation analysis comparison"
)]
pub struct Cli {
    /// Bundle directory with manifest.toml and the CSV tables.
    #[arg(long, global = true, default_value = ".")]
    pub data: PathBuf,
    /// Significance level.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,
    /// Write output files into this directory instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Md)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and check a bundle.
    Validate,
    /// Team-level averages of expert scores.
    Aggregate {
        /// Defaults to each evaluation's scheme in the manifest.
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
    },
    /// Inter-peer correlations and agreement classes.
    Agreement,
    /// Correlations between peer indicators and rating-habit warnings.
    Habits {
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
    },
    /// Citation analysis indicators per team.
    Biblio {
        /// Count publications cited only by their authors as cited.
        #[arg(long)]
        include_self_citations: bool,
    },
    /// Peer review against citation analysis correlation tables.
    Compare {
        /// evaluation, group, agreement, all, or a manifest group name.
        #[arg(long, default_value = "evaluation")]
        pool: String,
        /// z-score each evaluation before pooling.
        #[arg(long)]
        standardize: bool,
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
    },
    /// Relative frequency distributions.
    Distribution,
    /// One-SD extension split of two indicators.
    Extensions {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Run a simulation scenario.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every analysis and write a Markdown report.
    Report {
        #[arg(long, requires = "y")]
        x: Option<String>,
        #[arg(long, requires = "x")]
        y: Option<String>,
    },
}

/// A named output document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub name: String,
    pub content: String,
}

fn out(name: impl Into<String>, content: String) -> Output {
    Output {
        name: name.into(),
        content,
    }
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outputs) => match emit(&cli, &outputs) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn emit(cli: &Cli, outputs: &[Output]) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            for o in outputs {
                let path = dir.join(&o.name);
                fs::write(&path, &o.content).map_err(|e| io_error(&path, e))?;
            }
        }
        None => {
            let many = outputs.len() > 1;
            for o in outputs {
                if many {
                    println!("# {}", o.name);
                }
                print!("{}", o.content);
                if many {
                    println!();
                }
            }
        }
    }
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn execute(cli: &Cli) -> std::result::Result<Vec<Output>, Failure> {
    let config = StatConfig::new(cli.alpha).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Command::Simulate {
        scenario,
        trials,
        seed,
    } = &cli.command
    {
        return simulate(scenario, *trials, *seed, cli.format, &config);
    }
    let bundle = load_bundle(&cli.data)?;
    let md = cli.format == Format::Md;
    let scheme = |s: &Option<SchemeArg>| s.map(Scheme::from);
    let outputs = match &cli.command {
        Command::Validate => vec![out(
            if md { "validate.md" } else { "validate.csv" },
            validate(&bundle, md)?,
        )],
        Command::Aggregate { scheme: s } => {
            let scores = bundle.team_scores(scheme(s))?;
            if md {
                let text: String = scores.iter().map(|s| report::scores_md(s) + "\n").collect();
                vec![out("aggregate.md", text)]
            } else {
                let rows: Vec<_> = scores.iter().flat_map(report::scores_rows).collect();
                vec![out(
                    "aggregate.csv",
                    csv_string(&report::SCORES_HEADER, &rows)?,
                )]
            }
        }
        Command::Agreement => {
            let entries = pipeline::agreement_entries(&bundle, &config)?;
            if md {
                let text: String = entries
                    .iter()
                    .map(|e| report::agreement_md(e, &config) + "\n")
                    .collect();
                vec![out("agreement.md", text)]
            } else {
                let rows: Vec<_> = entries.iter().flat_map(report::agreement_rows).collect();
                let pairs: Vec<_> = entries.iter().flat_map(report::pair_rows).collect();
                vec![
                    out(
                        "agreement.csv",
                        csv_string(&report::AGREEMENT_HEADER, &rows)?,
                    ),
                    out(
                        "agreement_pairs.csv",
                        csv_string(&report::PAIRS_HEADER, &pairs)?,
                    ),
                ]
            }
        }
        Command::Habits { scheme: s } => {
            let reports = pipeline::habit_reports(&bundle.team_scores(scheme(s))?, &config)?;
            if md {
                let text: String = reports
                    .iter()
                    .map(|r| report::habits_md(r, &config) + "\n")
                    .collect();
                vec![out("habits.md", text)]
            } else {
                let rows: Vec<_> = reports.iter().flat_map(report::habits_rows).collect();
                let warnings: Vec<_> = reports.iter().flat_map(report::warning_rows).collect();
                vec![
                    out("habits.csv", csv_string(&report::HABITS_HEADER, &rows)?),
                    out(
                        "habits_warnings.csv",
                        csv_string(&report::WARNINGS_HEADER, &warnings)?,
                    ),
                ]
            }
        }
        Command::Biblio {
            include_self_citations,
        } => {
            no_bib_check(&bundle)?;
            let bib = bundle.bib_indicators(uncited_rule(*include_self_citations))?;
            if md {
                vec![out("biblio.md", report::biblio_md(&bib))]
            } else {
                vec![out("biblio.csv", report::biblio_csv(&bib)?)]
            }
        }
        Command::Compare {
            pool,
            standardize,
            scheme: s,
        } => {
            no_bib_check(&bundle)?;
            let mode = PoolMode::parse(pool);
            if let PoolMode::Named(name) = &mode {
                if !bundle.groups().iter().any(|(g, _)| g == name) {
                    return Err(Failure::Usage(format!(
                        "unknown pool `{name}`; use evaluation, group, agreement, all or a manifest group"
                    )));
                }
            }
            let scores = bundle.team_scores(scheme(s))?;
            let agreement = if mode == PoolMode::Agreement {
                pipeline::agreement_entries(&bundle, &config)?
            } else {
                Vec::new()
            };
            let bib = bundle.bib_indicators(UncitedRule::default())?;
            let options = CompareOptions {
                standardize: *standardize,
            };
            let tables = pipeline::compare_tables(
                &scores, &agreement, &bundle, &bib, &mode, options, &config,
            )?;
            if md {
                let text: String = tables
                    .iter()
                    .map(|t| report::correlation_table_md(t, &config) + "\n")
                    .collect();
                vec![out("compare.md", text)]
            } else {
                vec![out("compare.csv", report::compare_csv(&tables)?)]
            }
        }
        Command::Distribution => {
            let scores = bundle.team_scores(None)?;
            let bib = if bundle.has_bibliometrics() {
                bundle.bib_indicators(UncitedRule::default())?
            } else {
                Vec::new()
            };
            let dists = pipeline::distributions(&bundle, &scores, &bib)?;
            if md {
                let text: String = dists
                    .iter()
                    .map(|d| {
                        report::histogram_md(
                            &format!("{}: {}", d.source, d.indicator),
                            &d.histogram,
                        ) + "\n"
                    })
                    .collect();
                vec![out("distribution.md", text)]
            } else {
                let rows: Vec<_> = dists
                    .iter()
                    .flat_map(|d| report::histogram_rows(&d.source, &d.indicator, &d.histogram))
                    .collect();
                vec![out(
                    "distribution.csv",
                    csv_string(&report::HISTOGRAM_HEADER, &rows)?,
                )]
            }
        }
        Command::Extensions { x, y } => {
            let scores = bundle.team_scores(None)?;
            let bib = if bundle.has_bibliometrics() {
                bundle.bib_indicators(UncitedRule::default())?
            } else {
                Vec::new()
            };
            let split = pipeline::extensions(&scores, &bib, x, y)?;
            if md {
                vec![out("extensions.md", report::extensions_md(&split))]
            } else {
                let rows = report::extension_rows(&split);
                vec![out(
                    "extensions.csv",
                    csv_string(&report::EXTENSIONS_HEADER, &rows)?,
                )]
            }
        }
        Command::Report { x, y } => {
            let options = ReportOptions {
                axes: x.clone().zip(y.clone()),
                ..ReportOptions::default()
            };
            let analysis = pipeline::analyze(&bundle, &options, &config)?;
            let mut outputs = vec![out(
                "report.md",
                pipeline::render_report(&bundle, &analysis, &config),
            )];
            if !md {
                let tables: Vec<_> = analysis
                    .tables_by_agreement
                    .iter()
                    .chain(&analysis.tables_by_group)
                    .chain(&analysis.tables_by_evaluation)
                    .cloned()
                    .collect();
                let habits: Vec<_> = analysis
                    .habits
                    .iter()
                    .flat_map(report::habits_rows)
                    .collect();
                let agreement: Vec<_> = analysis
                    .agreement
                    .iter()
                    .flat_map(report::agreement_rows)
                    .collect();
                outputs.push(out(
                    "agreement.csv",
                    csv_string(&report::AGREEMENT_HEADER, &agreement)?,
                ));
                outputs.push(out(
                    "habits.csv",
                    csv_string(&report::HABITS_HEADER, &habits)?,
                ));
                if !analysis.bib.is_empty() {
                    outputs.push(out("biblio.csv", report::biblio_csv(&analysis.bib)?));
                    outputs.push(out("compare.csv", report::compare_csv(&tables)?));
                }
            }
            outputs
        }
        Command::Simulate { .. } => unreachable!("handled above"),
    };
    Ok(outputs)
}

fn uncited_rule(include_self: bool) -> UncitedRule {
    if include_self {
        UncitedRule::IncludeSelfCitations
    } else {
        UncitedRule::ExcludeSelfCitations
    }
}

fn no_bib_check(bundle: &DataBundle) -> Result<()> {
    if bundle.has_bibliometrics() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "bundle `{}` has no publications",
            bundle.root.display()
        )))
    }
}

fn validate(bundle: &DataBundle, md: bool) -> Result<String> {
    if !md {
        let rows: Vec<Vec<String>> = bundle
            .evaluations
            .iter()
            .map(|e| {
                vec![
                    e.meta.id.clone(),
                    e.matrix.teams.len().to_string(),
                    e.matrix.experts.len().to_string(),
                    e.matrix.indicators.len().to_string(),
                    e.matrix.scores.len().to_string(),
                    "0".to_string(),
                ]
            })
            .collect();
        return csv_string(
            &[
                "evaluation",
                "teams",
                "experts",
                "indicators",
                "scores",
                "errors",
            ],
            &rows,
        );
    }
    let mut s = String::from("0 errors\n\n");
    for e in &bundle.evaluations {
        let _ = writeln!(
            s,
            "- {}: {} teams, {} experts, {} indicators, {} scores",
            e.meta.id,
            e.matrix.teams.len(),
            e.matrix.experts.len(),
            e.matrix.indicators.len(),
            e.matrix.scores.len()
        );
    }
    let _ = writeln!(s, "- publications: {}", bundle.publications.len());
    Ok(s)
}

fn simulate(
    path: &Path,
    trials: Option<u64>,
    seed: Option<u64>,
    format: Format,
    config: &StatConfig,
) -> std::result::Result<Vec<Output>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut scenario = Scenario::from_toml(&text)?;
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let md = format == Format::Md;
    let experiment = scenario
        .experiment
        .clone()
        .unwrap_or(ExperimentSpec::Single);
    let outputs = match experiment {
        ExperimentSpec::Single => {
            let config_sim = scenario.materialize(0)?;
            let matrix = simulate_evaluation(&config_sim)?;
            let mut buf = Vec::new();
            write_ratings_csv(&matrix, &mut buf)?;
            let csv = String::from_utf8(buf).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            if md {
                let entry = match crate::agreement::classify_agreement(&matrix, config) {
                    Ok(r) => report::AgreementEntry::Classified(r),
                    Err(Error::NotClassifiable(_)) => report::AgreementEntry::NotClassifiable {
                        evaluation: matrix.evaluation_id.clone(),
                        reason: "no expert pair shares three teams".into(),
                    },
                    Err(e) => return Err(e.into()),
                };
                let scores = crate::aggregation::aggregate_evaluation(&matrix, Scheme::Plain)?;
                let habits = crate::agreement::habit_report(&scores, config)?;
                let text = format!(
                    "# Simulated evaluation (seed {})\n\n{}\n{}\n{}",
                    scenario.seed,
                    report::scores_md(&scores),
                    report::agreement_md(&entry, config),
                    report::habits_md(&habits, config)
                );
                vec![out("simulate.md", text), out("simulate_ratings.csv", csv)]
            } else {
                vec![out("simulate_ratings.csv", csv)]
            }
        }
        ExperimentSpec::PanelVsDistinct { trials: t } => {
            let n = trials.unwrap_or(t);
            let s = experiment_panel_vs_distinct(&scenario, n, config)?;
            let rows: Vec<Vec<String>> = s
                .trials
                .iter()
                .map(|t| {
                    vec![
                        t.trial.to_string(),
                        t.panel_mean_r.map_or_else(String::new, |v| v.to_string()),
                        t.distinct_mean_r
                            .map_or_else(String::new, |v| v.to_string()),
                        t.panel_undefined.to_string(),
                        t.distinct_undefined.to_string(),
                        t.panel_wins().to_string(),
                    ]
                })
                .collect();
            let csv = csv_string(
                &[
                    "trial",
                    "panel_mean_r",
                    "distinct_mean_r",
                    "panel_undefined",
                    "distinct_undefined",
                    "panel_wins",
                ],
                &rows,
            )?;
            if md {
                let ms = |m: Option<crate::sim::MeanSe>| {
                    m.map_or_else(
                        || "n/a".to_string(),
                        |m| {
                            format!(
                                "{} ± {} ({} trials)",
                                report::f2(m.mean),
                                report::f2(m.se),
                                m.count
                            )
                        },
                    )
                };
                let text = format!(
                    "# Panel versus distinct experts (seed {}, {} trials)\n\n{}\nPanel wins in {} of {} trials ({:.1}%).\n",
                    scenario.seed,
                    n,
                    report::md_table(
                        &["design", "mean inter-indicator r ± SE", "undefined pairs"],
                        &[
                            vec!["full panel".into(), ms(s.panel), s.panel_undefined_pairs.to_string()],
                            vec!["distinct per team".into(), ms(s.distinct), s.distinct_undefined_pairs.to_string()],
                            vec!["difference".into(), ms(s.difference), String::new()],
                        ]
                    ),
                    s.panel_wins,
                    s.trials.len(),
                    100.0 * s.panel_win_fraction()
                );
                vec![out("simulate.md", text), out("simulate_trials.csv", csv)]
            } else {
                vec![out("simulate_trials.csv", csv)]
            }
        }
        ExperimentSpec::AgreementSweep { sigmas, trials: t } => {
            let n = trials.unwrap_or(t);
            let points = experiment_agreement_sweep(&scenario, &sigmas, n, config)?;
            let header = [
                "sigma",
                "trials",
                "high",
                "intermediate",
                "low",
                "not_classifiable",
            ];
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|p| {
                    vec![
                        p.sigma.to_string(),
                        p.trials.to_string(),
                        p.high.to_string(),
                        p.intermediate.to_string(),
                        p.low.to_string(),
                        p.not_classifiable.to_string(),
                    ]
                })
                .collect();
            let csv = csv_string(&header, &rows)?;
            if md {
                let text = format!(
                    "# Agreement sweep (seed {}, {} trials per sigma)\n\n{}",
                    scenario.seed,
                    n,
                    report::md_table(&header, &rows)
                );
                vec![out("simulate.md", text), out("simulate_sweep.csv", csv)]
            } else {
                vec![out("simulate_sweep.csv", csv)]
            }
        }
    };
    Ok(outputs)
}
