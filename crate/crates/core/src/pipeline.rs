//! Bundle-level analyses: runs the per-evaluation computations over a
//! loaded [`DataBundle`] and assembles the full Markdown report.

use std::fmt::Write as _;

use crate::aggregation::{Scheme, TeamScores};
use crate::agreement::{classify_agreement, habit_report, AgreementReport, HabitReport};
use crate::bibliometrics::{BibIndicator, TeamBibIndicators, UncitedRule};
use crate::comparison::{
    cross_method_table, extension_split, frequency_distribution, paired_points, Axis, BinSpec,
    CompareOptions, CorrelationTable, ExtensionSplit, Histogram, Pooling,
};
use crate::error::{Error, Result};
use crate::io::DataBundle;
use crate::model::StatConfig;
use crate::report::{self, group_ordered, AgreementEntry};

/// How evaluations are pooled for cross-method tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PoolMode {
    /// One table per evaluation.
    Evaluation,
    /// One table per manifest group.
    Group,
    /// One table per inter-peer agreement class.
    Agreement,
    /// A single table over every evaluation.
    All,
    /// One table for the named manifest group.
    Named(String),
}

impl PoolMode {
    pub fn parse(s: &str) -> Self {
        match s {
            "evaluation" | "eval" => Self::Evaluation,
            "group" => Self::Group,
            "agreement" => Self::Agreement,
            "all" => Self::All,
            other => Self::Named(other.to_string()),
        }
    }
}

pub fn agreement_entries(bundle: &DataBundle, config: &StatConfig) -> Result<Vec<AgreementEntry>> {
    bundle
        .evaluations
        .iter()
        .map(|e| match classify_agreement(&e.matrix, config) {
            Ok(r) => Ok(AgreementEntry::Classified(r)),
            Err(Error::NotClassifiable(_)) => Ok(AgreementEntry::NotClassifiable {
                evaluation: e.meta.id.clone(),
                reason: "no indicator has a pair of experts sharing at least three rated teams"
                    .into(),
            }),
            Err(err) => Err(err),
        })
        .collect()
}

pub fn habit_reports(scores: &[TeamScores], config: &StatConfig) -> Result<Vec<HabitReport>> {
    scores.iter().map(|s| habit_report(s, config)).collect()
}

fn pooled(group: &str, members: &[&TeamScores]) -> Pooling {
    Pooling::Pooled {
        group: group.to_string(),
        evaluations: members.iter().map(|s| s.evaluation_id.clone()).collect(),
    }
}

/// Cross-method tables for the requested pooling.
pub fn compare_tables(
    scores: &[TeamScores],
    agreement: &[AgreementEntry],
    bundle: &DataBundle,
    bib: &[TeamBibIndicators],
    pool: &PoolMode,
    options: CompareOptions,
    config: &StatConfig,
) -> Result<Vec<CorrelationTable>> {
    let columns = BibIndicator::STANDARD;
    let by_id = |id: &str| scores.iter().find(|s| s.evaluation_id == id);
    let groups: Vec<(String, Vec<&TeamScores>)> = match pool {
        PoolMode::Evaluation => {
            return scores
                .iter()
                .map(|s| {
                    cross_method_table(
                        &[s],
                        bib,
                        &columns,
                        Pooling::Single {
                            evaluation: s.evaluation_id.clone(),
                        },
                        options,
                        config,
                    )
                })
                .collect();
        }
        PoolMode::All => vec![("all".to_string(), scores.iter().collect())],
        PoolMode::Group => bundle
            .groups()
            .into_iter()
            .map(|(g, ids)| (g, ids.iter().filter_map(|id| by_id(id)).collect()))
            .collect(),
        PoolMode::Named(name) => {
            let (_, ids) = bundle
                .groups()
                .into_iter()
                .find(|(g, _)| g == name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown pool `{name}`")))?;
            vec![(
                name.clone(),
                ids.iter().filter_map(|id| by_id(id)).collect(),
            )]
        }
        PoolMode::Agreement => group_ordered(
            agreement
                .iter()
                .filter(|a| matches!(a, AgreementEntry::Classified(_)))
                .filter_map(|a| {
                    Some((
                        format!("{} agreement", a.class_label()),
                        by_id(a.evaluation())?,
                    ))
                }),
        ),
    };
    groups
        .into_iter()
        .filter(|(_, members)| !members.is_empty())
        .map(|(g, members)| {
            cross_method_table(
                &members,
                bib,
                &columns,
                pooled(&g, &members),
                options,
                config,
            )
        })
        .collect()
}

/// A titled histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub source: String,
    pub indicator: String,
    pub histogram: Histogram,
}

/// Peer-score histograms pooled over evaluations that share a scale and an
/// indicator id, followed by one histogram per standard citation indicator.
pub fn distributions(
    bundle: &DataBundle,
    scores: &[TeamScores],
    bib: &[TeamBibIndicators],
) -> Result<Vec<Distribution>> {
    let mut out = Vec::new();
    let keyed = bundle.evaluations.iter().zip(scores).flat_map(|(e, s)| {
        s.indicators
            .iter()
            .map(move |i| ((e.meta.scale.clone(), i.id.clone()), (e, s)))
    });
    for ((scale_name, ind), members) in group_ordered(keyed) {
        let values: Vec<f64> = members
            .iter()
            .flat_map(|(_, s)| s.column(&ind).into_values())
            .collect();
        if values.is_empty() {
            continue;
        }
        let spec = BinSpec::for_scale(&members[0].0.matrix.scale);
        let evals: Vec<&str> = members.iter().map(|(e, _)| e.meta.id.as_str()).collect();
        out.push(Distribution {
            source: format!("peer {scale_name} scale: {}", evals.join(", ")),
            indicator: ind,
            histogram: frequency_distribution(&values, spec)?,
        });
    }
    if !bib.is_empty() {
        for b in BibIndicator::STANDARD {
            let values: Vec<f64> = bib.iter().map(|t| b.value(t)).collect();
            out.push(Distribution {
                source: "citation analysis".into(),
                indicator: b.code().into(),
                histogram: frequency_distribution(&values, citation_bins(b))?,
            });
        }
    }
    Ok(out)
}

/// Ratio bins for the normalized indicators, ten-point bins for the
/// uncited percentage.
pub fn citation_bins(b: BibIndicator) -> BinSpec {
    if b == BibIndicator::Pnc {
        BinSpec {
            start: 0.0,
            width: 10.0,
            bins: Some(10),
        }
    } else {
        BinSpec::for_ratio()
    }
}

/// Extension split over all evaluations that provide both axes.
pub fn extensions(
    scores: &[TeamScores],
    bib: &[TeamBibIndicators],
    x: &str,
    y: &str,
) -> Result<ExtensionSplit> {
    let (ax, ay) = (Axis::parse(x), Axis::parse(y));
    let refs: Vec<&TeamScores> = scores.iter().collect();
    let points = paired_points(&refs, bib, &ax, &ay);
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "only {} teams have values for both `{x}` and `{y}`",
            points.len()
        )));
    }
    extension_split(&ax.label(), &ay.label(), &points)
}

/// Default report axes: the peer indicator present in most evaluations
/// against CPP/FCSm.
pub fn default_axes(scores: &[TeamScores]) -> Option<(String, String)> {
    let counts = group_ordered(
        scores
            .iter()
            .flat_map(|s| s.indicators.iter().map(|i| (i.id.clone(), ()))),
    );
    let best = counts.iter().map(|(_, v)| v.len()).max()?;
    let (id, _) = counts.into_iter().find(|(_, v)| v.len() == best)?;
    Some((id, BibIndicator::CppFcsm.code().to_string()))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportOptions {
    pub scheme: Option<Scheme>,
    pub uncited: UncitedRule,
    pub compare: CompareOptions,
    pub axes: Option<(String, String)>,
}

/// Everything computed for a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub scores: Vec<TeamScores>,
    pub agreement: Vec<AgreementEntry>,
    pub habits: Vec<HabitReport>,
    pub bib: Vec<TeamBibIndicators>,
    pub tables_by_agreement: Vec<CorrelationTable>,
    pub tables_by_group: Vec<CorrelationTable>,
    pub tables_by_evaluation: Vec<CorrelationTable>,
    pub distributions: Vec<Distribution>,
    pub extensions: Option<ExtensionSplit>,
}

pub fn analyze(
    bundle: &DataBundle,
    options: &ReportOptions,
    config: &StatConfig,
) -> Result<Analysis> {
    let scores = bundle.team_scores(options.scheme)?;
    let agreement = agreement_entries(bundle, config)?;
    let habits = habit_reports(&scores, config)?;
    let bib = if bundle.has_bibliometrics() {
        bundle.bib_indicators(options.uncited)?
    } else {
        Vec::new()
    };
    let (mut by_agreement, mut by_group, mut by_eval) = (Vec::new(), Vec::new(), Vec::new());
    let mut ext = None;
    if !bib.is_empty() {
        let tables = |mode: PoolMode| {
            compare_tables(
                &scores,
                &agreement,
                bundle,
                &bib,
                &mode,
                options.compare,
                config,
            )
        };
        by_agreement = tables(PoolMode::Agreement)?;
        by_group = tables(PoolMode::Group)?;
        by_eval = tables(PoolMode::Evaluation)?;
        if let Some((x, y)) = options.axes.clone().or_else(|| default_axes(&scores)) {
            ext = Some(extensions(&scores, &bib, &x, &y)?);
        }
    }
    let distributions = distributions(bundle, &scores, &bib)?;
    Ok(Analysis {
        scores,
        agreement,
        habits,
        bib,
        tables_by_agreement: by_agreement,
        tables_by_group: by_group,
        tables_by_evaluation: by_eval,
        distributions,
        extensions: ext,
    })
}

fn classified(entries: &[AgreementEntry]) -> impl Iterator<Item = &AgreementReport> {
    entries.iter().filter_map(|e| match e {
        AgreementEntry::Classified(r) => Some(r),
        AgreementEntry::NotClassifiable { .. } => None,
    })
}

/// The full Markdown report with inline SVG figures.
pub fn render_report(bundle: &DataBundle, a: &Analysis, config: &StatConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}\n", bundle.title);
    let _ = writeln!(
        out,
        "Correlations are Pearson coefficients tested two-tailed (t-test, N - 2 degrees of freedom). \
         Values in **bold** are significant at the {} level.\n",
        config.alpha()
    );

    out.push_str("## Evaluations\n\n");
    let rows: Vec<Vec<String>> = bundle
        .evaluations
        .iter()
        .zip(&a.scores)
        .map(|(e, s)| {
            vec![
                e.meta.id.clone(),
                e.meta.discipline.clone(),
                e.meta.scale.clone(),
                s.scheme.to_string(),
                e.matrix.teams.len().to_string(),
                e.matrix.experts.len().to_string(),
                e.matrix
                    .indicators
                    .iter()
                    .map(|i| i.id.as_str())
                    .collect::<Vec<_>>()
                    .join(" "),
                e.meta.group.clone().unwrap_or_default(),
            ]
        })
        .collect();
    out.push_str(&report::md_table(
        &[
            "evaluation",
            "discipline",
            "scale",
            "scheme",
            "teams",
            "experts",
            "indicators",
            "group",
        ],
        &rows,
    ));
    out.push('\n');

    out.push_str("## Team scores\n\n");
    for s in &a.scores {
        out.push_str(&report::scores_md(s));
        out.push('\n');
    }

    out.push_str("## Inter-peer agreement\n\n");
    let _ = writeln!(
        out,
        "Significance: {}.\n",
        AgreementReport::SIGNIFICANCE_BASIS
    );
    for e in &a.agreement {
        out.push_str(&report::agreement_md(e, config));
        out.push('\n');
    }
    let rows: Vec<Vec<String>> = a
        .agreement
        .iter()
        .map(|e| vec![e.evaluation().to_string(), e.class_label()])
        .collect();
    out.push_str("### Summary\n\n");
    out.push_str(&report::md_table(&["evaluation", "agreement"], &rows));
    out.push('\n');

    out.push_str("## Correlations between peer review indicators\n\n");
    let total_warnings: usize = a.habits.iter().map(|h| h.warnings.len()).sum();
    let flagged: Vec<&str> = a
        .habits
        .iter()
        .filter(|h| !h.warnings.is_empty())
        .map(|h| h.evaluation_id.as_str())
        .collect();
    if flagged.is_empty() {
        out.push_str("No evaluation shows signs of diverging rating habits.\n\n");
    } else {
        let _ = writeln!(
            out,
            "{total_warnings} expected correlations are weak or negative in: {}. \
             This may indicate diverging rating habits.\n",
            flagged.join(", ")
        );
    }
    for h in &a.habits {
        out.push_str(&report::habits_md(h, config));
        out.push('\n');
    }

    if !a.bib.is_empty() {
        out.push_str("## Citation analysis indicators\n\n");
        out.push_str(&report::biblio_md(&a.bib));
        out.push('\n');

        out.push_str("## Peer review compared with citation analysis\n\n");
        for (title, tables) in [
            ("Pooled by inter-peer agreement", &a.tables_by_agreement),
            ("Pooled by group", &a.tables_by_group),
            ("Per evaluation", &a.tables_by_evaluation),
        ] {
            if tables.is_empty() {
                continue;
            }
            let _ = writeln!(out, "### {title}\n");
            for t in tables.iter() {
                out.push_str(&report::correlation_table_md(t, config).replacen("### ", "#### ", 1));
                out.push('\n');
            }
        }
        let n_classified = classified(&a.agreement).count();
        if n_classified < a.agreement.len() {
            let _ = writeln!(
                out,
                "{} evaluation(s) without a classifiable inter-peer agreement are left out of the agreement pools.\n",
                a.agreement.len() - n_classified
            );
        }
    }

    out.push_str("## Distributions\n\n");
    for d in &a.distributions {
        let title = format!("{}: {}", d.source, d.indicator);
        out.push_str(&report::histogram_md(&title, &d.histogram));
        out.push('\n');
        out.push_str(&report::histogram_svg(&title, &d.indicator, &d.histogram));
        out.push('\n');
    }

    if let Some(split) = &a.extensions {
        out.push_str("## Extensions\n\n");
        out.push_str(&report::extensions_md(split));
        out.push('\n');
        out.push_str(&report::scatter_svg(
            &format!("{} vs {}", split.y_indicator, split.x_indicator),
            split,
        ));
    }
    out
}
