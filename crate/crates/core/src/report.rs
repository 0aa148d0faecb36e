//! Rendering of analysis results as Markdown, CSV and SVG.
//!
//! Human-readable tables show two decimals and mark significant
//! correlations in bold. CSV output keeps full precision and can be read
//! back with the matching parser. Nothing here depends on the clock or on
//! hash ordering, so equal inputs give equal bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::aggregation::TeamScores;
use crate::agreement::{AgreementReport, HabitReport, WarningReason};
use crate::bibliometrics::{BibIndicator, TeamBibIndicators};
use crate::comparison::{
    extension_overlap_summary, sign_check, CorrelationTable, ExtensionSplit, Histogram, Pooling,
    Region,
};
use crate::error::{Error, Result};
use crate::model::StatConfig;
use crate::stats::{self, CorrelationOutcome, CorrelationResult};

/// Two decimals, without a negative sign on values that round to zero.
pub fn f2(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

pub fn md_table<S: AsRef<str>>(header: &[S], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let line = |cells: Vec<&str>| format!("| {} |\n", cells.join(" | "));
    out.push_str(&line(header.iter().map(|h| h.as_ref()).collect()));
    out.push_str(&line(header.iter().map(|_| "---").collect()));
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

pub fn csv_string<S: AsRef<str>>(header: &[S], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidArgument(format!("csv output: {e}"));
    w.write_record(header.iter().map(|h| h.as_ref()))
        .map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Two-decimal r, bold when significant at the configured level.
pub fn r_md(r: f64, n: usize, config: &StatConfig) -> String {
    if n >= 3 && stats::is_significant(r, n, config).unwrap_or(false) {
        format!("**{}**", f2(r))
    } else {
        f2(r)
    }
}

pub fn outcome_md(o: &CorrelationOutcome, config: &StatConfig) -> String {
    match o {
        CorrelationOutcome::Defined(c) => r_md(c.r, c.n, config),
        CorrelationOutcome::Undefined { .. } => "undef.".to_string(),
        CorrelationOutcome::Insufficient { n } => format!("N={n}"),
    }
}

fn outcome_status(o: &CorrelationOutcome) -> &'static str {
    match o {
        CorrelationOutcome::Defined(_) => "defined",
        CorrelationOutcome::Undefined { .. } => "undefined",
        CorrelationOutcome::Insufficient { .. } => "insufficient",
    }
}

/// `status, n, r, p_value, significant` columns; blanks when undefined.
fn outcome_fields(o: &CorrelationOutcome) -> Vec<String> {
    let mut v = vec![outcome_status(o).to_string(), o.n().to_string()];
    match o.defined() {
        Some(c) => v.extend([
            c.r.to_string(),
            c.p_value.to_string(),
            c.significant.to_string(),
        ]),
        None => v.extend([String::new(), String::new(), "false".to_string()]),
    }
    v
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn opt2(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), f2)
}

// ---------------------------------------------------------------- scores

pub fn scores_md(scores: &TeamScores) -> String {
    let mut header = vec!["team".to_string()];
    header.extend(scores.indicators.iter().map(|i| i.id.clone()));
    let rows: Vec<Vec<String>> = scores
        .teams
        .iter()
        .map(|t| {
            let mut r = vec![t.clone()];
            r.extend(scores.indicators.iter().map(|i| opt2(scores.get(t, &i.id))));
            r
        })
        .collect();
    format!(
        "### {} ({}, {} average)\n\n{}",
        scores.evaluation_id,
        scores.discipline,
        scores.scheme,
        md_table(&header, &rows)
    )
}

pub const SCORES_HEADER: [&str; 6] = [
    "evaluation",
    "team",
    "indicator",
    "scheme",
    "value",
    "contributors",
];

pub fn scores_rows(scores: &TeamScores) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for t in &scores.teams {
        for i in &scores.indicators {
            if let Some(c) = scores.cells.get(&(t.clone(), i.id.clone())) {
                rows.push(vec![
                    scores.evaluation_id.clone(),
                    t.clone(),
                    i.id.clone(),
                    scores.scheme.to_string(),
                    c.value.to_string(),
                    c.contributors.to_string(),
                ]);
            }
        }
    }
    rows
}

// ------------------------------------------------------------- agreement

/// Result of classifying one evaluation, which may lack expert overlap.
#[derive(Debug, Clone, PartialEq)]
pub enum AgreementEntry {
    Classified(AgreementReport),
    NotClassifiable { evaluation: String, reason: String },
}

impl AgreementEntry {
    pub fn evaluation(&self) -> &str {
        match self {
            Self::Classified(r) => &r.evaluation_id,
            Self::NotClassifiable { evaluation, .. } => evaluation,
        }
    }

    pub fn class_label(&self) -> String {
        match self {
            Self::Classified(r) => r.classification.to_string(),
            Self::NotClassifiable { .. } => "not classifiable".to_string(),
        }
    }
}

pub fn agreement_md(entry: &AgreementEntry, config: &StatConfig) -> String {
    match entry {
        AgreementEntry::NotClassifiable { evaluation, reason } => {
            format!("### {evaluation}\n\nNot classifiable: {reason}.\n")
        }
        AgreementEntry::Classified(rep) => {
            let rows: Vec<Vec<String>> = rep
                .indicators
                .iter()
                .map(|ia| {
                    let c = &ia.correlations;
                    let defined = c.defined_rs();
                    let range = match (
                        defined.iter().copied().reduce(f64::min),
                        defined.iter().copied().reduce(f64::max),
                    ) {
                        (Some(lo), Some(hi)) => format!("{} to {}", f2(lo), f2(hi)),
                        _ => "n/a".to_string(),
                    };
                    vec![
                        c.indicator.clone(),
                        c.pairs.len().to_string(),
                        range,
                        ia.averaged_r
                            .map_or_else(|| "undef.".to_string(), |r| r_md(r, ia.n, config)),
                        ia.n.to_string(),
                        ia.p_value
                            .map_or_else(|| "n/a".to_string(), |p| format!("{p:.3}")),
                    ]
                })
                .collect();
            format!(
                "### {}\n\nInter-peer agreement: **{}**\n\n{}",
                rep.evaluation_id,
                rep.classification,
                md_table(
                    &[
                        "indicator",
                        "expert pairs",
                        "pairwise r",
                        "averaged r",
                        "N",
                        "p"
                    ],
                    &rows
                )
            )
        }
    }
}

pub const AGREEMENT_HEADER: [&str; 8] = [
    "evaluation",
    "indicator",
    "pairs",
    "averaged_r",
    "n",
    "p_value",
    "significant",
    "classification",
];

pub fn agreement_rows(entry: &AgreementEntry) -> Vec<Vec<String>> {
    match entry {
        AgreementEntry::NotClassifiable { evaluation, .. } => vec![vec![
            evaluation.clone(),
            String::new(),
            "0".into(),
            String::new(),
            "0".into(),
            String::new(),
            "false".into(),
            entry.class_label(),
        ]],
        AgreementEntry::Classified(rep) => rep
            .indicators
            .iter()
            .map(|ia| {
                vec![
                    rep.evaluation_id.clone(),
                    ia.correlations.indicator.clone(),
                    ia.correlations.pairs.len().to_string(),
                    opt(ia.averaged_r),
                    ia.n.to_string(),
                    opt(ia.p_value),
                    ia.significant.to_string(),
                    rep.classification.to_string(),
                ]
            })
            .collect(),
    }
}

pub const PAIRS_HEADER: [&str; 9] = [
    "evaluation",
    "indicator",
    "expert_a",
    "expert_b",
    "status",
    "n",
    "r",
    "p_value",
    "significant",
];

pub fn pair_rows(entry: &AgreementEntry) -> Vec<Vec<String>> {
    let AgreementEntry::Classified(rep) = entry else {
        return Vec::new();
    };
    let mut rows = Vec::new();
    for ia in &rep.indicators {
        for p in &ia.correlations.pairs {
            let mut r = vec![
                rep.evaluation_id.clone(),
                ia.correlations.indicator.clone(),
                p.expert_a.clone(),
                p.expert_b.clone(),
            ];
            r.extend(outcome_fields(&p.outcome));
            rows.push(r);
        }
    }
    rows
}

// ---------------------------------------------------------------- habits

pub fn habits_md(rep: &HabitReport, config: &StatConfig) -> String {
    let m = &rep.matrix;
    let mut header = vec![String::new()];
    header.extend(m.indicators.iter().cloned());
    let rows: Vec<Vec<String>> = m
        .indicators
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let mut r = vec![id.clone()];
            for j in 0..m.indicators.len() {
                r.push(if j < i {
                    outcome_md(&m.cells[i][j], config)
                } else if i == j {
                    "1".to_string()
                } else {
                    String::new()
                });
            }
            r
        })
        .collect();
    let mut out = format!(
        "### {}\n\n{}\n",
        rep.evaluation_id,
        md_table(&header, &rows)
    );
    let groups: Vec<String> = m
        .indicators
        .iter()
        .zip(&m.groups)
        .map(|(id, g)| format!("{id}: {}", g.as_deref().unwrap_or("none")))
        .collect();
    let _ = writeln!(out, "Expected-correlation groups: {}.\n", groups.join(", "));
    if rep.warnings.is_empty() {
        out.push_str("No rating-habit warnings.\n");
    } else {
        let _ = writeln!(out, "Rating-habit warnings ({}):\n", rep.warnings.len());
        for w in &rep.warnings {
            let _ = writeln!(out, "- {w}");
        }
    }
    out
}

pub const HABITS_HEADER: [&str; 10] = [
    "evaluation",
    "indicator_a",
    "indicator_b",
    "group_a",
    "group_b",
    "status",
    "n",
    "r",
    "p_value",
    "significant",
];

pub fn habits_rows(rep: &HabitReport) -> Vec<Vec<String>> {
    let m = &rep.matrix;
    m.pairs()
        .map(|(i, j)| {
            let mut r = vec![
                rep.evaluation_id.clone(),
                m.indicators[i].clone(),
                m.indicators[j].clone(),
                m.groups[i].clone().unwrap_or_default(),
                m.groups[j].clone().unwrap_or_default(),
            ];
            r.extend(outcome_fields(&m.cells[i][j]));
            r
        })
        .collect()
}

pub const WARNINGS_HEADER: [&str; 8] = [
    "evaluation",
    "indicator_a",
    "indicator_b",
    "group",
    "r",
    "n",
    "critical_r",
    "reason",
];

pub fn warning_rows(rep: &HabitReport) -> Vec<Vec<String>> {
    rep.warnings
        .iter()
        .map(|w| {
            vec![
                rep.evaluation_id.clone(),
                w.indicator_a.clone(),
                w.indicator_b.clone(),
                w.group.clone(),
                w.r.to_string(),
                w.n.to_string(),
                w.critical_r.to_string(),
                match w.reason {
                    WarningReason::NotSignificant => "not_significant",
                    WarningReason::Negative => "negative",
                }
                .to_string(),
            ]
        })
        .collect()
}

// ---------------------------------------------------------- bibliometrics

pub fn biblio_md(bib: &[TeamBibIndicators]) -> String {
    let mut header = vec!["team".to_string()];
    header.extend(BibIndicator::ALL.iter().map(|b| b.code().to_string()));
    let rows: Vec<Vec<String>> = bib
        .iter()
        .map(|t| {
            let mut r = vec![
                t.team_id.clone(),
                t.publications.to_string(),
                t.citations.to_string(),
            ];
            r.extend(BibIndicator::ALL[2..].iter().map(|b| f2(b.value(t))));
            r
        })
        .collect();
    let rule = bib.first().map_or("", |t| t.uncited_rule.describe());
    format!("{}\nPNC: {rule}.\n", md_table(&header, &rows))
}

pub fn biblio_csv(bib: &[TeamBibIndicators]) -> Result<String> {
    let mut header = vec!["team".to_string()];
    header.extend(BibIndicator::ALL.iter().map(|b| b.code().to_string()));
    let rows: Vec<Vec<String>> = bib
        .iter()
        .map(|t| {
            let mut r = vec![t.team_id.clone()];
            r.extend(BibIndicator::ALL.iter().map(|b| b.value(t).to_string()));
            r
        })
        .collect();
    csv_string(&header, &rows)
}

// ------------------------------------------------------------ comparison

pub fn correlation_table_md(table: &CorrelationTable, config: &StatConfig) -> String {
    let ns: Vec<usize> = table.cells.iter().flatten().map(|c| c.n()).collect();
    let uniform = ns.windows(2).all(|w| w[0] == w[1]);
    let corner = match (uniform, ns.first()) {
        (true, Some(n)) => format!("r (N={n})"),
        _ => "r (N per cell)".to_string(),
    };
    let mut header = vec![corner];
    header.extend(table.columns.iter().map(|c| c.code().to_string()));
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .zip(&table.cells)
        .map(|(row, cells)| {
            let mut r = vec![row.clone()];
            r.extend(cells.iter().map(|c| {
                let s = outcome_md(c, config);
                if uniform || c.defined().is_none() {
                    s
                } else {
                    format!("{s} ({})", c.n())
                }
            }));
            r
        })
        .collect();
    let mut out = format!("### {}\n\n", table.pooling.label());
    if let Pooling::Pooled { evaluations, .. } = &table.pooling {
        let _ = writeln!(out, "Evaluations: {}.\n", evaluations.join(", "));
    }
    out.push_str(&md_table(&header, &rows));
    if table.standardized {
        out.push_str("\nScores z-standardized within each evaluation before pooling.\n");
    }
    let deviations = sign_check(table);
    if !deviations.is_empty() {
        out.push_str("\nUnexpected signs:\n\n");
        for d in deviations {
            let _ = writeln!(out, "- {d}");
        }
    }
    out
}

pub const COMPARE_HEADER: [&str; 13] = [
    "pool_kind",
    "pool",
    "evaluations",
    "alpha",
    "standardized",
    "total_teams",
    "row",
    "column",
    "status",
    "n",
    "r",
    "p_value",
    "significant",
];

pub fn compare_rows(table: &CorrelationTable) -> Vec<Vec<String>> {
    let (kind, name, evals) = match &table.pooling {
        Pooling::Single { evaluation } => ("single", evaluation.clone(), evaluation.clone()),
        Pooling::Pooled { group, evaluations } => ("pooled", group.clone(), evaluations.join(";")),
    };
    let mut rows = Vec::new();
    for (row, cells) in table.rows.iter().zip(&table.cells) {
        for (col, cell) in table.columns.iter().zip(cells) {
            let mut r = vec![
                kind.to_string(),
                name.clone(),
                evals.clone(),
                table.alpha.to_string(),
                table.standardized.to_string(),
                table.total_teams.to_string(),
                row.clone(),
                col.code().to_string(),
            ];
            r.extend(outcome_fields(cell));
            rows.push(r);
        }
    }
    rows
}

pub fn compare_csv(tables: &[CorrelationTable]) -> Result<String> {
    let rows: Vec<Vec<String>> = tables.iter().flat_map(compare_rows).collect();
    csv_string(&COMPARE_HEADER, &rows)
}

fn csv_err(line: u64, message: impl Into<String>) -> Error {
    Error::Data {
        file: "<compare csv>".into(),
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let v = rec.get(i).unwrap_or("");
    v.parse().map_err(|_| {
        csv_err(
            line,
            format!("column `{}`: cannot parse `{v}`", COMPARE_HEADER[i]),
        )
    })
}

/// Reads tables written by [`compare_csv`].
pub fn parse_compare_csv(text: &str) -> Result<Vec<CorrelationTable>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| csv_err(1, e.to_string()))?;
    if headers.iter().ne(COMPARE_HEADER.iter().copied()) {
        return Err(csv_err(1, "unexpected header"));
    }
    let mut tables: Vec<CorrelationTable> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let get = |i: usize| rec.get(i).unwrap_or("").to_string();
        let pooling = match get(0).as_str() {
            "single" => Pooling::Single { evaluation: get(1) },
            "pooled" => Pooling::Pooled {
                group: get(1),
                evaluations: get(2).split(';').map(str::to_string).collect(),
            },
            other => return Err(csv_err(line, format!("unknown pool kind `{other}`"))),
        };
        let alpha: f64 = field(&rec, 3, line)?;
        let standardized: bool = field(&rec, 4, line)?;
        let total_teams: usize = field(&rec, 5, line)?;
        let row = get(6);
        let column: BibIndicator = field(&rec, 7, line)?;
        let n: usize = field(&rec, 9, line)?;
        let cell = match get(8).as_str() {
            "defined" => CorrelationOutcome::Defined(CorrelationResult {
                r: field(&rec, 10, line)?,
                n,
                p_value: field(&rec, 11, line)?,
                significant: field(&rec, 12, line)?,
            }),
            "undefined" => CorrelationOutcome::Undefined { n },
            "insufficient" => CorrelationOutcome::Insufficient { n },
            other => return Err(csv_err(line, format!("unknown status `{other}`"))),
        };
        let same = tables.last().is_some_and(|t| t.pooling == pooling);
        if !same {
            tables.push(CorrelationTable {
                pooling,
                rows: Vec::new(),
                columns: Vec::new(),
                cells: Vec::new(),
                total_teams,
                alpha,
                standardized,
            });
        }
        let t = tables.last_mut().expect("table pushed above");
        let ri = match t.rows.iter().position(|r| *r == row) {
            Some(i) => i,
            None => {
                t.rows.push(row);
                t.cells.push(Vec::new());
                t.rows.len() - 1
            }
        };
        if ri == 0 {
            t.columns.push(column);
        } else if t.columns.get(t.cells[ri].len()) != Some(&column) {
            return Err(csv_err(line, "columns differ between rows"));
        }
        t.cells[ri].push(cell);
    }
    Ok(tables)
}

// --------------------------------------------------------- distributions

pub fn histogram_md(title: &str, h: &Histogram) -> String {
    let rows: Vec<Vec<String>> = (0..h.counts.len())
        .map(|i| {
            let (a, b) = h.bin_range(i);
            vec![
                format!("{} to {}", f2(a), f2(b)),
                h.counts[i].to_string(),
                f2(h.frequencies[i]),
            ]
        })
        .collect();
    format!(
        "### {title} (N={})\n\n{}",
        h.total,
        md_table(&["bin", "count", "frequency"], &rows)
    )
}

pub const HISTOGRAM_HEADER: [&str; 6] = [
    "source",
    "indicator",
    "bin_start",
    "bin_end",
    "count",
    "frequency",
];

pub fn histogram_rows(source: &str, indicator: &str, h: &Histogram) -> Vec<Vec<String>> {
    (0..h.counts.len())
        .map(|i| {
            let (a, b) = h.bin_range(i);
            vec![
                source.to_string(),
                indicator.to_string(),
                a.to_string(),
                b.to_string(),
                h.counts[i].to_string(),
                h.frequencies[i].to_string(),
            ]
        })
        .collect()
}

// ------------------------------------------------------------ extensions

pub fn extensions_md(split: &ExtensionSplit) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "x = {}: mean {}, SD {}, line at {}\n",
        split.x_indicator,
        f2(split.x_mean),
        f2(split.x_sd),
        f2(split.x_line())
    );
    let _ = writeln!(
        out,
        "y = {}: mean {}, SD {}, line at {}\n",
        split.y_indicator,
        f2(split.y_mean),
        f2(split.y_sd),
        f2(split.y_line())
    );
    let _ = writeln!(
        out,
        "Lines at one {} from the mean.\n",
        ExtensionSplit::SD_CONVENTION
    );
    let rows: Vec<Vec<String>> = [Region::Main, Region::LowX, Region::HighY, Region::Both]
        .iter()
        .map(|&region| {
            let members: Vec<&str> = split.members(region).map(|p| p.team.as_str()).collect();
            vec![
                region.as_str().to_string(),
                members.len().to_string(),
                members.join(", "),
            ]
        })
        .collect();
    out.push_str(&md_table(&["region", "teams", "members"], &rows));
    let o = extension_overlap_summary(split);
    let _ = writeln!(
        out,
        "\nHigh-y extension: {} of {} teams above the mean of x.\n\nLow-x extension: {} of {} teams below the mean of y.",
        o.high_y.above_other_mean, o.high_y.members, o.low_x.below_other_mean, o.low_x.members
    );
    out
}

pub const EXTENSIONS_HEADER: [&str; 4] = ["team", "x", "y", "region"];

pub fn extension_rows(split: &ExtensionSplit) -> Vec<Vec<String>> {
    split
        .points
        .iter()
        .map(|p| {
            vec![
                p.team.clone(),
                p.x.to_string(),
                p.y.to_string(),
                p.region.as_str().to_string(),
            ]
        })
        .collect()
}

// ------------------------------------------------------------------- svg

const W: f64 = 420.0;
const H: f64 = 240.0;
const PAD_L: f64 = 48.0;
const PAD_R: f64 = 12.0;
const PAD_T: f64 = 24.0;
const PAD_B: f64 = 40.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"10\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"14\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
        W / 2.0,
        esc(title)
    )
}

fn axes(out: &mut String, x_label: &str, y_label: &str) {
    let (x0, y0, x1, y1) = (PAD_L, H - PAD_B, W - PAD_R, PAD_T);
    let _ = writeln!(
        out,
        "<path d=\"M{x0:.1} {y1:.1} V{y0:.1} H{x1:.1}\" fill=\"none\" stroke=\"black\"/>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"12\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 12 {:.1})\">{}</text>",
        (x0 + x1) / 2.0,
        H - 6.0,
        esc(x_label),
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        esc(y_label)
    );
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() * step;
    let mut out = Vec::new();
    let mut k = 0;
    while first + k as f64 * step <= hi + step * 1e-9 {
        out.push(first + k as f64 * step);
        k += 1;
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Relative-frequency bar chart.
pub fn histogram_svg(title: &str, x_label: &str, h: &Histogram) -> String {
    let mut out = svg_open(title);
    axes(&mut out, x_label, "relative frequency");
    let (lo, hi) = (h.bin_range(0).0, h.bin_range(h.counts.len() - 1).1);
    let fmax = h.frequencies.iter().copied().fold(0.0, f64::max).max(1e-12);
    let ymax = ticks(0.0, fmax)
        .last()
        .copied()
        .filter(|t| *t >= fmax)
        .unwrap_or(fmax);
    let sx = |v: f64| PAD_L + (v - lo) / (hi - lo) * (W - PAD_L - PAD_R);
    let sy = |v: f64| H - PAD_B - v / ymax * (H - PAD_B - PAD_T);
    for (i, f) in h.frequencies.iter().enumerate() {
        let (a, b) = h.bin_range(i);
        let _ = writeln!(
            out,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#7a9cc6\" stroke=\"#2f4f7f\"/>",
            sx(a),
            sy(*f),
            (sx(b) - sx(a)).max(0.0),
            (H - PAD_B - sy(*f)).max(0.0)
        );
    }
    for t in ticks(lo, hi) {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            sx(t),
            H - PAD_B + 12.0,
            tick_label(t)
        );
    }
    for t in ticks(0.0, ymax) {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            PAD_L - 4.0,
            sy(t) + 3.0,
            tick_label(t)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter plot with the one-SD extension lines.
pub fn scatter_svg(title: &str, split: &ExtensionSplit) -> String {
    let mut out = svg_open(title);
    axes(&mut out, &split.x_indicator, &split.y_indicator);
    let bounds = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        let pad = ((hi - lo) * 0.05).max(1e-9);
        (lo - pad, hi + pad)
    };
    let (xlo, xhi) = bounds(&mut split.points.iter().map(|p| p.x).chain([split.x_line()]));
    let (ylo, yhi) = bounds(&mut split.points.iter().map(|p| p.y).chain([split.y_line()]));
    let sx = |v: f64| PAD_L + (v - xlo) / (xhi - xlo) * (W - PAD_L - PAD_R);
    let sy = |v: f64| H - PAD_B - (v - ylo) / (yhi - ylo) * (H - PAD_B - PAD_T);
    let _ = writeln!(
        out,
        "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{0:.1}\" y2=\"{2:.1}\" stroke=\"#c03030\" stroke-dasharray=\"4 3\"/>",
        sx(split.x_line()),
        H - PAD_B,
        PAD_T
    );
    let _ = writeln!(
        out,
        "<line x1=\"{0:.1}\" y1=\"{2:.1}\" x2=\"{1:.1}\" y2=\"{2:.1}\" stroke=\"#c03030\" stroke-dasharray=\"4 3\"/>",
        PAD_L,
        W - PAD_R,
        sy(split.y_line())
    );
    for p in &split.points {
        let fill = match p.region {
            Region::Main => "#7a9cc6",
            Region::LowX => "#e0a030",
            Region::HighY => "#40a060",
            Region::Both => "#c03030",
        };
        let _ = writeln!(
            out,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{fill}\"><title>{}</title></circle>",
            sx(p.x),
            sy(p.y),
            esc(&p.team)
        );
    }
    for t in ticks(xlo, xhi) {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            sx(t),
            H - PAD_B + 12.0,
            tick_label(t)
        );
    }
    for t in ticks(ylo, yhi) {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            PAD_L - 4.0,
            sy(t) + 3.0,
            tick_label(t)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Groups `(key, value)` pairs by key in first-seen order.
pub fn group_ordered<K: Ord + Clone, V>(
    items: impl IntoIterator<Item = (K, V)>,
) -> Vec<(K, Vec<V>)> {
    let mut order: Vec<K> = Vec::new();
    let mut map: BTreeMap<K, Vec<V>> = BTreeMap::new();
    for (k, v) in items {
        if !map.contains_key(&k) {
            order.push(k.clone());
        }
        map.entry(k).or_default().push(v);
    }
    order
        .into_iter()
        .map(|k| {
            let v = map.remove(&k).unwrap_or_default();
            (k, v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{aggregate_evaluation, Scheme};
    use crate::bibliometrics::UncitedRule;
    use crate::comparison::{cross_method_table, frequency_distribution, BinSpec, CompareOptions};
    use crate::model::{Indicator, IndicatorKind, RatingMatrix, RatingScale};

    fn bib(team: &str, a: f64, b: f64) -> TeamBibIndicators {
        TeamBibIndicators {
            team_id: team.into(),
            publications: 4,
            citations: 10,
            cpp: a * b,
            jcsm: b,
            fcsm: 1.0,
            cpp_jcsm: a,
            cpp_fcsm: a * b,
            jcsm_fcsm: b,
            pnc: 0.25 / a,
            uncited_rule: UncitedRule::default(),
        }
    }

    fn table() -> CorrelationTable {
        let mut m = RatingMatrix::new(
            "ev",
            "d",
            RatingScale::one_to_ten(),
            (0..6).map(|i| format!("t{i}")).collect(),
            vec!["e".into()],
            vec![
                Indicator::new("A", "", IndicatorKind::Global),
                Indicator::new("B", "", IndicatorKind::Global),
            ],
        );
        let a = [3.0, 5.0, 4.0, 8.0, 6.0, 7.0];
        let b = [5.0, 5.0, 5.0, 5.0, 6.0, 5.0];
        for i in 0..6 {
            m.set_score("e", &format!("t{i}"), "A", a[i]);
            if i < 2 {
                m.set_score("e", &format!("t{i}"), "B", b[i]);
            }
        }
        let s = aggregate_evaluation(&m, Scheme::Plain).unwrap();
        let bibs: Vec<_> = (0..6)
            .map(|i| {
                bib(
                    &format!("t{i}"),
                    0.5 + a[i] / 7.0,
                    1.0 + (i % 3) as f64 / 3.0,
                )
            })
            .collect();
        cross_method_table(
            &[&s],
            &bibs,
            &BibIndicator::STANDARD,
            Pooling::Single {
                evaluation: "ev".into(),
            },
            CompareOptions::default(),
            &StatConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn two_decimal_formatting() {
        assert_eq!(f2(0.494), "0.49");
        assert_eq!(f2(-0.001), "0.00");
        assert_eq!(f2(-0.48), "-0.48");
        let cfg = StatConfig::default();
        assert_eq!(r_md(0.98, 5, &cfg), "**0.98**");
        assert_eq!(r_md(-0.48, 5, &cfg), "-0.48");
    }

    #[test]
    fn compare_csv_round_trips() {
        let t = table();
        assert!(matches!(
            t.cells[1][0],
            CorrelationOutcome::Insufficient { n: 2 }
        ));
        let text = compare_csv(std::slice::from_ref(&t)).unwrap();
        let back = parse_compare_csv(&text).unwrap();
        assert_eq!(back, vec![t.clone()]);
        let pooled = CorrelationTable {
            pooling: Pooling::Pooled {
                group: "g".into(),
                evaluations: vec!["ev".into(), "x".into()],
            },
            ..t.clone()
        };
        let text = compare_csv(&[t.clone(), pooled.clone()]).unwrap();
        assert_eq!(parse_compare_csv(&text).unwrap(), vec![t, pooled]);
        assert!(parse_compare_csv("a,b\n").is_err());
    }

    #[test]
    fn bold_cells_are_exactly_the_significant_ones() {
        let t = table();
        let cfg = StatConfig::default();
        let md = correlation_table_md(&t, &cfg);
        for (row, cells) in t.rows.iter().zip(&t.cells) {
            for c in cells {
                if let Some(d) = c.defined() {
                    let bold = stats::is_significant(d.r, d.n, &cfg).unwrap();
                    let s = format!("**{}**", f2(d.r));
                    assert_eq!(outcome_md(c, &cfg) == s, bold, "{row}");
                }
            }
        }
        assert!(md.contains("N=2") || md.contains("(N per cell)"));
    }

    #[test]
    fn svg_is_stable_and_well_formed() {
        let h = frequency_distribution(
            &[1.0, 2.0, 2.0, 3.0, 9.0],
            BinSpec::for_scale(&RatingScale::one_to_ten()),
        )
        .unwrap();
        let a = histogram_svg("x & y", "score", &h);
        assert_eq!(a, histogram_svg("x & y", "score", &h));
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert!(a.contains("x &amp; y"));
        assert_eq!(a.matches("<rect").count(), 1 + 10);
    }

    #[test]
    fn tick_steps() {
        assert_eq!(
            ticks(0.0, 1.0),
            vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]
        );
        assert_eq!(tick_label(0.6000000000000001), "0.6");
        assert_eq!(ticks(0.5, 10.5).len(), 5);
    }
}
