//! Comparison of peer results with citation-analysis results: correlation
//! tables, relative frequency distributions and the one-standard-deviation
//! extension split.

use std::collections::BTreeMap;
use std::fmt;

use crate::aggregation::TeamScores;
use crate::bibliometrics::{BibIndicator, TeamBibIndicators};
use crate::error::{Error, Result};
use crate::model::{RatingScale, StatConfig};
use crate::stats::{self, CorrelationOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pooling {
    Single {
        evaluation: String,
    },
    Pooled {
        group: String,
        evaluations: Vec<String>,
    },
}

impl Pooling {
    pub fn label(&self) -> String {
        match self {
            Self::Single { evaluation } => evaluation.clone(),
            Self::Pooled { group, evaluations } => match evaluations.len() {
                1 => format!("{group} (1 evaluation)"),
                n => format!("{group} ({n} evaluations)"),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompareOptions {
    /// Z-score values within each evaluation before pooling.
    pub standardize: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    pub pooling: Pooling,
    pub rows: Vec<String>,
    pub columns: Vec<BibIndicator>,
    /// `cells[row][column]`.
    pub cells: Vec<Vec<CorrelationOutcome>>,
    pub total_teams: usize,
    pub alpha: f64,
    pub standardized: bool,
}

impl CorrelationTable {
    pub fn get(&self, row: &str, column: BibIndicator) -> Option<&CorrelationOutcome> {
        let i = self.rows.iter().position(|r| r == row)?;
        let j = self.columns.iter().position(|c| *c == column)?;
        Some(&self.cells[i][j])
    }
}

fn zscores(values: &mut [f64]) -> bool {
    match (stats::mean(values), stats::sample_sd(values)) {
        (Some(m), Some(sd)) if sd > 0.0 => {
            values.iter_mut().for_each(|v| *v = (*v - m) / sd);
            true
        }
        _ => false,
    }
}

/// Correlates every peer indicator with every requested citation
/// indicator, matching teams by id. Several evaluations are pooled by
/// concatenating their teams.
pub fn cross_method_table(
    peer: &[&TeamScores],
    bib: &[TeamBibIndicators],
    columns: &[BibIndicator],
    pooling: Pooling,
    options: CompareOptions,
    config: &StatConfig,
) -> Result<CorrelationTable> {
    if peer.is_empty() {
        return Err(Error::InvalidArgument("no peer scores to compare".into()));
    }
    let mut by_team: BTreeMap<&str, &TeamBibIndicators> = BTreeMap::new();
    for t in bib {
        if by_team.insert(&t.team_id, t).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate citation indicators for team `{}`",
                t.team_id
            )));
        }
    }
    let mut rows: Vec<String> = Vec::new();
    for s in peer {
        for ind in s.indicators.iter().filter(|i| i.is_performance()) {
            if !rows.contains(&ind.id) {
                rows.push(ind.id.clone());
            }
        }
    }
    let total_teams = peer.iter().map(|s| s.teams.len()).sum();

    let mut cells = Vec::with_capacity(rows.len());
    for row in &rows {
        let mut line = Vec::with_capacity(columns.len());
        for &col in columns {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for s in peer {
                let (mut x, mut y): (Vec<f64>, Vec<f64>) = s
                    .teams
                    .iter()
                    .filter_map(|t| {
                        let v = s.get(t, row)?;
                        let b = by_team.get(t.as_str())?;
                        Some((v, col.value(b)))
                    })
                    .unzip();
                if options.standardize && !(zscores(&mut x) && zscores(&mut y)) {
                    continue;
                }
                xs.extend(x);
                ys.extend(y);
            }
            line.push(stats::correlate(&xs, &ys, config)?);
        }
        cells.push(line);
    }
    Ok(CorrelationTable {
        pooling,
        rows,
        columns: columns.to_vec(),
        cells,
        total_teams,
        alpha: config.alpha(),
        standardized: options.standardize,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignDeviation {
    pub row: String,
    pub column: BibIndicator,
    pub r: f64,
    pub n: usize,
}

impl fmt::Display for SignDeviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let expected = if self.column.expected_sign() == Some(-1.0) {
            "negative"
        } else {
            "positive"
        };
        write!(
            f,
            "{} vs {}: significant r = {:.2} (N = {}) but expected {expected}",
            self.row, self.column, self.r, self.n
        )
    }
}

/// Significant cells whose sign contradicts the column's expected sign.
pub fn sign_check(table: &CorrelationTable) -> Vec<SignDeviation> {
    let mut out = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        for (j, col) in table.columns.iter().enumerate() {
            let (Some(sign), Some(c)) = (col.expected_sign(), table.cells[i][j].defined()) else {
                continue;
            };
            if c.significant && c.r * sign < 0.0 {
                out.push(SignDeviation {
                    row: row.clone(),
                    column: *col,
                    r: c.r,
                    n: c.n,
                });
            }
        }
    }
    out
}

/// Bin layout: left-closed, right-open bins of equal width from `start`.
/// With a fixed bin count the last bin is closed on the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSpec {
    pub start: f64,
    pub width: f64,
    pub bins: Option<usize>,
}

const MAX_BINS: usize = 100_000;

impl BinSpec {
    /// One unit-width bin centred on each scale point.
    pub fn for_scale(scale: &RatingScale) -> Self {
        let points = ((scale.max() - scale.min()) / scale.step()).round() as usize + 1;
        Self {
            start: scale.min() - scale.step() / 2.0,
            width: scale.step(),
            bins: Some(points),
        }
    }

    /// Width 0.25 from zero, extended to cover the data.
    pub fn for_ratio() -> Self {
        Self {
            start: 0.0,
            width: 0.25,
            bins: None,
        }
    }

    pub fn edge(&self, i: usize) -> f64 {
        self.start + i as f64 * self.width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub spec: BinSpec,
    pub counts: Vec<usize>,
    pub frequencies: Vec<f64>,
    pub total: usize,
}

impl Histogram {
    pub fn bin_range(&self, i: usize) -> (f64, f64) {
        (self.spec.edge(i), self.spec.edge(i + 1))
    }
}

pub fn frequency_distribution(values: &[f64], spec: BinSpec) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    if !(spec.width > 0.0 && spec.width.is_finite()) || !spec.start.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bin width must be positive, got {}",
            spec.width
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "cannot bin non-finite value {v}"
        )));
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bins = match spec.bins {
        Some(0) => return Err(Error::InvalidArgument("bin count must be positive".into())),
        Some(b) => b,
        None => {
            let b = ((max - spec.start) / spec.width).floor() + 1.0;
            if !(b >= 1.0 && b <= MAX_BINS as f64) {
                return Err(Error::InvalidArgument(format!(
                    "values up to {max} need too many bins of width {}",
                    spec.width
                )));
            }
            b as usize
        }
    };
    let end = spec.edge(bins);
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v < spec.start || v > end {
            return Err(Error::InvalidArgument(format!(
                "value {v} outside the binned range [{}, {end}]",
                spec.start
            )));
        }
        let idx = (((v - spec.start) / spec.width).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let total = values.len();
    let frequencies = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(Histogram {
        spec: BinSpec {
            bins: Some(bins),
            ..spec
        },
        counts,
        frequencies,
        total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Main,
    LowX,
    HighY,
    Both,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Main => "main",
            Self::LowX => "low-x",
            Self::HighY => "high-y",
            Self::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPoint {
    pub team: String,
    pub x: f64,
    pub y: f64,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionSplit {
    pub x_indicator: String,
    pub y_indicator: String,
    pub x_mean: f64,
    pub x_sd: f64,
    pub y_mean: f64,
    pub y_sd: f64,
    pub points: Vec<SplitPoint>,
}

impl ExtensionSplit {
    pub const SD_CONVENTION: &'static str = "sample standard deviation (n - 1)";

    pub fn x_line(&self) -> f64 {
        self.x_mean - self.x_sd
    }

    pub fn y_line(&self) -> f64 {
        self.y_mean + self.y_sd
    }

    pub fn members(&self, region: Region) -> impl Iterator<Item = &SplitPoint> {
        self.points.iter().filter(move |p| p.region == region)
    }
}

/// Separates teams below one SD under the x mean (low-x extension) and
/// above one SD over the y mean (high-y extension) from the main group.
pub fn extension_split(
    x_indicator: &str,
    y_indicator: &str,
    points: &[(String, f64, f64)],
) -> Result<ExtensionSplit> {
    if points.len() < 3 {
        return Err(Error::TooFewObservations {
            needed: 3,
            got: points.len(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.1).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.2).collect();
    let (x_mean, x_sd) = (
        stats::mean(&xs).unwrap_or_default(),
        stats::sample_sd(&xs).unwrap_or_default(),
    );
    let (y_mean, y_sd) = (
        stats::mean(&ys).unwrap_or_default(),
        stats::sample_sd(&ys).unwrap_or_default(),
    );
    if !(x_sd > 0.0 && y_sd > 0.0) {
        return Err(Error::InvalidArgument(
            "zero standard deviation on an axis; no extension can be separated".into(),
        ));
    }
    let x_line = x_mean - x_sd;
    let y_line = y_mean + y_sd;
    let points = points
        .iter()
        .map(|(team, x, y)| {
            let region = match (*x < x_line, *y > y_line) {
                (true, true) => Region::Both,
                (true, false) => Region::LowX,
                (false, true) => Region::HighY,
                (false, false) => Region::Main,
            };
            SplitPoint {
                team: team.clone(),
                x: *x,
                y: *y,
                region,
            }
        })
        .collect();
    Ok(ExtensionSplit {
        x_indicator: x_indicator.to_string(),
        y_indicator: y_indicator.to_string(),
        x_mean,
        x_sd,
        y_mean,
        y_sd,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExtensionOverlap {
    pub members: usize,
    pub above_other_mean: usize,
    pub below_other_mean: usize,
}

impl ExtensionOverlap {
    fn fraction(&self, n: usize) -> Option<f64> {
        (self.members > 0).then(|| n as f64 / self.members as f64)
    }
}

/// Membership of each extension compared with the other axis's mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OverlapSummary {
    /// High-y extension (including "both"); agreement means high x.
    pub high_y: ExtensionOverlap,
    /// Low-x extension (including "both"); agreement means low y.
    pub low_x: ExtensionOverlap,
}

impl OverlapSummary {
    pub fn high_y_agreement(&self) -> Option<f64> {
        self.high_y.fraction(self.high_y.above_other_mean)
    }

    pub fn low_x_agreement(&self) -> Option<f64> {
        self.low_x.fraction(self.low_x.below_other_mean)
    }
}

pub fn extension_overlap_summary(split: &ExtensionSplit) -> OverlapSummary {
    let mut s = OverlapSummary::default();
    for p in &split.points {
        if matches!(p.region, Region::HighY | Region::Both) {
            s.high_y.members += 1;
            if p.x > split.x_mean {
                s.high_y.above_other_mean += 1;
            } else if p.x < split.x_mean {
                s.high_y.below_other_mean += 1;
            }
        }
        if matches!(p.region, Region::LowX | Region::Both) {
            s.low_x.members += 1;
            if p.y > split.y_mean {
                s.low_x.above_other_mean += 1;
            } else if p.y < split.y_mean {
                s.low_x.below_other_mean += 1;
            }
        }
    }
    s
}

/// Where an axis of a comparison takes its values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Axis {
    Peer(String),
    Citation(BibIndicator),
}

impl Axis {
    /// Citation indicator codes take precedence over peer indicator ids.
    pub fn parse(s: &str) -> Self {
        match s.parse::<BibIndicator>() {
            Ok(b) => Self::Citation(b),
            Err(_) => Self::Peer(s.to_string()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Peer(id) => id.clone(),
            Self::Citation(b) => b.code().to_string(),
        }
    }
}

/// Paired `(label, x, y)` points across evaluations for two axes. Labels
/// are `evaluation/team` when more than one evaluation is involved.
pub fn paired_points(
    peer: &[&TeamScores],
    bib: &[TeamBibIndicators],
    x: &Axis,
    y: &Axis,
) -> Vec<(String, f64, f64)> {
    let by_team: BTreeMap<&str, &TeamBibIndicators> =
        bib.iter().map(|b| (b.team_id.as_str(), b)).collect();
    let value = |s: &TeamScores, team: &str, axis: &Axis| -> Option<f64> {
        match axis {
            Axis::Peer(id) => s.get(team, id),
            Axis::Citation(b) => by_team.get(team).map(|t| b.value(t)),
        }
    };
    let mut out = Vec::new();
    for s in peer {
        for team in &s.teams {
            if let (Some(vx), Some(vy)) = (value(s, team, x), value(s, team, y)) {
                let label = if peer.len() > 1 {
                    format!("{}/{team}", s.evaluation_id)
                } else {
                    team.clone()
                };
                out.push((label, vx, vy));
            }
        }
    }
    out
}
