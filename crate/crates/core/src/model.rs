//! Domain types for peer evaluations, publications and citation baselines.
//!
//! A [`RatingMatrix`] holds one evaluation: the scores every expert gave to
//! every team on every indicator, with missing cells left absent rather
//! than filled with a sentinel. Matrices may be built in an invalid state;
//! [`validate_matrix`] reports every violation it finds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleKind {
    Numeric,
    Ordinal,
}

/// A bounded, integer-stepped rating scale.
///
/// Ordinal scales carry labels ordered from best to worst; the best label
/// maps to `max` and each following label one step lower.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingScale {
    kind: ScaleKind,
    min: f64,
    max: f64,
    labels: Vec<(String, f64)>,
}

impl RatingScale {
    pub fn numeric(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidArgument(format!(
                "scale bounds must satisfy min < max, got [{min}, {max}]"
            )));
        }
        Ok(Self {
            kind: ScaleKind::Numeric,
            min,
            max,
            labels: Vec::new(),
        })
    }

    /// Builds an ordinal scale from labels listed best first, coded
    /// `n, n-1, ..., 1`.
    pub fn ordinal<S: AsRef<str>>(labels_best_first: &[S]) -> Result<Self> {
        let n = labels_best_first.len();
        if n < 2 {
            return Err(Error::InvalidArgument(
                "an ordinal scale needs at least two labels".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        let mut labels = Vec::with_capacity(n);
        for (i, label) in labels_best_first.iter().enumerate() {
            let label = label.as_ref().trim().to_string();
            if label.is_empty() || !seen.insert(label.clone()) {
                return Err(Error::InvalidArgument(format!(
                    "ordinal labels must be non-empty and distinct (`{label}`)"
                )));
            }
            labels.push((label, (n - i) as f64));
        }
        Ok(Self {
            kind: ScaleKind::Ordinal,
            min: 1.0,
            max: n as f64,
            labels,
        })
    }

    /// The 1 to 10 scale.
    pub fn one_to_ten() -> Self {
        Self::numeric(1.0, 10.0).expect("static bounds")
    }

    /// The 1 to 5 scale.
    pub fn one_to_five() -> Self {
        Self::numeric(1.0, 5.0).expect("static bounds")
    }

    /// Letter grades A (excellent) to D (less good), coded 4..1.
    pub fn letters_a_to_d() -> Self {
        Self::ordinal(&["A", "B", "C", "D"]).expect("static labels")
    }

    pub fn kind(&self) -> ScaleKind {
        self.kind
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Distance between adjacent scale points.
    pub fn step(&self) -> f64 {
        1.0
    }

    pub fn labels(&self) -> &[(String, f64)] {
        &self.labels
    }

    pub fn contains(&self, value: f64) -> bool {
        value.is_finite() && value >= self.min && value <= self.max
    }

    /// Maps a label to its numeric code. Numeric scales also accept the
    /// decimal rendering of an in-range value.
    pub fn ordinal_to_numeric(&self, label: &str) -> Result<f64> {
        let label = label.trim();
        if let Some((_, v)) = self.labels.iter().find(|(l, _)| l == label) {
            return Ok(*v);
        }
        if self.kind == ScaleKind::Numeric {
            if let Ok(v) = label.parse::<f64>() {
                if self.contains(v) {
                    return Ok(v);
                }
            }
        }
        Err(Error::UnknownLabel(label.to_string()))
    }

    fn label_issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if !(self.min < self.max) {
            issues.push(format!(
                "scale min {} is not below max {}",
                self.min, self.max
            ));
        }
        let mut values = BTreeSet::new();
        for (label, v) in &self.labels {
            if !self.contains(*v) {
                issues.push(format!("label `{label}` maps outside the scale"));
            }
            if !values.insert(v.to_bits()) {
                issues.push(format!(
                    "label `{label}` shares its code with another label"
                ));
            }
        }
        issues
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    /// An aspect of the research activity as a whole.
    Global,
    /// One component of the research activity (publications, projects, ...).
    Partial,
    /// The reviewer's self-declared expertise; used as a weight only.
    Expertise,
    Overall,
    /// Non-numeric classification, never correlated.
    Categorical,
}

impl IndicatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Global => "global",
            Self::Partial => "partial",
            Self::Expertise => "expertise",
            Self::Overall => "overall",
            Self::Categorical => "categorical",
        }
    }
}

impl std::str::FromStr for IndicatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "global" => Ok(Self::Global),
            "partial" => Ok(Self::Partial),
            "expertise" => Ok(Self::Expertise),
            "overall" => Ok(Self::Overall),
            "categorical" => Ok(Self::Categorical),
            other => Err(Error::InvalidArgument(format!(
                "unknown indicator kind `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indicator {
    pub id: String,
    pub label: String,
    pub kind: IndicatorKind,
    /// Indicators sharing a group are expected to correlate with each other.
    pub group: Option<String>,
}

impl Indicator {
    pub fn new(id: impl Into<String>, label: impl Into<String>, kind: IndicatorKind) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            kind,
            group: None,
        }
    }

    pub fn with_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }

    /// True for indicators that enter score aggregation and correlations.
    pub fn is_performance(&self) -> bool {
        !matches!(
            self.kind,
            IndicatorKind::Expertise | IndicatorKind::Categorical
        )
    }

    /// The expected-correlation group: the explicit tag if any, otherwise
    /// one shared group for global and overall indicators and a private
    /// group for each partial one.
    pub fn expected_group(&self) -> Option<String> {
        if let Some(g) = &self.group {
            return Some(g.clone());
        }
        match self.kind {
            IndicatorKind::Global | IndicatorKind::Overall => Some("global".to_string()),
            IndicatorKind::Partial => Some(format!("partial:{}", self.id)),
            IndicatorKind::Expertise | IndicatorKind::Categorical => None,
        }
    }
}

/// Key of one score cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub expert: String,
    pub team: String,
    pub indicator: String,
}

impl Cell {
    pub fn new(expert: &str, team: &str, indicator: &str) -> Self {
        Self {
            expert: expert.to_string(),
            team: team.to_string(),
            indicator: indicator.to_string(),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(expert `{}`, team `{}`, indicator `{}`)",
            self.expert, self.team, self.indicator
        )
    }
}

/// Scores of one evaluation over (expert, team, indicator), plus optional
/// expertise weights per (expert, team).
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    pub evaluation_id: String,
    pub discipline: String,
    pub scale: RatingScale,
    pub teams: Vec<String>,
    pub experts: Vec<String>,
    pub indicators: Vec<Indicator>,
    pub scores: BTreeMap<Cell, f64>,
    pub expertise: BTreeMap<(String, String), f64>,
}

impl RatingMatrix {
    pub fn new(
        evaluation_id: impl Into<String>,
        discipline: impl Into<String>,
        scale: RatingScale,
        teams: Vec<String>,
        experts: Vec<String>,
        indicators: Vec<Indicator>,
    ) -> Self {
        Self {
            evaluation_id: evaluation_id.into(),
            discipline: discipline.into(),
            scale,
            teams,
            experts,
            indicators,
            scores: BTreeMap::new(),
            expertise: BTreeMap::new(),
        }
    }

    pub fn set_score(&mut self, expert: &str, team: &str, indicator: &str, value: f64) {
        self.scores
            .insert(Cell::new(expert, team, indicator), value);
    }

    pub fn set_expertise(&mut self, expert: &str, team: &str, weight: f64) {
        self.expertise
            .insert((expert.to_string(), team.to_string()), weight);
    }

    pub fn score(&self, expert: &str, team: &str, indicator: &str) -> Option<f64> {
        self.scores
            .get(&Cell::new(expert, team, indicator))
            .copied()
    }

    pub fn expertise(&self, expert: &str, team: &str) -> Option<f64> {
        self.expertise
            .get(&(expert.to_string(), team.to_string()))
            .copied()
    }

    pub fn indicator(&self, id: &str) -> Option<&Indicator> {
        self.indicators.iter().find(|i| i.id == id)
    }

    /// Indicators that take part in aggregation and correlation.
    pub fn performance_indicators(&self) -> impl Iterator<Item = &Indicator> {
        self.indicators.iter().filter(|i| i.is_performance())
    }

    /// Scores one expert gave on an indicator, keyed by team.
    pub fn expert_scores(&self, expert: &str, indicator: &str) -> BTreeMap<&str, f64> {
        self.teams
            .iter()
            .filter_map(|t| self.score(expert, t, indicator).map(|v| (t.as_str(), v)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    NoExperts,
    NoTeams,
    NoIndicators,
    InvalidScale(String),
    DuplicateId {
        what: &'static str,
        id: String,
    },
    UnknownReference {
        cell: Cell,
        what: &'static str,
    },
    ScoreOutOfRange {
        cell: Cell,
        value: f64,
        min: f64,
        max: f64,
    },
    ScoreOnNonNumeric {
        cell: Cell,
    },
    NegativeWeight {
        expert: String,
        team: String,
        weight: f64,
    },
    UnknownWeightReference {
        expert: String,
        team: String,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoExperts => f.write_str("matrix has no experts"),
            Self::NoTeams => f.write_str("matrix has no teams"),
            Self::NoIndicators => f.write_str("matrix has no indicators"),
            Self::InvalidScale(msg) => write!(f, "invalid scale: {msg}"),
            Self::DuplicateId { what, id } => write!(f, "duplicate {what} id `{id}`"),
            Self::UnknownReference { cell, what } => {
                write!(f, "score {cell} references unknown {what}")
            }
            Self::ScoreOutOfRange {
                cell,
                value,
                min,
                max,
            } => {
                write!(f, "score {value} at {cell} outside [{min}, {max}]")
            }
            Self::ScoreOnNonNumeric { cell } => {
                write!(
                    f,
                    "numeric score stored for non-numeric indicator at {cell}"
                )
            }
            Self::NegativeWeight {
                expert,
                team,
                weight,
            } => {
                write!(
                    f,
                    "negative expertise weight {weight} for expert `{expert}`, team `{team}`"
                )
            }
            Self::UnknownWeightReference { expert, team } => {
                write!(
                    f,
                    "expertise weight references unknown expert `{expert}` or team `{team}`"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn len(&self) -> usize {
        self.issues.len()
    }

    pub fn summary(&self) -> String {
        self.issues
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn duplicates<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut dups = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            dups.insert(id.to_string());
        }
    }
    dups.into_iter().collect()
}

/// Checks every structural and range invariant of a matrix.
pub fn validate_matrix(matrix: &RatingMatrix) -> ValidationReport {
    let mut issues = Vec::new();
    if matrix.experts.is_empty() {
        issues.push(ValidationIssue::NoExperts);
    }
    if matrix.teams.is_empty() {
        issues.push(ValidationIssue::NoTeams);
    }
    if matrix.indicators.is_empty() {
        issues.push(ValidationIssue::NoIndicators);
    }
    issues.extend(
        matrix
            .scale
            .label_issues()
            .into_iter()
            .map(ValidationIssue::InvalidScale),
    );
    for (what, dups) in [
        (
            "expert",
            duplicates(matrix.experts.iter().map(String::as_str)),
        ),
        ("team", duplicates(matrix.teams.iter().map(String::as_str))),
        (
            "indicator",
            duplicates(matrix.indicators.iter().map(|i| i.id.as_str())),
        ),
    ] {
        issues.extend(
            dups.into_iter()
                .map(|id| ValidationIssue::DuplicateId { what, id }),
        );
    }

    let experts: BTreeSet<&str> = matrix.experts.iter().map(String::as_str).collect();
    let teams: BTreeSet<&str> = matrix.teams.iter().map(String::as_str).collect();
    for (cell, &value) in &matrix.scores {
        if !experts.contains(cell.expert.as_str()) {
            issues.push(ValidationIssue::UnknownReference {
                cell: cell.clone(),
                what: "expert",
            });
        }
        if !teams.contains(cell.team.as_str()) {
            issues.push(ValidationIssue::UnknownReference {
                cell: cell.clone(),
                what: "team",
            });
        }
        match matrix.indicator(&cell.indicator) {
            None => issues.push(ValidationIssue::UnknownReference {
                cell: cell.clone(),
                what: "indicator",
            }),
            Some(ind) if ind.kind == IndicatorKind::Categorical => {
                issues.push(ValidationIssue::ScoreOnNonNumeric { cell: cell.clone() })
            }
            Some(_) => {}
        }
        if !matrix.scale.contains(value) {
            issues.push(ValidationIssue::ScoreOutOfRange {
                cell: cell.clone(),
                value,
                min: matrix.scale.min(),
                max: matrix.scale.max(),
            });
        }
    }
    for ((expert, team), &weight) in &matrix.expertise {
        if !experts.contains(expert.as_str()) || !teams.contains(team.as_str()) {
            issues.push(ValidationIssue::UnknownWeightReference {
                expert: expert.clone(),
                team: team.clone(),
            });
        }
        if !(weight >= 0.0) {
            issues.push(ValidationIssue::NegativeWeight {
                expert: expert.clone(),
                team: team.clone(),
                weight,
            });
        }
    }
    ValidationReport { issues }
}

/// One publication, attributed to one or more teams.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub team_ids: Vec<String>,
    pub journal_id: String,
    pub field_ids: Vec<String>,
    pub year: i32,
    pub citations_total: u64,
    pub self_citations: u64,
}

impl PublicationRecord {
    /// Citations received from others.
    pub fn external_citations(&self) -> u64 {
        self.citations_total.saturating_sub(self.self_citations)
    }

    /// Checks record invariants, and the year against a reference period
    /// when one is given.
    pub fn validate(&self, period: Option<(i32, i32)>) -> Result<()> {
        if self.self_citations > self.citations_total {
            return Err(Error::SelfCitationsExceedTotal {
                pub_id: self.pub_id.clone(),
                citations: self.citations_total,
                self_citations: self.self_citations,
            });
        }
        if self.field_ids.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "publication `{}` lists no field",
                self.pub_id
            )));
        }
        if let Some((from, to)) = period {
            if self.year < from || self.year > to {
                return Err(Error::InvalidArgument(format!(
                    "publication `{}` year {} outside reference period {from}-{to}",
                    self.pub_id, self.year
                )));
            }
        }
        Ok(())
    }
}

/// Expected citations per publication for journals and fields, by year.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BaselineTable {
    pub journal_baselines: BTreeMap<(String, i32), f64>,
    pub field_baselines: BTreeMap<(String, i32), f64>,
}

impl BaselineTable {
    pub fn insert_journal(&mut self, journal: &str, year: i32, expected: f64) -> Result<()> {
        check_baseline(expected)?;
        self.journal_baselines
            .insert((journal.to_string(), year), expected);
        Ok(())
    }

    pub fn insert_field(&mut self, field: &str, year: i32, expected: f64) -> Result<()> {
        check_baseline(expected)?;
        self.field_baselines
            .insert((field.to_string(), year), expected);
        Ok(())
    }

    pub fn journal(&self, journal: &str, year: i32) -> Result<f64> {
        self.journal_baselines
            .get(&(journal.to_string(), year))
            .copied()
            .ok_or_else(|| Error::MissingBaseline {
                kind: "journal",
                key: journal.to_string(),
                year,
            })
    }

    pub fn field(&self, field: &str, year: i32) -> Result<f64> {
        self.field_baselines
            .get(&(field.to_string(), year))
            .copied()
            .ok_or_else(|| Error::MissingBaseline {
                kind: "field",
                key: field.to_string(),
                year,
            })
    }
}

fn check_baseline(expected: f64) -> Result<()> {
    if expected.is_finite() && expected >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "baseline values must be finite and non-negative, got {expected}"
        )))
    }
}

/// Significance settings. Tests are always two-tailed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatConfig {
    alpha: f64,
}

impl StatConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self { alpha })
        } else {
            Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for StatConfig {
    fn default() -> Self {
        Self { alpha: 0.05 }
    }
}
