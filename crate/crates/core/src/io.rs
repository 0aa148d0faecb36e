//! Data bundles: a directory holding `manifest.toml` and delimited-text
//! tables.
//!
//! | file               | columns                                                   |
//! |--------------------|-----------------------------------------------------------|
//! | `ratings.csv`      | evaluation, discipline, expert, team, indicator, score    |
//! | `indicators.csv`   | evaluation, id, label, kind, group                        |
//! | `expertise.csv`    | evaluation, expert, team, weight (optional file)          |
//! | `publications.csv` | team, pub_id, journal, year, fields, citations, self_citations (optional) |
//! | `baselines.csv`    | kind, key, year, expected_cpp (required with publications) |
//!
//! Scores may be numbers or labels of an ordinal scale. `fields` is
//! semicolon-separated. A publication shared by several teams appears once
//! per team with the same `pub_id`. Team ids must be unique across
//! evaluations because publications refer to teams directly.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::aggregation::{aggregate_evaluation, Scheme, TeamScores};
use crate::bibliometrics::{indicators_by_team, TeamBibIndicators, UncitedRule};
use crate::error::{Error, Result};
use crate::model::{
    validate_matrix, BaselineTable, Indicator, IndicatorKind, PublicationRecord, RatingMatrix,
    RatingScale,
};

pub const MANIFEST: &str = "manifest.toml";
pub const RATINGS: &str = "ratings.csv";
pub const INDICATORS: &str = "indicators.csv";
pub const EXPERTISE: &str = "expertise.csv";
pub const PUBLICATIONS: &str = "publications.csv";
pub const BASELINES: &str = "baselines.csv";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ScaleDef {
    Numeric { min: f64, max: f64 },
    Ordinal { labels: Vec<String> },
}

impl ScaleDef {
    pub fn build(&self) -> Result<RatingScale> {
        match self {
            Self::Numeric { min, max } => RatingScale::numeric(*min, *max),
            Self::Ordinal { labels } => RatingScale::ordinal(labels),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationMeta {
    pub id: String,
    pub discipline: String,
    pub scale: String,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    /// Pooling group for cross-method tables.
    #[serde(default)]
    pub group: Option<String>,
    /// Inclusive publication window `[first, last]`.
    #[serde(default)]
    pub reference_period: Option<(i32, i32)>,
}

fn default_scheme() -> String {
    Scheme::Plain.as_str().to_string()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub title: Option<String>,
    pub scales: BTreeMap<String, ScaleDef>,
    pub evaluations: Vec<EvaluationMeta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub meta: EvaluationMeta,
    pub scheme: Scheme,
    pub matrix: RatingMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataBundle {
    pub root: PathBuf,
    pub title: String,
    pub evaluations: Vec<Evaluation>,
    pub publications: Vec<PublicationRecord>,
    pub baselines: BaselineTable,
}

impl DataBundle {
    pub fn evaluation(&self, id: &str) -> Option<&Evaluation> {
        self.evaluations.iter().find(|e| e.meta.id == id)
    }

    pub fn all_teams(&self) -> Vec<String> {
        self.evaluations
            .iter()
            .flat_map(|e| e.matrix.teams.iter().cloned())
            .collect()
    }

    pub fn has_bibliometrics(&self) -> bool {
        !self.publications.is_empty()
    }

    /// Aggregates every evaluation with `scheme`, or with its own manifest
    /// scheme when `scheme` is `None`.
    pub fn team_scores(&self, scheme: Option<Scheme>) -> Result<Vec<TeamScores>> {
        self.evaluations
            .iter()
            .map(|e| aggregate_evaluation(&e.matrix, scheme.unwrap_or(e.scheme)))
            .collect()
    }

    pub fn bib_indicators(&self, rule: UncitedRule) -> Result<Vec<TeamBibIndicators>> {
        indicators_by_team(&self.all_teams(), &self.publications, &self.baselines, rule)
    }

    /// Manifest groups in first-seen order with their evaluation ids.
    pub fn groups(&self) -> Vec<(String, Vec<String>)> {
        let mut out: Vec<(String, Vec<String>)> = Vec::new();
        for e in &self.evaluations {
            if let Some(g) = &e.meta.group {
                match out.iter_mut().find(|(name, _)| name == g) {
                    Some((_, ids)) => ids.push(e.meta.id.clone()),
                    None => out.push((g.clone(), vec![e.meta.id.clone()])),
                }
            }
        }
        out
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// A header-checked CSV table with 1-based line numbers.
struct Table {
    path: PathBuf,
    columns: BTreeMap<String, usize>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read(path: &Path, required: &[&str]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::from_text(path, &text, required)
    }

    fn from_text(path: &Path, text: &str, required: &[&str]) -> Result<Self> {
        let data_err = |line: u64, message: String| Error::Data {
            file: path.to_path_buf(),
            line,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| data_err(1, e.to_string()))?
            .clone();
        let columns: BTreeMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        for c in required {
            if !columns.contains_key(*c) {
                return Err(data_err(1, format!("missing column `{c}`")));
            }
        }
        // Line numbers from byte offsets; the reader's own count skips blank lines.
        let bytes = text.as_bytes();
        let line_of = |p: Option<&csv::Position>| {
            p.map_or(0, |p| {
                let mut at = (p.byte() as usize).min(bytes.len());
                while at < bytes.len() && matches!(bytes[at], b'\n' | b'\r' | b'#') {
                    if bytes[at] == b'#' {
                        while at < bytes.len() && bytes[at] != b'\n' {
                            at += 1;
                        }
                    }
                    at += 1;
                }
                1 + bytes[..at].iter().filter(|b| **b == b'\n').count() as u64
            })
        };
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| data_err(line_of(e.position()), e.to_string()))?;
            rows.push((line_of(rec.position()), rec));
        }
        Ok(Self {
            path: path.to_path_buf(),
            columns,
            rows,
        })
    }

    fn err(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Data {
            file: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn get<'a>(&self, rec: &'a csv::StringRecord, column: &str) -> &'a str {
        self.columns
            .get(column)
            .and_then(|&i| rec.get(i))
            .unwrap_or("")
    }

    fn text(&self, line: u64, rec: &csv::StringRecord, column: &str) -> Result<String> {
        let v = self.get(rec, column);
        if v.is_empty() {
            Err(self.err(line, format!("column `{column}`: empty value")))
        } else {
            Ok(v.to_string())
        }
    }

    fn parse<T: FromStr>(&self, line: u64, rec: &csv::StringRecord, column: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.get(rec, column);
        v.parse()
            .map_err(|e| self.err(line, format!("column `{column}`: cannot parse `{v}`: {e}")))
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    toml::from_str(&text).map_err(|e| io_err(path, e.message()))
}

/// Loads and validates a bundle directory.
pub fn load_bundle(dir: &Path) -> Result<DataBundle> {
    if !dir.is_dir() {
        return Err(io_err(dir, "not a directory"));
    }
    let manifest = load_manifest(&dir.join(MANIFEST))?;
    let mut evaluations = build_evaluations(dir, &manifest)?;
    load_indicators(&dir.join(INDICATORS), &mut evaluations)?;
    load_ratings(&dir.join(RATINGS), &mut evaluations)?;
    let expertise = dir.join(EXPERTISE);
    if expertise.exists() {
        load_expertise(&expertise, &mut evaluations)?;
    }
    for e in &evaluations {
        let report = validate_matrix(&e.matrix);
        if !report.is_empty() {
            return Err(Error::InvalidMatrix {
                evaluation: e.meta.id.clone(),
                summary: report.summary(),
            });
        }
    }
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for e in &evaluations {
        for t in &e.matrix.teams {
            if let Some(other) = owner.insert(t, &e.meta.id) {
                return Err(Error::InvalidArgument(format!(
                    "team `{t}` appears in evaluations `{other}` and `{}`; team ids must be unique",
                    e.meta.id
                )));
            }
        }
    }
    let periods: BTreeMap<String, Option<(i32, i32)>> = evaluations
        .iter()
        .flat_map(|e| {
            e.matrix
                .teams
                .iter()
                .map(|t| (t.clone(), e.meta.reference_period))
        })
        .collect();

    let baselines_path = dir.join(BASELINES);
    let baselines = if baselines_path.exists() {
        load_baselines(&baselines_path)?
    } else {
        BaselineTable::default()
    };
    let pubs_path = dir.join(PUBLICATIONS);
    let publications = if pubs_path.exists() {
        load_publications(&pubs_path, &periods, &baselines)?
    } else {
        Vec::new()
    };
    let title = manifest.title.clone().unwrap_or_else(|| {
        dir.file_name().map_or_else(
            || "bundle".to_string(),
            |n| n.to_string_lossy().into_owned(),
        )
    });
    Ok(DataBundle {
        root: dir.to_path_buf(),
        title,
        evaluations,
        publications,
        baselines,
    })
}

fn build_evaluations(dir: &Path, manifest: &Manifest) -> Result<Vec<Evaluation>> {
    let path = dir.join(MANIFEST);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for meta in &manifest.evaluations {
        if !seen.insert(meta.id.as_str()) {
            return Err(io_err(&path, format!("duplicate evaluation `{}`", meta.id)));
        }
        let scale = manifest
            .scales
            .get(&meta.scale)
            .ok_or_else(|| {
                io_err(
                    &path,
                    format!(
                        "evaluation `{}` uses unknown scale `{}`",
                        meta.id, meta.scale
                    ),
                )
            })?
            .build()
            .map_err(|e| io_err(&path, format!("scale `{}`: {e}", meta.scale)))?;
        let scheme = meta
            .scheme
            .parse::<Scheme>()
            .map_err(|e| io_err(&path, format!("evaluation `{}`: {e}", meta.id)))?;
        if let Some((a, b)) = meta.reference_period {
            if a > b {
                return Err(io_err(
                    &path,
                    format!("evaluation `{}`: reversed reference period", meta.id),
                ));
            }
        }
        out.push(Evaluation {
            matrix: RatingMatrix::new(
                &meta.id,
                &meta.discipline,
                scale,
                Vec::new(),
                Vec::new(),
                Vec::new(),
            ),
            meta: meta.clone(),
            scheme,
        });
    }
    if out.is_empty() {
        return Err(io_err(&path, "no evaluations"));
    }
    Ok(out)
}

fn find_eval<'a>(
    table: &Table,
    line: u64,
    evals: &'a mut [Evaluation],
    id: &str,
) -> Result<&'a mut Evaluation> {
    evals
        .iter_mut()
        .find(|e| e.meta.id == id)
        .ok_or_else(|| table.err(line, format!("unknown evaluation `{id}`")))
}

fn load_indicators(path: &Path, evals: &mut [Evaluation]) -> Result<()> {
    let t = Table::read(path, &["evaluation", "id", "kind"])?;
    for (line, rec) in &t.rows {
        let line = *line;
        let eval_id = t.text(line, rec, "evaluation")?;
        let id = t.text(line, rec, "id")?;
        let kind: IndicatorKind = t.parse(line, rec, "kind")?;
        let label = match t.get(rec, "label") {
            "" => id.clone(),
            l => l.to_string(),
        };
        let mut ind = Indicator::new(&id, label, kind);
        let group = t.get(rec, "group");
        if !group.is_empty() {
            ind = ind.with_group(group);
        }
        let e = find_eval(&t, line, evals, &eval_id)?;
        if e.matrix.indicator(&id).is_some() {
            return Err(t.err(
                line,
                format!("duplicate indicator `{id}` in evaluation `{eval_id}`"),
            ));
        }
        e.matrix.indicators.push(ind);
    }
    Ok(())
}

fn load_ratings(path: &Path, evals: &mut [Evaluation]) -> Result<()> {
    let t = Table::read(
        path,
        &["evaluation", "expert", "team", "indicator", "score"],
    )?;
    let mut first_line: BTreeMap<(String, String, String, String), u64> = BTreeMap::new();
    for (line, rec) in &t.rows {
        let line = *line;
        let eval_id = t.text(line, rec, "evaluation")?;
        let expert = t.text(line, rec, "expert")?;
        let team = t.text(line, rec, "team")?;
        let indicator = t.text(line, rec, "indicator")?;
        let raw = t.text(line, rec, "score")?;
        let discipline = t.get(rec, "discipline");
        let e = find_eval(&t, line, evals, &eval_id)?;
        if !discipline.is_empty() && discipline != e.meta.discipline {
            return Err(t.err(
                line,
                format!(
                    "discipline `{discipline}` does not match `{}` in the manifest",
                    e.meta.discipline
                ),
            ));
        }
        let ind = e.matrix.indicator(&indicator).ok_or_else(|| {
            t.err(
                line,
                format!("unknown indicator `{indicator}` for evaluation `{eval_id}`"),
            )
        })?;
        if !ind.is_performance() {
            return Err(t.err(
                line,
                format!(
                    "indicator `{indicator}` is {} and takes no scores",
                    ind.kind.as_str()
                ),
            ));
        }
        let score = e
            .matrix
            .scale
            .ordinal_to_numeric(&raw)
            .map_err(|err| t.err(line, format!("column `score`: {err}")))?;
        let key = (
            eval_id.clone(),
            expert.clone(),
            team.clone(),
            indicator.clone(),
        );
        if let Some(prev) = first_line.insert(key, line) {
            return Err(t.err(
                line,
                format!("duplicate score for expert `{expert}`, team `{team}`, indicator `{indicator}` (first on line {prev})"),
            ));
        }
        if !e.matrix.experts.contains(&expert) {
            e.matrix.experts.push(expert.clone());
        }
        if !e.matrix.teams.contains(&team) {
            e.matrix.teams.push(team.clone());
        }
        e.matrix.set_score(&expert, &team, &indicator, score);
    }
    Ok(())
}

fn load_expertise(path: &Path, evals: &mut [Evaluation]) -> Result<()> {
    let t = Table::read(path, &["evaluation", "expert", "team", "weight"])?;
    let mut first_line: BTreeMap<(String, String, String), u64> = BTreeMap::new();
    for (line, rec) in &t.rows {
        let line = *line;
        let eval_id = t.text(line, rec, "evaluation")?;
        let expert = t.text(line, rec, "expert")?;
        let team = t.text(line, rec, "team")?;
        let weight: f64 = t.parse(line, rec, "weight")?;
        let e = find_eval(&t, line, evals, &eval_id)?;
        if !e.matrix.experts.contains(&expert) {
            return Err(t.err(
                line,
                format!("unknown expert `{expert}` for evaluation `{eval_id}`"),
            ));
        }
        if !e.matrix.teams.contains(&team) {
            return Err(t.err(
                line,
                format!("unknown team `{team}` for evaluation `{eval_id}`"),
            ));
        }
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(t.err(
                line,
                format!("column `weight`: must be finite and non-negative, got {weight}"),
            ));
        }
        if let Some(prev) = first_line.insert((eval_id, expert.clone(), team.clone()), line) {
            return Err(t.err(
                line,
                format!(
                    "duplicate weight for expert `{expert}`, team `{team}` (first on line {prev})"
                ),
            ));
        }
        e.matrix.set_expertise(&expert, &team, weight);
    }
    Ok(())
}

fn load_baselines(path: &Path) -> Result<BaselineTable> {
    let t = Table::read(path, &["kind", "key", "year", "expected_cpp"])?;
    let mut table = BaselineTable::default();
    let mut first_line: BTreeMap<(String, String, i32), u64> = BTreeMap::new();
    for (line, rec) in &t.rows {
        let line = *line;
        let kind = t.text(line, rec, "kind")?;
        let key = t.text(line, rec, "key")?;
        let year: i32 = t.parse(line, rec, "year")?;
        let value: f64 = t.parse(line, rec, "expected_cpp")?;
        let res = match kind.as_str() {
            "journal" => table.insert_journal(&key, year, value),
            "field" => table.insert_field(&key, year, value),
            other => {
                return Err(t.err(
                    line,
                    format!("column `kind`: expected journal or field, got `{other}`"),
                ))
            }
        };
        res.map_err(|e| t.err(line, e.to_string()))?;
        if let Some(prev) = first_line.insert((kind, key.clone(), year), line) {
            return Err(t.err(
                line,
                format!("duplicate baseline for `{key}` {year} (first on line {prev})"),
            ));
        }
    }
    Ok(table)
}

fn load_publications(
    path: &Path,
    team_periods: &BTreeMap<String, Option<(i32, i32)>>,
    baselines: &BaselineTable,
) -> Result<Vec<PublicationRecord>> {
    let t = Table::read(
        path,
        &[
            "team",
            "pub_id",
            "journal",
            "year",
            "fields",
            "citations",
            "self_citations",
        ],
    )?;
    let mut pubs: Vec<PublicationRecord> = Vec::new();
    let mut index: BTreeMap<String, (usize, u64)> = BTreeMap::new();
    for (line, rec) in &t.rows {
        let line = *line;
        let team = t.text(line, rec, "team")?;
        let period = *team_periods
            .get(&team)
            .ok_or_else(|| t.err(line, format!("unknown team `{team}`")))?;
        let mut field_ids: Vec<String> = t
            .text(line, rec, "fields")?
            .split(';')
            .map(|f| f.trim().to_string())
            .filter(|f| !f.is_empty())
            .collect();
        field_ids.dedup();
        let p = PublicationRecord {
            pub_id: t.text(line, rec, "pub_id")?,
            team_ids: vec![team.clone()],
            journal_id: t.text(line, rec, "journal")?,
            field_ids,
            year: t.parse(line, rec, "year")?,
            citations_total: t.parse(line, rec, "citations")?,
            self_citations: t.parse(line, rec, "self_citations")?,
        };
        p.validate(period).map_err(|e| t.err(line, e.to_string()))?;
        baselines
            .journal(&p.journal_id, p.year)
            .map_err(|e| t.err(line, e.to_string()))?;
        for f in &p.field_ids {
            baselines
                .field(f, p.year)
                .map_err(|e| t.err(line, e.to_string()))?;
        }
        match index.get(&p.pub_id) {
            Some(&(i, first)) => {
                let existing = &mut pubs[i];
                let same = existing.journal_id == p.journal_id
                    && existing.field_ids == p.field_ids
                    && existing.year == p.year
                    && existing.citations_total == p.citations_total
                    && existing.self_citations == p.self_citations;
                if !same {
                    return Err(t.err(
                        line,
                        format!("publication `{}` disagrees with line {first}", p.pub_id),
                    ));
                }
                if existing.team_ids.contains(&team) {
                    return Err(t.err(
                        line,
                        format!("publication `{}` listed twice for team `{team}`", p.pub_id),
                    ));
                }
                existing.team_ids.push(team);
            }
            None => {
                index.insert(p.pub_id.clone(), (pubs.len(), line));
                pubs.push(p);
            }
        }
    }
    Ok(pubs)
}

/// Writes a rating matrix in the `ratings.csv` layout.
pub fn write_ratings_csv<W: std::io::Write>(matrix: &RatingMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let werr = |e: csv::Error| Error::InvalidArgument(format!("cannot write ratings: {e}"));
    w.write_record([
        "evaluation",
        "discipline",
        "expert",
        "team",
        "indicator",
        "score",
    ])
    .map_err(werr)?;
    for team in &matrix.teams {
        for expert in &matrix.experts {
            for ind in &matrix.indicators {
                if let Some(v) = matrix.score(expert, team, &ind.id) {
                    w.write_record([
                        matrix.evaluation_id.as_str(),
                        matrix.discipline.as_str(),
                        expert,
                        team,
                        &ind.id,
                        &v.to_string(),
                    ])
                    .map_err(werr)?;
                }
            }
        }
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(())
}
