//! Per-team final scores from individual expert ratings.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{validate_matrix, Indicator, RatingMatrix, RatingScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Arithmetic mean over the experts who rated the cell.
    Plain,
    /// Mean weighted by each expert's declared expertise for the team.
    ExpertiseWeighted,
    /// One agreed score per cell, passed through.
    PanelConsensus,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Plain => "plain",
            Self::ExpertiseWeighted => "weighted",
            Self::PanelConsensus => "consensus",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" => Ok(Self::Plain),
            "weighted" | "expertise-weighted" | "expertise_weighted" => Ok(Self::ExpertiseWeighted),
            "consensus" | "panel-consensus" | "panel_consensus" => Ok(Self::PanelConsensus),
            other => Err(Error::InvalidArgument(format!(
                "unknown aggregation scheme `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatedCell {
    pub value: f64,
    pub contributors: usize,
}

/// Aggregated scores of one evaluation; cells without data are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamScores {
    pub evaluation_id: String,
    pub discipline: String,
    pub scheme: Scheme,
    pub scale: RatingScale,
    pub teams: Vec<String>,
    pub indicators: Vec<Indicator>,
    /// Keyed by (team, indicator).
    pub cells: BTreeMap<(String, String), AggregatedCell>,
}

impl TeamScores {
    pub fn get(&self, team: &str, indicator: &str) -> Option<f64> {
        self.cells
            .get(&(team.to_string(), indicator.to_string()))
            .map(|c| c.value)
    }

    /// Present values of one indicator, keyed by team.
    pub fn column(&self, indicator: &str) -> BTreeMap<String, f64> {
        self.teams
            .iter()
            .filter_map(|t| self.get(t, indicator).map(|v| (t.clone(), v)))
            .collect()
    }

    pub fn indicator(&self, id: &str) -> Option<&Indicator> {
        self.indicators.iter().find(|i| i.id == id)
    }
}

fn ratings<'a>(
    matrix: &'a RatingMatrix,
    team: &'a str,
    indicator: &'a str,
) -> impl Iterator<Item = (&'a str, f64)> + 'a {
    matrix
        .experts
        .iter()
        .filter_map(move |e| matrix.score(e, team, indicator).map(|v| (e.as_str(), v)))
}

pub fn plain_average(matrix: &RatingMatrix, team: &str, indicator: &str) -> Result<f64> {
    let (sum, count) =
        ratings(matrix, team, indicator).fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
    if count == 0 {
        return Err(Error::NoData {
            team: team.to_string(),
            indicator: indicator.to_string(),
        });
    }
    Ok(sum / count as f64)
}

fn weighted_parts(matrix: &RatingMatrix, team: &str, indicator: &str) -> Result<(f64, f64, usize)> {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut count = 0;
    for (expert, score) in ratings(matrix, team, indicator) {
        // Experts without a declared weight are left out rather than defaulted.
        let Some(w) = matrix.expertise(expert, team) else {
            continue;
        };
        if w < 0.0 || w.is_nan() {
            return Err(Error::NegativeWeight {
                expert: expert.to_string(),
                team: team.to_string(),
                weight: w,
            });
        }
        if w > 0.0 {
            num += w * score;
            den += w;
            count += 1;
        }
    }
    Ok((num, den, count))
}

/// `sum(w * r) / sum(w)` over experts holding both a score and a weight.
pub fn weighted_average(matrix: &RatingMatrix, team: &str, indicator: &str) -> Result<f64> {
    let (num, den, count) = weighted_parts(matrix, team, indicator)?;
    if count == 0 {
        return Err(Error::NoWeightedData {
            team: team.to_string(),
            indicator: indicator.to_string(),
        });
    }
    Ok(num / den)
}

/// Aggregates every (team, performance indicator) cell of a valid matrix.
pub fn aggregate_evaluation(matrix: &RatingMatrix, scheme: Scheme) -> Result<TeamScores> {
    let report = validate_matrix(matrix);
    if !report.is_empty() {
        return Err(Error::InvalidMatrix {
            evaluation: matrix.evaluation_id.clone(),
            summary: report.summary(),
        });
    }
    if scheme == Scheme::ExpertiseWeighted && matrix.expertise.is_empty() {
        return Err(Error::MissingExpertise {
            evaluation: matrix.evaluation_id.clone(),
        });
    }

    let mut cells = BTreeMap::new();
    for team in &matrix.teams {
        for ind in matrix.performance_indicators() {
            let present: Vec<f64> = ratings(matrix, team, &ind.id).map(|(_, v)| v).collect();
            if present.is_empty() {
                continue;
            }
            let cell = match scheme {
                Scheme::Plain => AggregatedCell {
                    value: plain_average(matrix, team, &ind.id)?,
                    contributors: present.len(),
                },
                Scheme::ExpertiseWeighted => {
                    let (num, den, count) = weighted_parts(matrix, team, &ind.id)?;
                    if count == 0 {
                        continue;
                    }
                    AggregatedCell {
                        value: num / den,
                        contributors: count,
                    }
                }
                Scheme::PanelConsensus => {
                    if present.len() > 1 {
                        return Err(Error::InvalidArgument(format!(
                            "consensus evaluation `{}` holds {} scores for team `{team}`, indicator `{}`",
                            matrix.evaluation_id,
                            present.len(),
                            ind.id
                        )));
                    }
                    AggregatedCell {
                        value: present[0],
                        contributors: 1,
                    }
                }
            };
            cells.insert((team.clone(), ind.id.clone()), cell);
        }
    }

    Ok(TeamScores {
        evaluation_id: matrix.evaluation_id.clone(),
        discipline: matrix.discipline.clone(),
        scheme,
        scale: matrix.scale.clone(),
        teams: matrix.teams.clone(),
        indicators: matrix.performance_indicators().cloned().collect(),
        cells,
    })
}
