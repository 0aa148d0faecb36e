//! Citation-analysis indicators per team.
//!
//! Observed impact is citations per publication excluding self-citations
//! (CPP). It is normalized against two expectations built from the baseline
//! table: the mean expected rate of the journals the team published in
//! (JCSm) and the mean expected rate of their fields (FCSm). Both means
//! weight every publication equally, so the ratios equal
//! `sum(observed) / sum(expected)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{BaselineTable, PublicationRecord};

/// Whether self-citations count toward a publication being cited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UncitedRule {
    /// Uncited means no citations once self-citations are removed.
    #[default]
    ExcludeSelfCitations,
    /// Uncited means no citations at all.
    IncludeSelfCitations,
}

impl UncitedRule {
    pub fn describe(self) -> &'static str {
        match self {
            Self::ExcludeSelfCitations => "uncited = no citations after excluding self-citations",
            Self::IncludeSelfCitations => "uncited = no citations including self-citations",
        }
    }

    fn is_uncited(self, p: &PublicationRecord) -> bool {
        match self {
            Self::ExcludeSelfCitations => p.external_citations() == 0,
            Self::IncludeSelfCitations => p.citations_total == 0,
        }
    }
}

/// Convention for publications assigned to several fields.
pub const MULTI_FIELD_CONVENTION: &str =
    "multi-field publications use the unweighted mean of their field baselines";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CitationCounts {
    pub publications: usize,
    pub citations: u64,
    pub cpp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeamBibIndicators {
    pub team_id: String,
    pub publications: usize,
    pub citations: u64,
    pub cpp: f64,
    pub jcsm: f64,
    pub fcsm: f64,
    pub cpp_jcsm: f64,
    pub cpp_fcsm: f64,
    pub jcsm_fcsm: f64,
    pub pnc: f64,
    pub uncited_rule: UncitedRule,
}

/// The citation-analysis indicators that can enter a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BibIndicator {
    P,
    C,
    Cpp,
    Jcsm,
    Fcsm,
    CppJcsm,
    CppFcsm,
    JcsmFcsm,
    Pnc,
}

impl BibIndicator {
    pub const ALL: [BibIndicator; 9] = [
        Self::P,
        Self::C,
        Self::Cpp,
        Self::Jcsm,
        Self::Fcsm,
        Self::CppJcsm,
        Self::CppFcsm,
        Self::JcsmFcsm,
        Self::Pnc,
    ];

    /// The three normalized ratios and PNC.
    pub const STANDARD: [BibIndicator; 4] =
        [Self::CppJcsm, Self::CppFcsm, Self::JcsmFcsm, Self::Pnc];

    pub fn code(self) -> &'static str {
        match self {
            Self::P => "P",
            Self::C => "C",
            Self::Cpp => "CPP",
            Self::Jcsm => "JCSm",
            Self::Fcsm => "FCSm",
            Self::CppJcsm => "CPP/JCSm",
            Self::CppFcsm => "CPP/FCSm",
            Self::JcsmFcsm => "JCSm/FCSm",
            Self::Pnc => "PNC",
        }
    }

    pub fn value(self, t: &TeamBibIndicators) -> f64 {
        match self {
            Self::P => t.publications as f64,
            Self::C => t.citations as f64,
            Self::Cpp => t.cpp,
            Self::Jcsm => t.jcsm,
            Self::Fcsm => t.fcsm,
            Self::CppJcsm => t.cpp_jcsm,
            Self::CppFcsm => t.cpp_fcsm,
            Self::JcsmFcsm => t.jcsm_fcsm,
            Self::Pnc => t.pnc,
        }
    }

    /// Expected sign of the correlation with peer scores, if any.
    pub fn expected_sign(self) -> Option<f64> {
        match self {
            Self::CppJcsm | Self::CppFcsm | Self::JcsmFcsm => Some(1.0),
            Self::Pnc => Some(-1.0),
            _ => None,
        }
    }

    pub fn is_ratio(self) -> bool {
        matches!(self, Self::CppJcsm | Self::CppFcsm | Self::JcsmFcsm)
    }
}

impl fmt::Display for BibIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for BibIndicator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_lowercase().replace(['_', '-'], "/");
        Self::ALL
            .into_iter()
            .find(|b| b.code().to_ascii_lowercase() == wanted)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown citation indicator `{s}`")))
    }
}

fn check(pubs: &[PublicationRecord]) -> Result<()> {
    if pubs.is_empty() {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    pubs.iter().try_for_each(|p| p.validate(None))
}

pub fn team_cpp(pubs: &[PublicationRecord]) -> Result<CitationCounts> {
    check(pubs)?;
    let citations: u64 = pubs.iter().map(PublicationRecord::external_citations).sum();
    Ok(CitationCounts {
        publications: pubs.len(),
        citations,
        cpp: citations as f64 / pubs.len() as f64,
    })
}

/// Mean journal citation score, one term per publication.
pub fn jcsm(pubs: &[PublicationRecord], baselines: &BaselineTable) -> Result<f64> {
    check(pubs)?;
    let mut sum = 0.0;
    for p in pubs {
        sum += baselines.journal(&p.journal_id, p.year)?;
    }
    Ok(sum / pubs.len() as f64)
}

/// Expected field citation rate of one publication.
pub fn publication_fcs(p: &PublicationRecord, baselines: &BaselineTable) -> Result<f64> {
    if p.field_ids.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "publication `{}` lists no field",
            p.pub_id
        )));
    }
    let mut sum = 0.0;
    for f in &p.field_ids {
        sum += baselines.field(f, p.year)?;
    }
    Ok(sum / p.field_ids.len() as f64)
}

/// Mean field citation score, one term per publication.
pub fn fcsm(pubs: &[PublicationRecord], baselines: &BaselineTable) -> Result<f64> {
    check(pubs)?;
    let mut sum = 0.0;
    for p in pubs {
        sum += publication_fcs(p, baselines)?;
    }
    Ok(sum / pubs.len() as f64)
}

pub fn pnc(pubs: &[PublicationRecord], rule: UncitedRule) -> Result<f64> {
    check(pubs)?;
    let uncited = pubs.iter().filter(|p| rule.is_uncited(p)).count();
    Ok(100.0 * uncited as f64 / pubs.len() as f64)
}

pub fn normalized_indicators(
    team_id: &str,
    pubs: &[PublicationRecord],
    baselines: &BaselineTable,
    rule: UncitedRule,
) -> Result<TeamBibIndicators> {
    let counts = team_cpp(pubs)?;
    let jcsm = jcsm(pubs, baselines)?;
    let fcsm = fcsm(pubs, baselines)?;
    if jcsm == 0.0 {
        return Err(Error::UndefinedRatio("JCSm"));
    }
    if fcsm == 0.0 {
        return Err(Error::UndefinedRatio("FCSm"));
    }
    Ok(TeamBibIndicators {
        team_id: team_id.to_string(),
        publications: counts.publications,
        citations: counts.citations,
        cpp: counts.cpp,
        jcsm,
        fcsm,
        cpp_jcsm: counts.cpp / jcsm,
        cpp_fcsm: counts.cpp / fcsm,
        jcsm_fcsm: jcsm / fcsm,
        pnc: pnc(pubs, rule)?,
        uncited_rule: rule,
    })
}

/// Indicators for every team that has at least one publication, in the
/// order of `teams`. Publications shared by teams count for each.
pub fn indicators_by_team(
    teams: &[String],
    pubs: &[PublicationRecord],
    baselines: &BaselineTable,
    rule: UncitedRule,
) -> Result<Vec<TeamBibIndicators>> {
    let mut out = Vec::new();
    for team in teams {
        let own: Vec<PublicationRecord> = pubs
            .iter()
            .filter(|p| p.team_ids.iter().any(|t| t == team))
            .cloned()
            .collect();
        if own.is_empty() {
            continue;
        }
        out.push(normalized_indicators(team, &own, baselines, rule)?);
    }
    Ok(out)
}
