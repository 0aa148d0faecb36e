//! Inter-peer agreement and rating-habit diagnostics.
//!
//! Agreement is measured per indicator as the plain mean of the pairwise
//! correlations between experts over the teams both rated. An evaluation is
//! High when every indicator's averaged coefficient is significant, Low when
//! none is, Intermediate otherwise.
//!
//! Habit divergence shows up between indicators: when teams are rated by
//! disjoint experts, each expert's personal offset lands on a different
//! team, and aspects that should move together stop correlating.
//! [`habit_warnings`] flags expected-correlated pairs that fail to.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::aggregation::TeamScores;
use crate::error::{Error, Result};
use crate::model::{RatingMatrix, StatConfig};
use crate::stats::{self, CorrelationOutcome};

/// Minimum number of commonly rated teams for a pair of experts.
pub const MIN_COMMON_TEAMS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct PairCorrelation {
    pub expert_a: String,
    pub expert_b: String,
    pub common_teams: Vec<String>,
    pub outcome: CorrelationOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedPair {
    pub expert_a: String,
    pub expert_b: String,
    pub common_teams: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterPeerCorrelations {
    pub indicator: String,
    pub pairs: Vec<PairCorrelation>,
    /// Pairs with fewer than [`MIN_COMMON_TEAMS`] commonly rated teams.
    pub skipped: Vec<SkippedPair>,
}

impl InterPeerCorrelations {
    pub fn defined_rs(&self) -> Vec<f64> {
        self.pairs.iter().filter_map(|p| p.outcome.r()).collect()
    }
}

/// Correlations between every unordered pair of experts on one indicator,
/// each computed over the teams both experts rated.
pub fn inter_peer_correlations(
    matrix: &RatingMatrix,
    indicator: &str,
    config: &StatConfig,
) -> Result<InterPeerCorrelations> {
    if matrix.experts.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: matrix.experts.len(),
        });
    }
    if matrix.indicator(indicator).is_none() {
        return Err(Error::InvalidArgument(format!(
            "unknown indicator `{indicator}` in `{}`",
            matrix.evaluation_id
        )));
    }
    let by_expert: Vec<BTreeMap<&str, f64>> = matrix
        .experts
        .iter()
        .map(|e| matrix.expert_scores(e, indicator))
        .collect();

    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for i in 0..matrix.experts.len() {
        for j in (i + 1)..matrix.experts.len() {
            let (a, b) = (&by_expert[i], &by_expert[j]);
            let common: Vec<&str> = matrix
                .teams
                .iter()
                .map(String::as_str)
                .filter(|t| a.contains_key(t) && b.contains_key(t))
                .collect();
            if common.len() < MIN_COMMON_TEAMS {
                skipped.push(SkippedPair {
                    expert_a: matrix.experts[i].clone(),
                    expert_b: matrix.experts[j].clone(),
                    common_teams: common.len(),
                });
                continue;
            }
            let x: Vec<f64> = common.iter().map(|t| a[t]).collect();
            let y: Vec<f64> = common.iter().map(|t| b[t]).collect();
            pairs.push(PairCorrelation {
                expert_a: matrix.experts[i].clone(),
                expert_b: matrix.experts[j].clone(),
                common_teams: common.iter().map(|t| t.to_string()).collect(),
                outcome: stats::correlate(&x, &y, config)?,
            });
        }
    }
    Ok(InterPeerCorrelations {
        indicator: indicator.to_string(),
        pairs,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgreementClass {
    High,
    Intermediate,
    Low,
}

impl fmt::Display for AgreementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::High => "High",
            Self::Intermediate => "Intermediate",
            Self::Low => "Low",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorAgreement {
    pub correlations: InterPeerCorrelations,
    /// Mean of the defined pairwise coefficients.
    pub averaged_r: Option<f64>,
    /// Teams covered by the computed pairs; the sample size for the test.
    pub n: usize,
    pub p_value: Option<f64>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub evaluation_id: String,
    pub indicators: Vec<IndicatorAgreement>,
    pub classification: AgreementClass,
}

impl AgreementReport {
    /// How significance of averaged coefficients was assessed.
    pub const SIGNIFICANCE_BASIS: &'static str =
        "averaged pairwise r tested two-tailed at N = teams covered by the expert pairs";
}

/// Classifies inter-peer agreement of a panel evaluation.
pub fn classify_agreement(matrix: &RatingMatrix, config: &StatConfig) -> Result<AgreementReport> {
    if matrix.experts.len() < 2 {
        return Err(Error::NotClassifiable(matrix.evaluation_id.clone()));
    }
    let mut indicators = Vec::new();
    for ind in matrix.performance_indicators() {
        let correlations = inter_peer_correlations(matrix, &ind.id, config)?;
        if correlations.pairs.is_empty() {
            // Disjoint raters: opinion and habit cannot be told apart.
            return Err(Error::NotClassifiable(matrix.evaluation_id.clone()));
        }
        let covered: BTreeSet<&str> = correlations
            .pairs
            .iter()
            .filter(|p| p.outcome.defined().is_some())
            .flat_map(|p| p.common_teams.iter().map(String::as_str))
            .collect();
        let n = covered.len();
        let rs = correlations.defined_rs();
        let (averaged_r, p_value, significant) = if rs.is_empty() {
            (None, None, false)
        } else {
            let avg = stats::mean_over_values(&rs)?;
            let c = stats::correlation_result(avg, n, config)?;
            (Some(avg), Some(c.p_value), c.significant)
        };
        indicators.push(IndicatorAgreement {
            correlations,
            averaged_r,
            n,
            p_value,
            significant,
        });
    }
    if indicators.is_empty() {
        return Err(Error::NotClassifiable(matrix.evaluation_id.clone()));
    }
    let significant = indicators.iter().filter(|i| i.significant).count();
    let classification = if significant == indicators.len() {
        AgreementClass::High
    } else if significant == 0 {
        AgreementClass::Low
    } else {
        AgreementClass::Intermediate
    };
    Ok(AgreementReport {
        evaluation_id: matrix.evaluation_id.clone(),
        indicators,
        classification,
    })
}

/// Symmetric correlation matrix between indicators over team scores.
#[derive(Debug, Clone, PartialEq)]
pub struct InterIndicatorMatrix {
    pub evaluation_id: String,
    pub indicators: Vec<String>,
    /// Expected-correlation group per indicator, aligned with `indicators`.
    pub groups: Vec<Option<String>>,
    pub cells: Vec<Vec<CorrelationOutcome>>,
    pub alpha: f64,
}

impl InterIndicatorMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<&CorrelationOutcome> {
        let i = self.indicators.iter().position(|x| x == a)?;
        let j = self.indicators.iter().position(|x| x == b)?;
        Some(&self.cells[i][j])
    }

    /// Off-diagonal pairs `(i, j)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.indicators.len();
        (0..k).flat_map(move |i| ((i + 1)..k).map(move |j| (i, j)))
    }
}

fn paired_columns(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> (Vec<f64>, Vec<f64>) {
    a.iter()
        .filter_map(|(team, x)| b.get(team).map(|y| (*x, *y)))
        .unzip()
}

/// Correlates every pair of performance indicators over the teams that
/// carry both scores.
pub fn inter_indicator_correlations(
    scores: &TeamScores,
    config: &StatConfig,
) -> Result<InterIndicatorMatrix> {
    let indicators: Vec<_> = scores
        .indicators
        .iter()
        .filter(|i| i.is_performance())
        .collect();
    let columns: Vec<BTreeMap<String, f64>> =
        indicators.iter().map(|i| scores.column(&i.id)).collect();
    let teams_with_scores = columns.iter().filter(|c| c.len() >= 3).count();
    if teams_with_scores < 2 {
        return Err(Error::TooFewObservations {
            needed: 3,
            got: columns.iter().map(BTreeMap::len).max().unwrap_or(0),
        });
    }
    let k = indicators.len();
    let mut cells = vec![vec![CorrelationOutcome::Insufficient { n: 0 }; k]; k];
    for i in 0..k {
        for j in i..k {
            let (x, y) = paired_columns(&columns[i], &columns[j]);
            let outcome = stats::correlate(&x, &y, config)?;
            let outcome = match (i == j, outcome) {
                (true, CorrelationOutcome::Defined(mut c)) => {
                    c.r = 1.0;
                    c.p_value = 0.0;
                    c.significant = true;
                    CorrelationOutcome::Defined(c)
                }
                (_, o) => o,
            };
            cells[i][j] = outcome;
            cells[j][i] = outcome;
        }
    }
    Ok(InterIndicatorMatrix {
        evaluation_id: scores.evaluation_id.clone(),
        indicators: indicators.iter().map(|i| i.id.clone()).collect(),
        groups: indicators.iter().map(|i| i.expected_group()).collect(),
        cells,
        alpha: config.alpha(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarningReason {
    NotSignificant,
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HabitWarning {
    pub indicator_a: String,
    pub indicator_b: String,
    pub group: String,
    pub r: f64,
    pub n: usize,
    pub critical_r: f64,
    pub reason: WarningReason,
}

impl fmt::Display for HabitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let why = match self.reason {
            WarningReason::NotSignificant => "not significant",
            WarningReason::Negative => "negative",
        };
        write!(
            f,
            "{} vs {} (group `{}`): r = {:.2}, N = {}, critical r = {:.2} ({why})",
            self.indicator_a, self.indicator_b, self.group, self.r, self.n, self.critical_r
        )
    }
}

/// Flags expected-correlated indicator pairs whose correlation is
/// non-significant or negative. Pairs without a defined coefficient are
/// not flagged. `groups` overrides the matrix's own grouping when given.
pub fn habit_warnings(
    matrix: &InterIndicatorMatrix,
    groups: Option<&BTreeMap<String, String>>,
) -> Result<Vec<HabitWarning>> {
    let group_of = |i: usize| -> Option<String> {
        match groups {
            Some(g) => g.get(&matrix.indicators[i]).cloned(),
            None => matrix.groups[i].clone(),
        }
    };
    let mut warnings = Vec::new();
    for (i, j) in matrix.pairs() {
        let (Some(gi), Some(gj)) = (group_of(i), group_of(j)) else {
            continue;
        };
        if gi != gj {
            continue;
        }
        let Some(c) = matrix.cells[i][j].defined() else {
            continue;
        };
        let reason = if c.r < 0.0 {
            WarningReason::Negative
        } else if !c.significant {
            WarningReason::NotSignificant
        } else {
            continue;
        };
        warnings.push(HabitWarning {
            indicator_a: matrix.indicators[i].clone(),
            indicator_b: matrix.indicators[j].clone(),
            group: gi,
            r: c.r,
            n: c.n,
            critical_r: stats::critical_r(c.n, matrix.alpha)?,
            reason,
        });
    }
    Ok(warnings)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HabitReport {
    pub evaluation_id: String,
    pub matrix: InterIndicatorMatrix,
    pub warnings: Vec<HabitWarning>,
}

pub fn habit_report(scores: &TeamScores, config: &StatConfig) -> Result<HabitReport> {
    let matrix = inter_indicator_correlations(scores, config)?;
    let warnings = habit_warnings(&matrix, None)?;
    Ok(HabitReport {
        evaluation_id: scores.evaluation_id.clone(),
        matrix,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{aggregate_evaluation, Scheme};
    use crate::model::{Indicator, IndicatorKind, RatingScale};

    fn panel(scores: &[&[f64]], indicators: usize) -> RatingMatrix {
        // scores[expert][team], same ratings repeated on each indicator with a shift.
        let teams: Vec<String> = (0..scores[0].len()).map(|t| format!("t{t}")).collect();
        let experts: Vec<String> = (0..scores.len()).map(|e| format!("e{e}")).collect();
        let inds: Vec<Indicator> = (0..indicators)
            .map(|i| Indicator::new(format!("I{i}"), "", IndicatorKind::Global))
            .collect();
        let mut m = RatingMatrix::new(
            "ev",
            "d",
            RatingScale::one_to_ten(),
            teams.clone(),
            experts.clone(),
            inds,
        );
        for (e, row) in scores.iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                for i in 0..indicators {
                    m.set_score(&experts[e], &teams[t], &format!("I{i}"), *v);
                }
            }
        }
        m
    }

    #[test]
    fn duplicate_raters_correlate_perfectly() {
        let row: &[f64] = &[2.0, 5.0, 7.0, 4.0, 9.0];
        let m = panel(&[row, row], 1);
        let c = inter_peer_correlations(&m, "I0", &StatConfig::default()).unwrap();
        assert_eq!(c.pairs.len(), 1);
        assert!((c.pairs[0].outcome.r().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_experts_three_pairs() {
        let m = panel(&[&[1.0, 2.0, 3.0], &[2.0, 3.0, 1.0], &[3.0, 1.0, 2.0]], 1);
        let c = inter_peer_correlations(&m, "I0", &StatConfig::default()).unwrap();
        assert_eq!(c.pairs.len(), 3);
        assert!(c.skipped.is_empty());
    }

    #[test]
    fn pairwise_complete_subset() {
        let teams: Vec<String> = (1..=7).map(|t| format!("t{t}")).collect();
        let mut m = RatingMatrix::new(
            "ev",
            "d",
            RatingScale::one_to_ten(),
            teams,
            vec!["A".into(), "B".into()],
            vec![Indicator::new("I", "", IndicatorKind::Global)],
        );
        let a = [3.0, 8.0, 2.0, 6.0, 5.0];
        let b = [9.0, 1.0, 4.0, 7.0, 3.0];
        for t in 1..=5 {
            m.set_score("A", &format!("t{t}"), "I", a[t - 1]);
        }
        for t in 3..=7 {
            m.set_score("B", &format!("t{t}"), "I", b[t - 3]);
        }
        let c = inter_peer_correlations(&m, "I", &StatConfig::default()).unwrap();
        assert_eq!(c.pairs[0].common_teams, vec!["t3", "t4", "t5"]);
        // Oracle: the correlation of A's and B's scores on t3..t5 only.
        let expected = stats::pearson_r(&[2.0, 6.0, 5.0], &[9.0, 1.0, 4.0]).unwrap();
        assert_eq!(c.pairs[0].outcome.r().unwrap(), expected);
    }

    #[test]
    fn sparse_pairs_are_listed_as_skipped() {
        let teams: Vec<String> = (0..4).map(|t| format!("t{t}")).collect();
        let mut m = RatingMatrix::new(
            "ev",
            "d",
            RatingScale::one_to_ten(),
            teams,
            vec!["A".into(), "B".into()],
            vec![Indicator::new("I", "", IndicatorKind::Global)],
        );
        m.set_score("A", "t0", "I", 1.0);
        m.set_score("A", "t1", "I", 2.0);
        m.set_score("B", "t2", "I", 3.0);
        m.set_score("B", "t3", "I", 4.0);
        let c = inter_peer_correlations(&m, "I", &StatConfig::default()).unwrap();
        assert!(c.pairs.is_empty());
        assert_eq!(c.skipped[0].common_teams, 0);
        assert!(matches!(
            classify_agreement(&m, &StatConfig::default()),
            Err(Error::NotClassifiable(_))
        ));
        m.experts.pop();
        m.scores.retain(|c, _| c.expert == "A");
        assert!(matches!(
            classify_agreement(&m, &StatConfig::default()),
            Err(Error::NotClassifiable(_))
        ));
    }

    #[test]
    fn classification_branches() {
        let cfg = StatConfig::default();
        let base = [1.0, 3.0, 5.0, 7.0, 9.0, 2.0, 4.0, 6.0];
        let near: Vec<f64> = base.iter().map(|v| v + 0.5).collect();
        let m = panel(&[&base, &near, &base], 4);
        let r = classify_agreement(&m, &cfg).unwrap();
        assert_eq!(r.classification, AgreementClass::High);

        let scrambled = [9.0, 1.0, 6.0, 2.0, 4.0, 8.0, 5.0, 3.0];
        let other = [4.0, 6.0, 2.0, 9.0, 1.0, 5.0, 8.0, 3.0];
        let m = panel(&[&base, &scrambled, &other], 4);
        let r = classify_agreement(&m, &cfg).unwrap();
        assert!(r.indicators.iter().all(|i| !i.significant));
        assert_eq!(r.classification, AgreementClass::Low);

        // Two indicators agree, two do not.
        let mut m = panel(&[&base, &near, &base], 4);
        for (t, v) in scrambled.iter().enumerate() {
            for i in ["I2", "I3"] {
                m.set_score("e1", &format!("t{t}"), i, *v);
            }
        }
        for (t, v) in other.iter().enumerate() {
            for i in ["I2", "I3"] {
                m.set_score("e2", &format!("t{t}"), i, *v);
            }
        }
        let r = classify_agreement(&m, &cfg).unwrap();
        assert_eq!(r.indicators.iter().filter(|i| i.significant).count(), 2);
        assert_eq!(r.classification, AgreementClass::Intermediate);
    }

    fn scores_from_columns(cols: &[(&str, IndicatorKind, &[f64])]) -> TeamScores {
        let n = cols[0].2.len();
        let teams: Vec<String> = (0..n).map(|t| format!("t{t}")).collect();
        let inds = cols
            .iter()
            .map(|(id, k, _)| Indicator::new(*id, "", *k))
            .collect();
        let mut m = RatingMatrix::new(
            "ev",
            "d",
            RatingScale::one_to_ten(),
            teams.clone(),
            vec!["e".into()],
            inds,
        );
        for (id, _, vals) in cols {
            for (t, v) in vals.iter().enumerate() {
                m.set_score("e", &teams[t], id, *v);
            }
        }
        aggregate_evaluation(&m, Scheme::Plain).unwrap()
    }

    #[test]
    fn duplicated_column_has_unit_r_and_unit_diagonal() {
        let col: &[f64] = &[1.0, 4.0, 2.0, 8.0];
        let s = scores_from_columns(&[
            ("A", IndicatorKind::Global, col),
            ("B", IndicatorKind::Global, col),
        ]);
        let m = inter_indicator_correlations(&s, &StatConfig::default()).unwrap();
        assert!((m.get("A", "B").unwrap().r().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(m.get("A", "A").unwrap().r(), Some(1.0));
        assert!(habit_warnings(&m, None).unwrap().is_empty());
    }

    #[test]
    fn constant_column_is_undefined() {
        let s = scores_from_columns(&[
            ("A", IndicatorKind::Global, &[5.0, 5.0, 5.0, 5.0]),
            ("B", IndicatorKind::Global, &[1.0, 4.0, 2.0, 8.0]),
        ]);
        let m = inter_indicator_correlations(&s, &StatConfig::default()).unwrap();
        assert_eq!(
            m.get("A", "B"),
            Some(&CorrelationOutcome::Undefined { n: 4 })
        );
        assert_eq!(
            m.get("A", "A"),
            Some(&CorrelationOutcome::Undefined { n: 4 })
        );
        assert!(habit_warnings(&m, None).unwrap().is_empty());
    }

    #[test]
    fn low_expected_pair_warns() {
        // r is small at N = 5.
        let s = scores_from_columns(&[
            ("A", IndicatorKind::Global, &[1.0, 2.0, 3.0, 4.0, 5.0]),
            ("B", IndicatorKind::Global, &[3.0, 1.0, 4.0, 5.0, 2.0]),
        ]);
        let m = inter_indicator_correlations(&s, &StatConfig::default()).unwrap();
        let r = m.get("A", "B").unwrap().r().unwrap();
        assert!(r.abs() < 0.5, "{r}");
        let w = habit_warnings(&m, None).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].n, 5);
        assert!((w[0].critical_r - stats::critical_r(5, 0.05).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn partial_indicators_never_warn() {
        let s = scores_from_columns(&[
            ("a", IndicatorKind::Partial, &[1.0, 2.0, 3.0, 4.0, 5.0]),
            ("b", IndicatorKind::Partial, &[5.0, 4.0, 3.0, 2.0, 1.0]),
            ("c", IndicatorKind::Partial, &[3.0, 1.0, 4.0, 5.0, 2.0]),
        ]);
        let m = inter_indicator_correlations(&s, &StatConfig::default()).unwrap();
        assert!(habit_warnings(&m, None).unwrap().is_empty());
        let mut g = BTreeMap::new();
        g.insert("a".to_string(), "x".to_string());
        g.insert("b".to_string(), "x".to_string());
        let w = habit_warnings(&m, Some(&g)).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].reason, WarningReason::Negative);
    }

    #[test]
    fn categorical_and_expertise_are_excluded() {
        let s = scores_from_columns(&[
            ("A", IndicatorKind::Global, &[1.0, 2.0, 3.0]),
            ("B", IndicatorKind::Global, &[1.0, 3.0, 2.0]),
            ("3", IndicatorKind::Expertise, &[1.0, 3.0, 2.0]),
        ]);
        let m = inter_indicator_correlations(&s, &StatConfig::default()).unwrap();
        assert_eq!(m.indicators, vec!["A", "B"]);
    }

    #[test]
    fn too_few_teams_is_error() {
        let s = scores_from_columns(&[
            ("A", IndicatorKind::Global, &[1.0, 2.0]),
            ("B", IndicatorKind::Global, &[1.0, 3.0]),
        ]);
        assert!(inter_indicator_correlations(&s, &StatConfig::default()).is_err());
    }

    #[test]
    fn independent_columns_rarely_significant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let crit = stats::critical_r(10, 0.05).unwrap();
        assert!((crit - 0.632).abs() < 1e-3);
        let mut below = 0;
        let draws = 1000;
        for _ in 0..draws {
            let a: Vec<f64> = (0..10).map(|_| rng.random_range(1.0..10.0)).collect();
            let b: Vec<f64> = (0..10).map(|_| rng.random_range(1.0..10.0)).collect();
            let s = scores_from_columns(&[
                ("A", IndicatorKind::Global, &a),
                ("B", IndicatorKind::Global, &b),
            ]);
            let m = inter_indicator_correlations(&s, &StatConfig::default()).unwrap();
            if m.get("A", "B").unwrap().r().unwrap().abs() < crit {
                below += 1;
            }
        }
        assert!(below as f64 / draws as f64 >= 0.9, "{below}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn relabeling_preserves_classification(
                seed_scores in proptest::collection::vec(proptest::collection::vec(1u8..=10, 6), 3),
                rot in 0usize..6,
            ) {
                let rows: Vec<Vec<f64>> = seed_scores.iter().map(|r| r.iter().map(|v| *v as f64).collect()).collect();
                let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
                let m = panel(&refs, 2);
                let cfg = StatConfig::default();
                let base = classify_agreement(&m, &cfg);

                let mut relabeled = m.clone();
                relabeled.experts.reverse();
                relabeled.teams.rotate_left(rot);
                let again = classify_agreement(&relabeled, &cfg);
                match (base, again) {
                    (Ok(a), Ok(b)) => {
                        prop_assert_eq!(a.classification, b.classification);
                        for (x, y) in a.indicators.iter().zip(&b.indicators) {
                            match (x.averaged_r, y.averaged_r) {
                                (Some(p), Some(q)) => prop_assert!((p - q).abs() < 1e-12),
                                (p, q) => prop_assert_eq!(p, q),
                            }
                        }
                    }
                    (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
                }
            }
        }
    }
}
