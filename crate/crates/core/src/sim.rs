//! Monte Carlo model of how experts turn opinions into ratings.
//!
//! Every assigned expert forms an opinion `quality + noise` about a team on
//! an indicator and reports `clamp(round(offset + gain * opinion))`, where
//! `offset` and `gain` are that expert's rating habit for the indicator.
//! Experts may all rate every team (a panel), each team may get its own
//! experts, or experts may cover a random subset of teams.
//!
//! Randomness is organised so that results never depend on evaluation
//! order or thread count: a noise draw exists for every (team, expert,
//! indicator) cell whether or not the cell is assigned, and every trial of
//! an experiment draws from its own substream of the master seed.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate_evaluation, Scheme};
use crate::agreement::{classify_agreement, inter_indicator_correlations, AgreementClass};
use crate::error::{Error, Result};
use crate::model::{Indicator, IndicatorKind, RatingMatrix, RatingScale, StatConfig};
use crate::stats;

const NOISE_STREAM: u64 = 0;
const COVERAGE_STREAM: u64 = 1;
const SCENARIO_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Habit {
    pub offset: f64,
    pub gain: f64,
}

impl Habit {
    pub const IDENTITY: Habit = Habit {
        offset: 0.0,
        gain: 1.0,
    };
}

/// Habits per (expert, indicator), plus the shared rounding and clamping
/// behaviour.
#[derive(Debug, Clone, PartialEq)]
pub struct HabitProfile {
    habits: Vec<Vec<Habit>>,
    pub round: bool,
    pub clamp: bool,
}

impl HabitProfile {
    pub fn new(habits: Vec<Vec<Habit>>, round: bool, clamp: bool) -> Result<Self> {
        if let Some(h) = habits
            .iter()
            .flatten()
            .find(|h| !(h.gain > 0.0) || !h.offset.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "habit gains must be positive and offsets finite, got gain {} offset {}",
                h.gain, h.offset
            )));
        }
        Ok(Self {
            habits,
            round,
            clamp,
        })
    }

    pub fn identity(experts: usize, indicators: usize) -> Self {
        Self {
            habits: vec![vec![Habit::IDENTITY; indicators]; experts],
            round: true,
            clamp: true,
        }
    }

    pub fn get(&self, expert: usize, indicator: usize) -> Habit {
        self.habits[expert][indicator]
    }

    pub fn apply(&self, expert: usize, indicator: usize, opinion: f64, scale: &RatingScale) -> f64 {
        let h = self.get(expert, indicator);
        let mut v = h.offset + h.gain * opinion;
        if self.round {
            // f64::round rounds half away from zero.
            v = scale.min() + ((v - scale.min()) / scale.step()).round() * scale.step();
        }
        if self.clamp {
            v = v.clamp(scale.min(), scale.max());
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    /// Every expert rates every team.
    FullPanel,
    /// Each team is rated by its own disjoint set of experts.
    DistinctPerTeam,
    /// Each expert rates each team with the given probability.
    PartialPanel { coverage: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub teams: usize,
    pub experts: usize,
    pub indicators: Vec<Indicator>,
    pub scale: RatingScale,
    /// Latent quality per `[team][indicator]`.
    pub quality: Vec<Vec<f64>>,
    pub noise_sd: f64,
    pub habits: HabitProfile,
    pub assignment: Assignment,
    pub seed: u64,
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.to_string().len().max(2);
    (1..=n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.teams == 0 || self.experts == 0 || self.indicators.is_empty() {
            return bad("simulation needs at least one team, expert and indicator".into());
        }
        if self.quality.len() != self.teams
            || self
                .quality
                .iter()
                .any(|q| q.len() != self.indicators.len())
        {
            return bad("quality must hold one value per (team, indicator)".into());
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad(format!(
                "noise sd must be finite and non-negative, got {}",
                self.noise_sd
            ));
        }
        if self.habits.habits.len() != self.experts
            || self
                .habits
                .habits
                .iter()
                .any(|h| h.len() != self.indicators.len())
        {
            return bad("habits must hold one entry per (expert, indicator)".into());
        }
        match self.assignment {
            Assignment::DistinctPerTeam if self.experts < self.teams => bad(format!(
                "distinct experts per team need at least as many experts ({}) as teams ({})",
                self.experts, self.teams
            )),
            Assignment::PartialPanel { coverage } if !(coverage > 0.0 && coverage <= 1.0) => {
                bad(format!("coverage must lie in (0, 1], got {coverage}"))
            }
            _ => Ok(()),
        }
    }

    pub fn team_ids(&self) -> Vec<String> {
        ids("T", self.teams)
    }

    pub fn expert_ids(&self) -> Vec<String> {
        ids("E", self.experts)
    }

    /// Which experts rate which teams, as `[team][expert]`.
    pub fn assignment_mask(&self) -> Vec<Vec<bool>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(COVERAGE_STREAM);
        (0..self.teams)
            .map(|t| {
                (0..self.experts)
                    .map(|e| {
                        let u: f64 = rng.random();
                        match self.assignment {
                            Assignment::FullPanel => true,
                            Assignment::DistinctPerTeam => e % self.teams == t,
                            Assignment::PartialPanel { coverage } => u < coverage,
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn with_assignment(&self, assignment: Assignment) -> Self {
        Self {
            assignment,
            ..self.clone()
        }
    }
}

/// Draws one rating matrix from the model.
pub fn simulate_evaluation(config: &SimConfig) -> Result<RatingMatrix> {
    config.validate()?;
    let teams = config.team_ids();
    let experts = config.expert_ids();
    let mask = config.assignment_mask();
    let mut matrix = RatingMatrix::new(
        format!("sim-{}", config.seed),
        "simulated",
        config.scale.clone(),
        teams.clone(),
        experts.clone(),
        config.indicators.clone(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(NOISE_STREAM);
    for t in 0..config.teams {
        for e in 0..config.experts {
            for (i, ind) in config.indicators.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                if !mask[t][e] || !ind.is_performance() {
                    continue;
                }
                let opinion = config.quality[t][i] + config.noise_sd * z;
                let rating = config.habits.apply(e, i, opinion, &config.scale);
                matrix.set_score(&experts[e], &teams[t], &ind.id, rating);
            }
        }
    }
    Ok(matrix)
}

/// Decorrelated per-trial seed derived from a master seed.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    // SplitMix64 finalizer over the pair.
    let mut z = master ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub min: f64,
    pub max: f64,
}

impl Default for ScaleSpec {
    fn default() -> Self {
        Self {
            min: 1.0,
            max: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSpec {
    pub id: String,
    #[serde(default = "default_kind")]
    pub kind: IndicatorKind,
    #[serde(default)]
    pub group: Option<String>,
}

fn default_kind() -> IndicatorKind {
    IndicatorKind::Global
}

/// Latent quality: `base + team_sd * z_team + indicator_sd * z_team_indicator`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualitySpec {
    pub base: f64,
    #[serde(default)]
    pub team_sd: f64,
    #[serde(default)]
    pub indicator_sd: f64,
}

/// Habit ranges; offsets and gains are drawn uniformly per (expert, indicator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HabitSpec {
    #[serde(default = "zero_range")]
    pub offset: [f64; 2],
    #[serde(default = "unit_range")]
    pub gain: [f64; 2],
    /// Draw one habit per indicator and give it to every expert.
    #[serde(default)]
    pub shared: bool,
}

fn zero_range() -> [f64; 2] {
    [0.0, 0.0]
}

fn unit_range() -> [f64; 2] {
    [1.0, 1.0]
}

impl Default for HabitSpec {
    fn default() -> Self {
        Self {
            offset: zero_range(),
            gain: unit_range(),
            shared: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    #[serde(default = "yes")]
    pub round: bool,
    #[serde(default = "yes")]
    pub clamp: bool,
}

fn yes() -> bool {
    true
}

impl Default for TransformSpec {
    fn default() -> Self {
        Self {
            round: true,
            clamp: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSpec {
    /// One simulated rating matrix.
    Single,
    PanelVsDistinct {
        #[serde(default = "default_trials")]
        trials: u64,
    },
    AgreementSweep {
        sigmas: Vec<f64>,
        #[serde(default = "default_trials")]
        trials: u64,
    },
}

fn default_trials() -> u64 {
    500
}

/// Declarative description of a simulated evaluation and, optionally, the
/// experiment to run on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub teams: usize,
    pub experts: usize,
    #[serde(default)]
    pub scale: ScaleSpec,
    pub indicators: Vec<IndicatorSpec>,
    pub quality: QualitySpec,
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default)]
    pub habits: HabitSpec,
    #[serde(default)]
    pub transform: TransformSpec,
    #[serde(default = "default_assignment")]
    pub assignment: Assignment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub experiment: Option<ExperimentSpec>,
}

fn default_assignment() -> Assignment {
    Assignment::FullPanel
}

fn uniform(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    let u: f64 = rng.random();
    range[0] + (range[1] - range[0]) * u
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("invalid scenario: {e}")))
    }

    pub fn indicators(&self) -> Vec<Indicator> {
        self.indicators
            .iter()
            .map(|s| Indicator {
                id: s.id.clone(),
                label: s.id.clone(),
                kind: s.kind,
                group: s.group.clone(),
            })
            .collect()
    }

    /// Draws the latent qualities and habits of one trial.
    pub fn materialize(&self, trial: u64) -> Result<SimConfig> {
        let scale = RatingScale::numeric(self.scale.min, self.scale.max)?;
        for r in [self.habits.offset, self.habits.gain] {
            if !(r[0] <= r[1]) {
                return Err(Error::InvalidArgument(format!(
                    "habit range {r:?} is reversed"
                )));
            }
        }
        let seed = trial_seed(self.seed, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(SCENARIO_STREAM);
        let k = self.indicators.len();
        let quality = (0..self.teams)
            .map(|_| {
                let zt: f64 = rng.sample(StandardNormal);
                (0..k)
                    .map(|_| {
                        let zi: f64 = rng.sample(StandardNormal);
                        self.quality.base
                            + self.quality.team_sd * zt
                            + self.quality.indicator_sd * zi
                    })
                    .collect()
            })
            .collect();
        let shared: Vec<Habit> = (0..k)
            .map(|_| Habit {
                offset: uniform(&mut rng, self.habits.offset),
                gain: uniform(&mut rng, self.habits.gain),
            })
            .collect();
        let habits = (0..self.experts)
            .map(|_| {
                (0..k)
                    .map(|i| {
                        let own = Habit {
                            offset: uniform(&mut rng, self.habits.offset),
                            gain: uniform(&mut rng, self.habits.gain),
                        };
                        if self.habits.shared {
                            shared[i]
                        } else {
                            own
                        }
                    })
                    .collect()
            })
            .collect();
        let config = SimConfig {
            teams: self.teams,
            experts: self.experts,
            indicators: self.indicators(),
            scale,
            quality,
            noise_sd: self.noise_sd,
            habits: HabitProfile::new(habits, self.transform.round, self.transform.clamp)?,
            assignment: self.assignment,
            seed,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Mean inter-indicator correlation over expected-correlated pairs of the
/// plain-aggregated scores, and the number of such pairs left undefined.
fn expected_pair_mean_r(matrix: &RatingMatrix, stat: &StatConfig) -> Result<(Option<f64>, usize)> {
    let scores = aggregate_evaluation(matrix, Scheme::Plain)?;
    let m = inter_indicator_correlations(&scores, stat)?;
    let mut rs = Vec::new();
    let mut undefined = 0;
    for (i, j) in m.pairs() {
        if m.groups[i].is_none() || m.groups[i] != m.groups[j] {
            continue;
        }
        match m.cells[i][j].r() {
            Some(r) => rs.push(r),
            None => undefined += 1,
        }
    }
    Ok((stats::mean(&rs), undefined))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTrial {
    pub trial: u64,
    pub panel_mean_r: Option<f64>,
    pub distinct_mean_r: Option<f64>,
    pub panel_undefined: usize,
    pub distinct_undefined: usize,
}

impl PairedTrial {
    /// True when the panel's mean correlation is defined and strictly higher.
    pub fn panel_wins(&self) -> bool {
        match (self.panel_mean_r, self.distinct_mean_r) {
            (Some(p), Some(d)) => p > d,
            (Some(_), None) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

fn mean_se(values: &[f64]) -> Option<MeanSe> {
    let mean = stats::mean(values)?;
    let se = stats::sample_sd(values).map_or(0.0, |sd| sd / (values.len() as f64).sqrt());
    Some(MeanSe {
        mean,
        se,
        count: values.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelVsDistinctSummary {
    pub trials: Vec<PairedTrial>,
    pub panel: Option<MeanSe>,
    pub distinct: Option<MeanSe>,
    /// Paired differences panel minus distinct, over trials where both are defined.
    pub difference: Option<MeanSe>,
    pub panel_wins: usize,
    pub panel_undefined_pairs: usize,
    pub distinct_undefined_pairs: usize,
}

impl PanelVsDistinctSummary {
    pub fn panel_win_fraction(&self) -> f64 {
        if self.trials.is_empty() {
            0.0
        } else {
            self.panel_wins as f64 / self.trials.len() as f64
        }
    }
}

fn check_expected_groups(scenario: &Scenario) -> Result<()> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for ind in scenario.indicators() {
        if let Some(g) = ind.expected_group() {
            *counts.entry(g).or_default() += 1;
        }
    }
    if counts.values().any(|&c| c >= 2) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "experiment needs at least two indicators sharing an expected-correlation group".into(),
        ))
    }
}

/// Runs paired simulations that differ only in the assignment: a full
/// panel against distinct experts per team.
pub fn experiment_panel_vs_distinct(
    scenario: &Scenario,
    trials: u64,
    stat: &StatConfig,
) -> Result<PanelVsDistinctSummary> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    check_expected_groups(scenario)?;
    let results: Vec<PairedTrial> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let config = scenario.materialize(trial)?;
            let panel = simulate_evaluation(&config.with_assignment(Assignment::FullPanel))?;
            let distinct =
                simulate_evaluation(&config.with_assignment(Assignment::DistinctPerTeam))?;
            let (panel_mean_r, panel_undefined) = expected_pair_mean_r(&panel, stat)?;
            let (distinct_mean_r, distinct_undefined) = expected_pair_mean_r(&distinct, stat)?;
            Ok(PairedTrial {
                trial,
                panel_mean_r,
                distinct_mean_r,
                panel_undefined,
                distinct_undefined,
            })
        })
        .collect::<Result<_>>()?;

    let panel: Vec<f64> = results.iter().filter_map(|t| t.panel_mean_r).collect();
    let distinct: Vec<f64> = results.iter().filter_map(|t| t.distinct_mean_r).collect();
    let diffs: Vec<f64> = results
        .iter()
        .filter_map(|t| Some(t.panel_mean_r? - t.distinct_mean_r?))
        .collect();
    Ok(PanelVsDistinctSummary {
        panel: mean_se(&panel),
        distinct: mean_se(&distinct),
        difference: mean_se(&diffs),
        panel_wins: results.iter().filter(|t| t.panel_wins()).count(),
        panel_undefined_pairs: results.iter().map(|t| t.panel_undefined).sum(),
        distinct_undefined_pairs: results.iter().map(|t| t.distinct_undefined).sum(),
        trials: results,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub sigma: f64,
    pub trials: usize,
    pub high: usize,
    pub intermediate: usize,
    pub low: usize,
    pub not_classifiable: usize,
}

impl SweepPoint {
    pub fn frequency(&self, class: AgreementClass) -> f64 {
        let n = match class {
            AgreementClass::High => self.high,
            AgreementClass::Intermediate => self.intermediate,
            AgreementClass::Low => self.low,
        };
        n as f64 / self.trials as f64
    }
}

/// Agreement classification frequencies of a full panel as opinion noise
/// grows. Each trial reuses its qualities, habits and noise draws across
/// the grid, so only `sigma` varies within a trial.
pub fn experiment_agreement_sweep(
    scenario: &Scenario,
    sigmas: &[f64],
    trials: u64,
    stat: &StatConfig,
) -> Result<Vec<SweepPoint>> {
    if scenario.assignment != Assignment::FullPanel {
        return Err(Error::InvalidArgument(
            "agreement sweep needs a full-panel scenario".into(),
        ));
    }
    if trials == 0 || sigmas.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep needs at least one trial and one sigma".into(),
        ));
    }
    if let Some(s) = sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument(format!("invalid sigma {s}")));
    }
    let per_trial: Vec<Vec<Option<AgreementClass>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let config = scenario.materialize(trial)?;
            sigmas
                .iter()
                .map(|&sigma| {
                    let matrix = simulate_evaluation(&SimConfig {
                        noise_sd: sigma,
                        ..config.clone()
                    })?;
                    match classify_agreement(&matrix, stat) {
                        Ok(r) => Ok(Some(r.classification)),
                        Err(Error::NotClassifiable(_)) => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    Ok(sigmas
        .iter()
        .enumerate()
        .map(|(k, &sigma)| {
            let mut p = SweepPoint {
                sigma,
                trials: per_trial.len(),
                high: 0,
                intermediate: 0,
                low: 0,
                not_classifiable: 0,
            };
            for outcome in per_trial.iter().map(|t| t[k]) {
                match outcome {
                    Some(AgreementClass::High) => p.high += 1,
                    Some(AgreementClass::Intermediate) => p.intermediate += 1,
                    Some(AgreementClass::Low) => p.low += 1,
                    None => p.not_classifiable += 1,
                }
            }
            p
        })
        .collect())
}
