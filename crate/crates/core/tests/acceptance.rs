//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use peerstat::bibliometrics::{normalized_indicators, UncitedRule};
use peerstat::comparison::{extension_split, frequency_distribution, BinSpec, Region};
use peerstat::io::load_bundle;
use peerstat::model::{BaselineTable, PublicationRecord, RatingScale, StatConfig};
use peerstat::pipeline::{self, ReportOptions};
use peerstat::sim::{
    experiment_agreement_sweep, experiment_panel_vs_distinct, simulate_evaluation, ExperimentSpec,
    Scenario,
};
use peerstat::stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:.2?}, limit {limit:?}")
    })
}

// ---------------------------------------------------------------- oracles

/// Pearson r through the all-pairs identity
/// r = sum_ij (xi-xj)(yi-yj) / sqrt(sum_ij (xi-xj)^2 * sum_ij (yi-yj)^2).
fn pairwise_r(x: &[f64], y: &[f64]) -> f64 {
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in 0..i {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    }
    sxy / (sxx * syy).sqrt()
}

/// Gamma((v+1)/2) / Gamma(v/2) by the two-step recurrence.
fn gamma_ratio(v: usize) -> f64 {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut r = if v % 2 == 1 {
        1.0 / sqrt_pi
    } else {
        sqrt_pi / 2.0
    };
    let mut k = if v % 2 == 1 { 1 } else { 2 };
    while k < v {
        r *= (k as f64 + 1.0) / k as f64;
        k += 2;
    }
    r
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, eps, 50)
}

/// Two-tailed p-value from the t density with n-2 degrees of freedom.
/// With t = sqrt(v) tan(theta) the density becomes proportional to
/// cos(theta)^(v-1), and theta = asin(|r|).
fn t_oracle_p(r: f64, n: usize) -> f64 {
    let v = n - 2;
    let c = gamma_ratio(v) / std::f64::consts::PI.sqrt();
    let theta = r.abs().asin();
    let f = move |t: f64| t.cos().powi(v as i32 - 1);
    2.0 * c * integrate(&f, theta, std::f64::consts::FRAC_PI_2, 1e-14)
}

fn oracle_critical_r(n: usize, alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if t_oracle_p(mid, n) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

// ---------------------------------------------------------------- criteria

fn statistics_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_r = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(3..=50);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| 0.4 * v + rng.random_range(-10.0..10.0))
            .collect();
        let got = stats::pearson_r(&x, &y).map_err(|e| e.to_string())?;
        worst_r = worst_r.max((got - pairwise_r(&x, &y)).abs());
    }
    ensure(worst_r <= 1e-12, || format!("pearson_r off by {worst_r:e}"))?;

    let mut worst_p = 0.0f64;
    for n in 3..=100 {
        for k in 0..=40 {
            let r = if k == 40 { 0.999 } else { k as f64 / 40.0 };
            for r in [r, -r] {
                let got = stats::p_value(r, n).map_err(|e| e.to_string())?;
                worst_p = worst_p.max((got - t_oracle_p(r, n)).abs());
            }
        }
    }
    ensure(worst_p <= 1e-8, || format!("p_value off by {worst_p:e}"))?;
    within_time(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "max |dr| {worst_r:.1e}, max |dp| {worst_p:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn significance_boundaries() -> Outcome {
    let cfg = StatConfig::new(0.05).map_err(|e| e.to_string())?;
    let sig = |r: f64, n: usize| stats::is_significant(r, n, &cfg).map_err(|e| e.to_string());
    let mut failures = Vec::new();
    for (r, n, expected) in [
        (0.98, 5, true),
        (-0.48, 5, false),
        (0.49, 46, true),
        (0.29, 46, true),
    ] {
        let got = sig(r, n)?;
        if got != expected {
            failures.push(format!(
                "(r={r}, N={n}) significant={got}, expected {expected} (p={:.4})",
                t_oracle_p(r, n)
            ));
        }
    }
    let crit = stats::critical_r(5, 0.05).map_err(|e| e.to_string())?;
    let oracle = oracle_critical_r(5, 0.05);
    if (crit - 0.8783).abs() > 1e-3 || (crit - oracle).abs() > 1e-3 {
        failures.push(format!("critical_r(5) = {crit:.5}, oracle {oracle:.5}"));
    }
    if failures.is_empty() {
        Ok(format!("critical_r(5, .05) = {crit:.4}"))
    } else {
        Err(failures.join("; "))
    }
}

fn publication(
    id: usize,
    journal: &str,
    fields: &[&str],
    year: i32,
    citations: u64,
    self_citations: u64,
) -> PublicationRecord {
    PublicationRecord {
        pub_id: format!("P{id}"),
        team_ids: vec!["T".into()],
        journal_id: journal.into(),
        field_ids: fields.iter().map(|f| f.to_string()).collect(),
        year,
        citations_total: citations,
        self_citations,
    }
}

fn bibliometric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut baselines = BaselineTable::default();
    let journals = ["J1", "J2", "J3", "J4", "J5"];
    let fields = ["F1", "F2", "F3"];
    for year in 2000..=2003 {
        for j in journals {
            baselines
                .insert_journal(j, year, rng.random_range(0.5..12.0))
                .map_err(|e| e.to_string())?;
        }
        for f in fields {
            baselines
                .insert_field(f, year, rng.random_range(0.5..12.0))
                .map_err(|e| e.to_string())?;
        }
    }
    let mut worst = 0.0f64;
    for team in 0..1000 {
        let n = rng.random_range(1..=30);
        let pubs: Vec<PublicationRecord> = (0..n)
            .map(|i| {
                let citations = if rng.random_bool(0.2) {
                    0
                } else {
                    rng.random_range(0..40)
                };
                let own = rng.random_range(0..=citations.min(3));
                let k = rng.random_range(1..=2);
                let fs: Vec<&str> = (0..k)
                    .map(|_| fields[rng.random_range(0..fields.len())])
                    .collect();
                let journal = journals[rng.random_range(0..journals.len())];
                publication(
                    i,
                    journal,
                    &fs,
                    rng.random_range(2000..=2003),
                    citations,
                    own,
                )
            })
            .collect();
        let t = normalized_indicators("T", &pubs, &baselines, UncitedRule::ExcludeSelfCitations)
            .map_err(|e| e.to_string())?;
        let rel =
            (t.cpp_jcsm * t.jcsm_fcsm - t.cpp_fcsm).abs() / t.cpp_fcsm.abs().max(f64::MIN_POSITIVE);
        if t.cpp_fcsm != 0.0 {
            worst = worst.max(rel);
        } else {
            ensure(t.cpp_jcsm == 0.0, || {
                format!("team {team}: CPP/FCSm is 0 but CPP/JCSm is not")
            })?;
        }
        let uncited = pubs
            .iter()
            .filter(|p| p.citations_total - p.self_citations == 0)
            .count();
        let brute = 100.0 * uncited as f64 / pubs.len() as f64;
        ensure(t.pnc == brute, || {
            format!("team {team}: PNC {} vs brute force {brute}", t.pnc)
        })?;
    }
    ensure(worst <= 1e-9, || {
        format!("ratio identity off by {worst:e} relative")
    })?;

    // Every publication cited exactly at its journal and field expectation.
    let mut flat = BaselineTable::default();
    let mut pubs = Vec::new();
    for (i, year) in (2000..=2003).enumerate() {
        let expected = (i + 2) as f64;
        flat.insert_journal("J", year, expected)
            .map_err(|e| e.to_string())?;
        flat.insert_field("F1", year, expected)
            .map_err(|e| e.to_string())?;
        flat.insert_field("F2", year, expected)
            .map_err(|e| e.to_string())?;
        pubs.push(publication(
            2 * i,
            "J",
            &["F1"],
            year,
            expected as u64 + 1,
            1,
        ));
        pubs.push(publication(
            2 * i + 1,
            "J",
            &["F1", "F2"],
            year,
            expected as u64,
            0,
        ));
    }
    let t = normalized_indicators("T", &pubs, &flat, UncitedRule::ExcludeSelfCitations)
        .map_err(|e| e.to_string())?;
    ensure(
        t.cpp_jcsm == 1.0 && t.cpp_fcsm == 1.0 && t.jcsm_fcsm == 1.0,
        || {
            format!(
                "fixture ratios {} {} {}",
                t.cpp_jcsm, t.cpp_fcsm, t.jcsm_fcsm
            )
        },
    )?;
    let brute = pubs
        .iter()
        .filter(|p| p.citations_total <= p.self_citations)
        .count() as f64;
    ensure(t.pnc == brute, || {
        format!("fixture PNC {} vs {brute}", t.pnc)
    })?;
    Ok(format!("max relative error {worst:.1e} over 1000 teams"))
}

fn scenario(name: &str) -> Result<Scenario, String> {
    let path = manifest_dir().join("data/scenarios").join(name);
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    Scenario::from_toml(&text).map_err(|e| e.to_string())
}

fn panel_vs_distinct() -> Outcome {
    let s = scenario("panel_vs_distinct.toml")?;
    ensure(
        s.teams == 8 && s.experts == 8 && s.indicators.len() == 4,
        || "scenario is not 8 teams, 8 experts, 4 indicators".into(),
    )?;
    ensure(
        s.habits.offset == [-2.0, 2.0] && s.habits.gain == [0.7, 1.3],
        || "scenario habits differ from offsets ±2, gains 0.7-1.3".into(),
    )?;
    let cfg = StatConfig::new(0.05).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let summary = experiment_panel_vs_distinct(&s, 500, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(summary.trials.len() == 500, || {
        format!("{} trials", summary.trials.len())
    })?;
    let fraction = summary.panel_win_fraction();
    ensure(fraction >= 0.95, || {
        format!("panel wins in {:.1}% of trials", 100.0 * fraction)
    })?;
    within_time(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "panel wins {}/500, {elapsed:.2?}",
        summary.panel_wins
    ))
}

fn agreement_sweep() -> Outcome {
    let s = scenario("agreement_sweep.toml")?;
    let Some(ExperimentSpec::AgreementSweep { sigmas, .. }) = s.experiment.clone() else {
        return Err("scenario has no agreement sweep".into());
    };
    ensure(sigmas.len() == 5 && sigmas[0] == 0.0, || {
        format!("grid {sigmas:?}")
    })?;
    ensure(
        s.habits.offset == [0.0, 0.0] && s.habits.gain == [1.0, 1.0],
        || "habits are not identity".into(),
    )?;
    let top = 10.0 * s.quality.team_sd;
    ensure((sigmas[4] - top).abs() < 1e-12, || {
        format!("last sigma {} is not 10 x {}", sigmas[4], s.quality.team_sd)
    })?;
    let cfg = StatConfig::new(0.05).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let points = experiment_agreement_sweep(&s, &sigmas, 500, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let high: Vec<usize> = points.iter().map(|p| p.high).collect();
    ensure(high.windows(2).all(|w| w[1] <= w[0]), || {
        format!("High counts not non-increasing: {high:?}")
    })?;
    ensure(points[0].high == points[0].trials, || {
        format!("High at sigma 0: {}/{}", points[0].high, points[0].trials)
    })?;
    let last = &points[4];
    let low = last.low as f64 / last.trials as f64;
    ensure(low >= 0.8, || {
        format!("Low at sigma {}: {:.1}%", last.sigma, 100.0 * low)
    })?;
    within_time(elapsed, Duration::from_secs(120))?;
    Ok(format!(
        "High {high:?}, Low at top {:.1}%, {elapsed:.2?}",
        100.0 * low
    ))
}

fn extension_recovery() -> Outcome {
    // Sixteen ordinary teams on an even grid, then the planted extremes.
    let base: Vec<f64> = (0..16).map(|i| -1.0 + 2.0 * i as f64 / 15.0).collect();
    let mean = base.iter().sum::<f64>() / 16.0;
    let sd = (base.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 15.0).sqrt();
    let mut points: Vec<(String, f64, f64)> = base
        .iter()
        .enumerate()
        .map(|(i, &v)| (format!("M{i:02}"), 5.0 + v, 1.0 + 0.2 * base[15 - i]))
        .collect();
    for k in 0..2 {
        points.push((format!("LOWX{k}"), 5.0 + mean - 3.0 * sd, 1.0 + 0.2 * mean));
        points.push((
            format!("HIGHY{k}"),
            5.0 + mean,
            1.0 + 0.2 * (mean + 3.0 * sd),
        ));
    }
    let split = extension_split("peer", "CPP/FCSm", &points).map_err(|e| e.to_string())?;
    let names = |r: Region| split.members(r).map(|p| p.team.clone()).collect::<Vec<_>>();
    ensure(names(Region::LowX) == ["LOWX0", "LOWX1"], || {
        format!("low-x {:?}", names(Region::LowX))
    })?;
    ensure(names(Region::HighY) == ["HIGHY0", "HIGHY1"], || {
        format!("high-y {:?}", names(Region::HighY))
    })?;
    ensure(names(Region::Both).is_empty(), || {
        format!("both {:?}", names(Region::Both))
    })?;

    let mut sums = Vec::new();
    let cfg = StatConfig::new(0.05).map_err(|e| e.to_string())?;
    let bundle =
        load_bundle(&manifest_dir().join("data/mini_bundle")).map_err(|e| e.to_string())?;
    let analysis =
        pipeline::analyze(&bundle, &ReportOptions::default(), &cfg).map_err(|e| e.to_string())?;
    sums.extend(
        analysis
            .distributions
            .iter()
            .map(|d| d.histogram.frequencies.iter().sum::<f64>()),
    );
    for name in [
        "single_panel.toml",
        "panel_vs_distinct.toml",
        "agreement_sweep.toml",
    ] {
        let m = simulate_evaluation(&scenario(name)?.materialize(0).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        for ind in &m.indicators {
            let values: Vec<f64> = m
                .scores
                .iter()
                .filter(|(c, _)| c.indicator == ind.id)
                .map(|(_, v)| *v)
                .collect();
            let h = frequency_distribution(&values, BinSpec::for_scale(&m.scale))
                .map_err(|e| e.to_string())?;
            sums.push(h.frequencies.iter().sum());
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.1).collect();
    let h = frequency_distribution(&xs, BinSpec::for_scale(&RatingScale::one_to_ten()))
        .map_err(|e| e.to_string())?;
    sums.push(h.frequencies.iter().sum());
    let worst = sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-12, || {
        format!("histogram frequencies off by {worst:e}")
    })?;
    Ok(format!(
        "planted teams recovered, {} histograms sum to 1",
        sums.len()
    ))
}

fn run_cli(args: &[&str], out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_peerstat"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || {
        format!(
            "peerstat {args:?} failed: {}",
            String::from_utf8_lossy(&status.stderr)
        )
    })
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let e = e.map_err(|e| e.to_string())?;
            let bytes = fs::read(e.path()).map_err(|e| e.to_string())?;
            Ok((e.file_name().to_string_lossy().into_owned(), bytes))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bundle = manifest_dir().join("data/mini_bundle");
    let scenarios = manifest_dir().join("data/scenarios");
    let runs: Vec<Vec<String>> = vec![
        vec![
            "--data".into(),
            bundle.display().to_string(),
            "report".into(),
        ],
        vec![
            "--data".into(),
            bundle.display().to_string(),
            "--format".into(),
            "csv".into(),
            "report".into(),
        ],
        vec![
            "simulate".into(),
            "--scenario".into(),
            scenarios.join("single_panel.toml").display().to_string(),
        ],
        vec![
            "simulate".into(),
            "--scenario".into(),
            scenarios
                .join("panel_vs_distinct.toml")
                .display()
                .to_string(),
            "--seed".into(),
            "99".into(),
        ],
        vec![
            "simulate".into(),
            "--scenario".into(),
            scenarios.join("agreement_sweep.toml").display().to_string(),
            "--trials".into(),
            "100".into(),
        ],
    ];
    let mut files = 0;
    for (i, args) in runs.iter().enumerate() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = tmp.path().join(format!("{i}-a"));
        let b = tmp.path().join(format!("{i}-b"));
        run_cli(&args, &a)?;
        run_cli(&args, &b)?;
        let (fa, fb) = (read_dir_sorted(&a)?, read_dir_sorted(&b)?);
        ensure(!fa.is_empty(), || format!("{args:?} wrote nothing"))?;
        ensure(fa == fb, || format!("{args:?} differs between runs"))?;
        files += fa.len();
    }
    Ok(format!(
        "{} invocations, {files} files byte-identical",
        runs.len()
    ))
}

/// Splits the habits section of a report into (evaluation, warned) pairs.
fn habit_verdicts(report: &str) -> Vec<(String, bool)> {
    let section = report
        .split("\n## ")
        .find(|s| s.starts_with("Correlations between peer review indicators"))
        .unwrap_or("");
    section
        .split("\n### ")
        .skip(1)
        .map(|block| {
            let name = block.lines().next().unwrap_or("").trim().to_string();
            (name, block.contains("Rating-habit warnings ("))
        })
        .collect()
}

fn golden_report() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bundle = manifest_dir().join("data/mini_bundle");
    run_cli(
        &["--data", &bundle.display().to_string(), "report"],
        tmp.path(),
    )?;
    let got = fs::read_to_string(tmp.path().join("report.md")).map_err(|e| e.to_string())?;
    let golden_path = manifest_dir().join("tests/golden/report.md");
    let golden =
        fs::read_to_string(&golden_path).map_err(|e| format!("{}: {e}", golden_path.display()))?;
    ensure(got == golden, || {
        "report differs from tests/golden/report.md".into()
    })?;

    let verdicts = habit_verdicts(&got);
    let manifest = load_bundle(&bundle).map_err(|e| e.to_string())?;
    let designs: Vec<(&str, &str)> = manifest
        .evaluations
        .iter()
        .map(|e| (e.meta.id.as_str(), e.meta.group.as_deref().unwrap_or("")))
        .collect();
    ensure(verdicts.len() == 3 && designs.len() == 3, || {
        format!("habit sections {verdicts:?}")
    })?;
    for ((id, group), (name, warned)) in designs.iter().zip(&verdicts) {
        ensure(id == name, || format!("section order {verdicts:?}"))?;
        let expect_warning = *group == "distinct";
        ensure(*warned == expect_warning, || {
            format!("{id} ({group}) warned={warned}, expected {expect_warning}")
        })?;
    }
    Ok("distinct-expert evaluation warned, panel evaluations clean".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 statistics oracle equivalence", statistics_oracle),
        ("2 significance boundaries", significance_boundaries),
        ("3 bibliometric identities", bibliometric_identities),
        ("4 panel versus distinct experts", panel_vs_distinct),
        ("5 agreement classification sweep", agreement_sweep),
        ("6 extension split and histograms", extension_recovery),
        ("7 end-to-end determinism", determinism),
        ("8 golden report with habit warnings", golden_report),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
