//! Linear correlation and its two-tailed significance test.
//!
//! Significance of a sample correlation `r` over `n` teams uses Student's t
//! with `n - 2` degrees of freedom, `t = r * sqrt((n - 2) / (1 - r^2))`.
//! The two-tailed tail probability reduces to the regularized incomplete
//! beta function `I_{1 - r^2}((n - 2) / 2, 1 / 2)`, which is what
//! [`p_value`] evaluates.

use statrs::function::beta::checked_beta_reg;

use crate::error::{Error, Result};
use crate::model::StatConfig;

/// A defined correlation with its significance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    pub p_value: f64,
    pub significant: bool,
}

/// Outcome of correlating two pairwise-complete series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationOutcome {
    Defined(CorrelationResult),
    /// At least one series is constant.
    Undefined {
        n: usize,
    },
    /// Fewer than three paired observations.
    Insufficient {
        n: usize,
    },
}

impl CorrelationOutcome {
    pub fn n(&self) -> usize {
        match self {
            Self::Defined(c) => c.n,
            Self::Undefined { n } | Self::Insufficient { n } => *n,
        }
    }

    pub fn defined(&self) -> Option<&CorrelationResult> {
        match self {
            Self::Defined(c) => Some(c),
            _ => None,
        }
    }

    pub fn r(&self) -> Option<f64> {
        self.defined().map(|c| c.r)
    }

    pub fn is_significant(&self) -> bool {
        self.defined().is_some_and(|c| c.significant)
    }
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Standard deviation with the `n - 1` denominator.
pub fn sample_sd(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|v| *v == values[0])
}

/// Product-moment correlation of two equally long series.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: x.len(),
        });
    }
    if is_constant(x) || is_constant(y) {
        return Err(Error::UndefinedCorrelation);
    }
    let mx = mean(x).unwrap_or_default();
    let my = mean(y).unwrap_or_default();
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-tailed p-value of `r` over `n` observations.
pub fn p_value(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    if !(r.abs() <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "correlation coefficient {r} outside [-1, 1]"
        )));
    }
    let a = r.abs();
    if a == 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let x = (1.0 - a) * (1.0 + a);
    checked_beta_reg(df / 2.0, 0.5, x)
        .map(|p| p.clamp(0.0, 1.0))
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Smallest `|r|` that is significant at `alpha` with `n` observations.
pub fn critical_r(n: usize, alpha: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    // p_value is strictly decreasing in |r| on [0, 1].
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p_value(mid, n)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

pub fn is_significant(r: f64, n: usize, config: &StatConfig) -> Result<bool> {
    Ok(r.abs() >= critical_r(n, config.alpha())?)
}

/// Plain arithmetic mean of correlation coefficients.
pub fn mean_over_values(rs: &[f64]) -> Result<f64> {
    mean(rs).ok_or(Error::TooFewObservations { needed: 1, got: 0 })
}

/// Builds the result record for a known coefficient. `p <= alpha` is the
/// same test as `|r| >= critical_r(n, alpha)` without the root search.
pub fn correlation_result(r: f64, n: usize, config: &StatConfig) -> Result<CorrelationResult> {
    let p = p_value(r, n)?;
    Ok(CorrelationResult {
        r,
        n,
        p_value: p,
        significant: p <= config.alpha(),
    })
}

/// Correlates two paired series, mapping degenerate inputs to the
/// corresponding outcome instead of an error.
pub fn correlate(x: &[f64], y: &[f64], config: &StatConfig) -> Result<CorrelationOutcome> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Ok(CorrelationOutcome::Insufficient { n });
    }
    match pearson_r(x, y) {
        Ok(r) => Ok(CorrelationOutcome::Defined(correlation_result(
            r, n, config,
        )?)),
        Err(Error::UndefinedCorrelation) => Ok(CorrelationOutcome::Undefined { n }),
        Err(e) => Err(e),
    }
}
