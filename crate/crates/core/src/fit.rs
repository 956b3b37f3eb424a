//! Power-law fitting.
//!
//! Two estimators are provided:
//!
//! - [`fit_powerlaw_ls`]: ordinary least squares of `ln y` on `ln x`, used for
//!   vocabulary growth curves `N ~ L^k`.
//! - [`fit_zipf_mle`]: maximum likelihood for rank counts under a multinomial
//!   model `p_r ∝ r^-β`, restricted to a rank window `[r_lo, r_hi]` and
//!   conditioned on the number of tokens falling inside that window.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::FrequencyTable;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("insufficient points: {0}")]
    InsufficientPoints(String),
    #[error("non-positive value ({x}, {y}) cannot be log-transformed")]
    NonPositiveValue { x: f64, y: f64 },
    #[error("all x values are equal; slope is undefined")]
    DegenerateX,
    #[error("empty frequency table")]
    EmptyTable,
    #[error("invalid rank data: {0}")]
    InvalidRanks(String),
    #[error(
        "likelihood maximum lies on the search boundary (beta = {beta}, log-likelihood = {log_likelihood})"
    )]
    NoInteriorMaximum { beta: f64, log_likelihood: f64 },
    #[error("log-likelihood is not concave near beta = {beta}")]
    NotConcave { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitMethod {
    #[serde(rename = "LS_LOGLOG")]
    LsLogLog,
    #[serde(rename = "MLE_MULTINOMIAL")]
    MleMultinomial,
}

/// A fitted power law `y = exp(log_prefactor) · x^exponent`.
///
/// For Zipf fits the exponent is reported as a positive β for `p_r ∝ r^-β`,
/// and `exp(log_prefactor) · r^-β` reproduces relative frequencies
/// `count_r / total_tokens` inside the fitted rank range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub log_prefactor: f64,
    pub range: (f64, f64),
    pub method: FitMethod,
    /// Residual sum of squares (least squares) or final log-likelihood (MLE).
    pub diagnostic: f64,
    pub n_points: usize,
}

impl PowerLawFit {
    pub fn predict(&self, x: f64) -> f64 {
        match self.method {
            FitMethod::LsLogLog => (self.log_prefactor + self.exponent * x.ln()).exp(),
            FitMethod::MleMultinomial => (self.log_prefactor - self.exponent * x.ln()).exp(),
        }
    }
}

/// Flat, serializable summary of a [`PowerLawFit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub method: FitMethod,
    pub exponent: f64,
    pub log_prefactor: f64,
    pub prefactor: f64,
    pub range_lo: f64,
    pub range_hi: f64,
    pub n_points: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual_ss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log_likelihood: Option<f64>,
}

pub fn fit_report(fit: &PowerLawFit) -> FitReport {
    let (residual_ss, log_likelihood) = match fit.method {
        FitMethod::LsLogLog => (Some(fit.diagnostic), None),
        FitMethod::MleMultinomial => (None, Some(fit.diagnostic)),
    };
    FitReport {
        method: fit.method,
        exponent: fit.exponent,
        log_prefactor: fit.log_prefactor,
        prefactor: fit.log_prefactor.exp(),
        range_lo: fit.range.0,
        range_hi: fit.range.1,
        n_points: fit.n_points,
        residual_ss,
        log_likelihood,
    }
}

/// Least-squares fit of `ln y = intercept + slope · ln x`.
///
/// Points whose `x` lies outside the inclusive `x_range` are ignored before
/// any validation. At least two in-range points with distinct `x` are needed.
pub fn fit_powerlaw_ls(
    points: &[(f64, f64)],
    x_range: Option<(f64, f64)>,
) -> Result<PowerLawFit, FitError> {
    let in_range = |x: f64| x_range.is_none_or(|(lo, hi)| x >= lo && x <= hi);
    let mut logs = Vec::with_capacity(points.len());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points.iter().filter(|(x, _)| in_range(*x)) {
        if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(FitError::NonPositiveValue { x, y });
        }
        lo = lo.min(x);
        hi = hi.max(x);
        logs.push((x.ln(), y.ln()));
    }
    if logs.len() < 2 {
        return Err(FitError::InsufficientPoints(format!(
            "{} point(s) in range, need at least 2",
            logs.len()
        )));
    }
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxx, sxy) = logs.iter().fold((0.0, 0.0), |(sxx, sxy), &(lx, ly)| {
        let dx = lx - mean_x;
        (sxx + dx * dx, sxy + dx * (ly - mean_y))
    });
    if sxx == 0.0 {
        return Err(FitError::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss = logs
        .iter()
        .map(|&(lx, ly)| {
            let r = ly - (intercept + slope * lx);
            r * r
        })
        .sum();
    Ok(PowerLawFit {
        exponent: slope,
        log_prefactor: intercept,
        range: (lo, hi),
        method: FitMethod::LsLogLog,
        diagnostic: rss,
        n_points: logs.len(),
    })
}

/// Counts by frequency rank: `counts()[r - 1]` is the count of the word with
/// rank `r`. Counts are positive and non-increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankFrequency {
    counts: Vec<u64>,
    total_tokens: u64,
}

impl RankFrequency {
    /// Ranks a table by descending count, breaking ties by ascending byte
    /// order of the token.
    pub fn from_table(table: &FrequencyTable) -> Result<Self, FitError> {
        if table.is_empty() {
            return Err(FitError::EmptyTable);
        }
        let counts = table.sorted_entries().into_iter().map(|(_, c)| c).collect();
        Ok(Self {
            counts,
            total_tokens: table.total_tokens(),
        })
    }

    pub fn from_counts(counts: Vec<u64>) -> Result<Self, FitError> {
        if counts.is_empty() {
            return Err(FitError::EmptyTable);
        }
        if counts.contains(&0) {
            return Err(FitError::InvalidRanks("zero count".into()));
        }
        if counts.windows(2).any(|w| w[1] > w[0]) {
            return Err(FitError::InvalidRanks(
                "counts must be non-increasing in rank".into(),
            ));
        }
        let total_tokens = counts.iter().sum();
        Ok(Self {
            counts,
            total_tokens,
        })
    }

    /// Parses `rank<TAB>count` rows with ranks contiguous from 1. Blank lines
    /// and lines starting with `#` are ignored, as is a `rank\tcount` header.
    pub fn parse_tsv(text: &str) -> Result<Self, FitError> {
        let mut counts = Vec::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            if counts.is_empty() && line.starts_with("rank") {
                continue;
            }
            let bad = || FitError::InvalidRanks(format!("bad row {line:?}"));
            let (rank, count) = line.split_once(char::is_whitespace).ok_or_else(bad)?;
            let rank: usize = rank.trim().parse().map_err(|_| bad())?;
            let count: u64 = count.trim().parse().map_err(|_| bad())?;
            if rank != counts.len() + 1 {
                return Err(FitError::InvalidRanks(format!(
                    "expected rank {}, found {rank}",
                    counts.len() + 1
                )));
            }
            counts.push(count);
        }
        Self::from_counts(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn max_rank(&self) -> usize {
        self.counts.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn fit_zipf(&self, r_lo: usize, r_hi: usize) -> Result<PowerLawFit, FitError> {
        fit_zipf_counts(&self.counts, self.total_tokens, r_lo, r_hi)
    }
}

pub fn rank_table(table: &FrequencyTable) -> Result<RankFrequency, FitError> {
    RankFrequency::from_table(table)
}

pub const BETA_SEARCH_MIN: f64 = 0.05;
pub const BETA_SEARCH_MAX: f64 = 6.0;
pub const BETA_TOLERANCE: f64 = 1e-8;

/// Maximum-likelihood Zipf exponent over ranks `r_lo..=r_hi` of a rank table.
pub fn fit_zipf_mle(rf: &RankFrequency, r_lo: usize, r_hi: usize) -> Result<PowerLawFit, FitError> {
    rf.fit_zipf(r_lo, r_hi)
}

/// Maximum-likelihood Zipf exponent for raw per-rank counts.
///
/// `counts[r - 1]` is the count observed at rank `r`; zeros are allowed and
/// counts need not be sorted, so this also accepts counts indexed by a known
/// true rank (e.g. simulated draws). `total_tokens` only scales the reported
/// prefactor.
///
/// The objective is
///
/// ```text
/// ℓ(β) = Σ_{r=r_lo}^{r_hi} n_r · (−β ln r − ln H(β)),   H(β) = Σ_{r=r_lo}^{r_hi} r^−β
/// ```
///
/// maximized over `β ∈ [0.05, 6]`: golden-section search narrows the bracket,
/// then bisection on the sign of `ℓ'(β)` refines it to `1e-8`.
pub fn fit_zipf_counts(
    counts: &[u64],
    total_tokens: u64,
    r_lo: usize,
    r_hi: usize,
) -> Result<PowerLawFit, FitError> {
    if r_lo < 1 || r_hi <= r_lo {
        return Err(FitError::InsufficientPoints(format!(
            "rank range {r_lo}..{r_hi} needs 1 <= lo < hi"
        )));
    }
    if r_hi > counts.len() {
        return Err(FitError::InsufficientPoints(format!(
            "rank range ends at {r_hi} but only {} ranks exist",
            counts.len()
        )));
    }
    let objective = ZipfObjective::new(&counts[r_lo - 1..r_hi], r_lo);
    if objective.n_in == 0.0 {
        return Err(FitError::InsufficientPoints(
            "no tokens inside the rank range".into(),
        ));
    }

    let (mut lo, mut hi) = (BETA_SEARCH_MIN, BETA_SEARCH_MAX);
    if objective.derivative(lo) <= 0.0 {
        return Err(FitError::NoInteriorMaximum {
            beta: lo,
            log_likelihood: objective.log_likelihood(lo),
        });
    }
    if objective.derivative(hi) >= 0.0 {
        return Err(FitError::NoInteriorMaximum {
            beta: hi,
            log_likelihood: objective.log_likelihood(hi),
        });
    }

    // Golden-section on ℓ until the bracket is narrow.
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = objective.log_likelihood(x1);
    let mut f2 = objective.log_likelihood(x2);
    while hi - lo > 1e-3 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = objective.log_likelihood(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = objective.log_likelihood(x1);
        }
    }
    // For a concave objective the derivative changes sign inside the
    // bracket; otherwise fall back to the full search interval.
    if !(objective.derivative(lo) > 0.0 && objective.derivative(hi) < 0.0) {
        lo = BETA_SEARCH_MIN;
        hi = BETA_SEARCH_MAX;
    }
    while hi - lo > BETA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if objective.derivative(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);

    let h = 1e-4;
    if objective.derivative(beta + h) >= objective.derivative(beta - h) {
        return Err(FitError::NotConcave { beta });
    }

    let log_likelihood = objective.log_likelihood(beta);
    let in_share = objective.n_in / total_tokens.max(1) as f64;
    Ok(PowerLawFit {
        exponent: beta,
        log_prefactor: in_share.ln() - objective.ln_h(beta),
        range: (r_lo as f64, r_hi as f64),
        method: FitMethod::MleMultinomial,
        diagnostic: log_likelihood,
        n_points: r_hi - r_lo + 1,
    })
}

const CHUNK: usize = 4096;

struct ZipfObjective {
    /// `ln r − ln r_lo` for each rank in the window.
    shifted_ln_r: Vec<f64>,
    ln_r_lo: f64,
    n_in: f64,
    /// `Σ n_r ln r`
    weighted_ln_r: f64,
}

impl ZipfObjective {
    fn new(counts: &[u64], r_lo: usize) -> Self {
        let ln_r_lo = (r_lo as f64).ln();
        let shifted_ln_r: Vec<f64> = (r_lo..r_lo + counts.len())
            .map(|r| (r as f64).ln() - ln_r_lo)
            .collect();
        let counts: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let n_in = counts.iter().sum();
        let weighted_ln_r = counts
            .iter()
            .zip(&shifted_ln_r)
            .map(|(n, s)| n * (s + ln_r_lo))
            .sum();
        Self {
            shifted_ln_r,
            ln_r_lo,
            n_in,
            weighted_ln_r,
        }
    }

    /// `(Σ w_r, Σ w_r · s_r)` with `w_r = exp(−β s_r)`, `s_r = ln r − ln r_lo`.
    ///
    /// Chunk partial sums are combined sequentially, so the result does not
    /// depend on the thread pool.
    fn moments(&self, beta: f64) -> (f64, f64) {
        let partials: Vec<(f64, f64)> = self
            .shifted_ln_r
            .par_chunks(CHUNK)
            .map(|chunk| {
                chunk.iter().fold((0.0, 0.0), |(w, ws), &s| {
                    let weight = (-beta * s).exp();
                    (w + weight, ws + weight * s)
                })
            })
            .collect();
        partials
            .into_iter()
            .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d))
    }

    fn ln_h(&self, beta: f64) -> f64 {
        -beta * self.ln_r_lo + self.moments(beta).0.ln()
    }

    fn log_likelihood(&self, beta: f64) -> f64 {
        -beta * self.weighted_ln_r - self.n_in * self.ln_h(beta)
    }

    /// `ℓ'(β) = n_in · E_β[ln r] − Σ n_r ln r`
    fn derivative(&self, beta: f64) -> f64 {
        let (w, ws) = self.moments(beta);
        self.n_in * (ws / w + self.ln_r_lo) - self.weighted_ln_r
    }
}
