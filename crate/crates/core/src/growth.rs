//! Empirical vocabulary growth: per-year `(L, N)` points, function-word
//! shares, and Heaps exponents fitted over sliding year windows.

use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::fit::{fit_powerlaw_ls, FitError, PowerLawFit};
use crate::ingest::{normalize_token, FilterConfig, FrequencyTable};

#[derive(Debug, Error, PartialEq)]
pub enum GrowthError {
    #[error("no data in the requested year range")]
    EmptyRange,
    #[error("frequency table is empty")]
    EmptyTable,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid growth curve: {0}")]
    InvalidCurve(String),
    #[error("function word list line {line}: {token:?} is rejected by the token filter")]
    InvalidFunctionWord { line: usize, token: String },
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// One year of the empirical Heaps scatter: `tokens` is L, `types` is N.
///
/// Stored as reals so that synthetic and modelled curves share the type;
/// corpus counts below 2^53 are represented exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthPoint {
    pub year: i32,
    pub tokens: f64,
    pub types: f64,
}

/// Points ordered by strictly increasing year, with `tokens >= types >= 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GrowthCurve {
    points: Vec<GrowthPoint>,
}

impl GrowthCurve {
    /// Sorts the points by year and validates them.
    pub fn new(mut points: Vec<GrowthPoint>) -> Result<Self, GrowthError> {
        points.sort_by_key(|p| p.year);
        if let Some(w) = points.windows(2).find(|w| w[0].year == w[1].year) {
            return Err(GrowthError::InvalidCurve(format!(
                "duplicate year {}",
                w[0].year
            )));
        }
        if let Some(p) = points
            .iter()
            .find(|p| !(p.types >= 0.0 && p.types <= p.tokens && p.tokens.is_finite()))
        {
            return Err(GrowthError::InvalidCurve(format!(
                "year {}: need L >= N >= 0, got L = {} and N = {}",
                p.year, p.tokens, p.types
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[GrowthPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn year_span(&self) -> Option<(i32, i32)> {
        Some((self.points.first()?.year, self.points.last()?.year))
    }

    /// `(L, N)` pairs as reals, for fitting.
    pub fn xy(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.tokens, p.types)).collect()
    }

    fn in_years(&self, lo: i32, hi: i32) -> &[GrowthPoint] {
        let start = self.points.partition_point(|p| p.year < lo);
        let end = self.points.partition_point(|p| p.year <= hi);
        &self.points[start..end.max(start)]
    }
}

/// Builds the empirical growth curve: one independent `(L, N)` point per year
/// within the inclusive `years` range (all years when `None`).
pub fn growth_points<'a, I>(
    tables: I,
    years: Option<(i32, i32)>,
) -> Result<GrowthCurve, GrowthError>
where
    I: IntoIterator<Item = &'a FrequencyTable>,
{
    let points: Vec<GrowthPoint> = tables
        .into_iter()
        .filter(|t| years.is_none_or(|(lo, hi)| (lo..=hi).contains(&t.year())))
        .map(|t| GrowthPoint {
            year: t.year(),
            tokens: t.total_tokens() as f64,
            types: t.distinct() as f64,
        })
        .collect();
    if points.is_empty() {
        return Err(GrowthError::EmptyRange);
    }
    GrowthCurve::new(points)
}

/// Normalized set of function words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FunctionWordList {
    words: HashSet<String>,
}

impl FunctionWordList {
    /// Parses one token per line; blank lines and `#` comments are skipped.
    /// Every token is normalized with `cfg`; a token the filter rejects is an
    /// error.
    pub fn parse(text: &str, cfg: &FilterConfig) -> Result<Self, GrowthError> {
        let mut words = HashSet::new();
        for (idx, line) in text.lines().enumerate() {
            let token = line.trim();
            if token.is_empty() || token.starts_with('#') {
                continue;
            }
            let normalized =
                normalize_token(token, cfg).ok_or_else(|| GrowthError::InvalidFunctionWord {
                    line: idx + 1,
                    token: token.to_owned(),
                })?;
            words.insert(normalized);
        }
        Ok(Self { words })
    }

    pub fn from_words<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        Self {
            words: words.into_iter().map(Into::into).collect(),
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// Fraction of the year's tokens that are function words.
pub fn function_word_share(
    table: &FrequencyTable,
    fw: &FunctionWordList,
) -> Result<f64, GrowthError> {
    if table.is_empty() {
        return Err(GrowthError::EmptyTable);
    }
    let fw_tokens: u64 = fw.iter().map(|w| table.count(w)).sum();
    Ok(fw_tokens as f64 / table.total_tokens() as f64)
}

/// Content share ζ = 1 − function-word share.
pub fn content_share(table: &FrequencyTable, fw: &FunctionWordList) -> Result<f64, GrowthError> {
    Ok(1.0 - function_word_share(table, fw)?)
}

/// Sub-curve of years within `[center − half_width, center + half_width]`.
pub fn window_extract(
    curve: &GrowthCurve,
    center_year: i32,
    half_width: u32,
) -> Result<GrowthCurve, GrowthError> {
    let half = half_width as i32;
    let points = curve.in_years(center_year - half, center_year + half);
    if points.is_empty() {
        return Err(GrowthError::EmptyRange);
    }
    Ok(GrowthCurve {
        points: points.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeapsPoint {
    pub center_year: i32,
    pub k: f64,
    pub fit: PowerLawFit,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeapsSeries {
    pub points: Vec<HeapsPoint>,
    /// Center years of windows skipped for having fewer than
    /// [`MIN_WINDOW_POINTS`] points.
    pub skipped: Vec<i32>,
}

pub const MIN_WINDOW_POINTS: usize = 3;
pub const DEFAULT_WINDOW_YEARS: u32 = 51;

/// Fits `N ~ L^k` over every full window of `window_years` consecutive years.
///
/// A window starting at year `s` covers `s ..= s + window_years − 1` and is
/// labelled with center year `s + (window_years − 1) / 2`, which is exact for
/// odd widths. Windows must lie entirely inside the curve's year span; edge
/// windows that would extend past either end are dropped. Window starts
/// advance by `step` years from the first year of the curve. Windows with
/// fewer than three points (possible when years are missing) are skipped and
/// listed in [`HeapsSeries::skipped`].
pub fn sliding_heaps(
    curve: &GrowthCurve,
    window_years: u32,
    step: u32,
) -> Result<HeapsSeries, GrowthError> {
    if window_years == 0 || step == 0 {
        return Err(GrowthError::InsufficientData(
            "window width and step must be positive".into(),
        ));
    }
    let (first, last) = curve.year_span().ok_or(GrowthError::EmptyRange)?;
    let width = window_years as i32;
    let starts: Vec<i32> = (first..=last - width + 1).step_by(step as usize).collect();

    let fitted: Vec<(i32, Option<Result<PowerLawFit, FitError>>)> = starts
        .par_iter()
        .map(|&start| {
            let center = start + (width - 1) / 2;
            let points = curve.in_years(start, start + width - 1);
            if points.len() < MIN_WINDOW_POINTS {
                return (center, None);
            }
            let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.tokens, p.types)).collect();
            (center, Some(fit_powerlaw_ls(&xy, None)))
        })
        .collect();

    let mut series = HeapsSeries::default();
    for (center_year, fit) in fitted {
        match fit {
            None => series.skipped.push(center_year),
            Some(fit) => {
                let fit = fit?;
                if fit.exponent.is_finite() {
                    series.points.push(HeapsPoint {
                        center_year,
                        k: fit.exponent,
                        fit,
                    });
                } else {
                    series.skipped.push(center_year);
                }
            }
        }
    }
    if series.points.is_empty() {
        return Err(GrowthError::InsufficientData(format!(
            "no {window_years}-year window between {first} and {last} holds {MIN_WINDOW_POINTS} points"
        )));
    }
    Ok(series)
}
