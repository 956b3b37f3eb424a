//! Expected vocabulary of a text of `L` tokens drawn independently from a
//! known word distribution.
//!
//! Word `i` with probability `p_i` appears at least once with probability
//! `1 − (1 − p_i)^L`, so summing these indicator expectations gives
//!
//! ```text
//! N(L) = Σ_i 1 − (1 − p_i)^L
//! ```
//!
//! With a function/content split, function words are assumed always present
//! and only the content fraction ζ of the text draws content words:
//!
//! ```text
//! N(L) = N_serv + Σ_{i∈I} 1 − (1 − p_i)^{ζL}
//! ```
//!
//! The local Heaps exponent `k(L) = d ln N / d ln L` is estimated by finite
//! differences on a geometric grid.

mod probability;

use rayon::prelude::*;
use thiserror::Error;

pub use probability::{zipf_probs, ProbabilityVector, MAX_WORDS};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid probability vector: {0}")]
    InvalidVector(String),
}

/// Below this value of `L·p` the hit probability is taken as `L·p`.
const SMALL_LP: f64 = 1e-12;

/// `1 − (1 − p)^L` without argument checks.
#[inline]
fn hit_term(p: f64, l: f64) -> f64 {
    if l == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let lp = l * p;
    if lp < SMALL_LP {
        lp
    } else {
        -(l * (-p).ln_1p()).exp_m1()
    }
}

/// Probability that a word of probability `p` occurs at least once among `l`
/// independent draws, evaluated as `−expm1(L · log1p(−p))`.
pub fn hit_probability(p: f64, l: f64) -> Result<f64, ModelError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(ModelError::Domain(format!(
            "probability {p} outside (0, 1]"
        )));
    }
    check_length(l)?;
    Ok(hit_term(p, l))
}

fn check_length(l: f64) -> Result<(), ModelError> {
    if l >= 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Domain(format!(
            "text length {l} must be finite and >= 0"
        )))
    }
}

/// Binary digits after the point in the fixed-point accumulator.
const FRAC_BITS: i32 = 84;
const FIXED_ONE: f64 = (1u128 << FRAC_BITS) as f64;

/// Truncates a term in `[0, 1]` onto the `2^-84` grid.
#[inline]
fn to_fixed(term: f64) -> u128 {
    // exact scaling by a power of two, then truncation toward zero
    (term * FIXED_ONE) as u128
}

#[inline]
fn from_fixed(sum: u128) -> f64 {
    sum as f64 / FIXED_ONE
}

/// Expected number of distinct words in a text of length `l`.
///
/// Each per-word term is truncated to a multiple of `2^-84` and the terms are
/// summed exactly as integers (absolute error below `W · 2^-84`). Integer
/// addition is associative, so the result is independent of summation order
/// and parallel splitting, and a group of `m` equal words contributes exactly
/// what `m` separate entries would.
pub fn expected_vocab(probs: &ProbabilityVector, l: f64) -> Result<f64, ModelError> {
    check_length(l)?;
    Ok(expected_vocab_unchecked(probs, l))
}

const PAR_THRESHOLD: usize = 1 << 14;

fn expected_vocab_unchecked(probs: &ProbabilityVector, l: f64) -> f64 {
    let fixed = |&(p, m): &(f64, u64)| to_fixed(hit_term(p, l)) * u128::from(m);
    let groups = probs.groups();
    let sum: u128 = if groups.len() >= PAR_THRESHOLD {
        groups.par_iter().map(fixed).sum()
    } else {
        groups.iter().map(fixed).sum()
    };
    from_fixed(sum)
}

/// Parameters of the function/content split model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    content_probs: ProbabilityVector,
    n_serv: u64,
    zeta: f64,
}

impl ModelConfig {
    /// `content_probs` must already be normalized over the content words.
    pub fn new(
        content_probs: ProbabilityVector,
        n_serv: u64,
        zeta: f64,
    ) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&zeta) {
            return Err(ModelError::Domain(format!(
                "content share {zeta} outside [0, 1]"
            )));
        }
        Ok(Self {
            content_probs,
            n_serv,
            zeta,
        })
    }

    pub fn content_probs(&self) -> &ProbabilityVector {
        &self.content_probs
    }

    pub fn n_serv(&self) -> u64 {
        self.n_serv
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn with_zeta(&self, zeta: f64) -> Result<Self, ModelError> {
        Self::new(self.content_probs.clone(), self.n_serv, zeta)
    }
}

/// `N_serv + expected_vocab(content, ζ·L)`.
pub fn expected_vocab_modified(cfg: &ModelConfig, l: f64) -> Result<f64, ModelError> {
    check_length(l)?;
    Ok(cfg.n_serv as f64 + expected_vocab_unchecked(&cfg.content_probs, cfg.zeta * l))
}

/// Either vocabulary model, as a single evaluator.
#[derive(Debug, Clone, PartialEq)]
pub enum VocabModel {
    Basic(ProbabilityVector),
    Split(ModelConfig),
}

impl VocabModel {
    pub fn evaluate(&self, l: f64) -> Result<f64, ModelError> {
        match self {
            VocabModel::Basic(p) => expected_vocab(p, l),
            VocabModel::Split(cfg) => expected_vocab_modified(cfg, l),
        }
    }

    /// Number of words the model can ever produce.
    pub fn vocabulary(&self) -> u64 {
        match self {
            VocabModel::Basic(p) => p.words(),
            VocabModel::Split(cfg) => cfg.n_serv + cfg.content_probs.words(),
        }
    }
}

/// Geometric grid with a fixed number of points per decade between
/// `10^lo_decade` and `10^hi_decade` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricGrid {
    pub lo_decade: f64,
    pub hi_decade: f64,
    pub per_decade: u32,
}

pub const DEFAULT_POINTS_PER_DECADE: u32 = 16;

impl GeometricGrid {
    pub fn new(lo_decade: f64, hi_decade: f64, per_decade: u32) -> Result<Self, ModelError> {
        if !(lo_decade.is_finite() && hi_decade.is_finite() && lo_decade <= hi_decade) {
            return Err(ModelError::Domain(format!(
                "grid decades {lo_decade}..{hi_decade} are not an increasing range"
            )));
        }
        if per_decade == 0 {
            return Err(ModelError::Domain(
                "grid needs at least one point per decade".into(),
            ));
        }
        Ok(Self {
            lo_decade,
            hi_decade,
            per_decade,
        })
    }

    pub fn points(&self) -> Vec<f64> {
        let steps = ((self.hi_decade - self.lo_decade) * f64::from(self.per_decade)).round() as u64;
        (0..=steps)
            .map(|j| 10f64.powf(self.lo_decade + j as f64 / f64::from(self.per_decade)))
            .collect()
    }
}

fn check_grid(grid: &[f64]) -> Result<(), ModelError> {
    if let Some(&l) = grid.iter().find(|&&l| !(l >= 0.0 && l.is_finite())) {
        return Err(ModelError::Domain(format!(
            "grid value {l} is not a finite length"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ModelError::Domain(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Evaluates `evaluator` at every grid point, in parallel, preserving order.
pub fn model_growth_curve<F>(evaluator: F, grid: &[f64]) -> Result<Vec<(f64, f64)>, ModelError>
where
    F: Fn(f64) -> Result<f64, ModelError> + Sync,
{
    check_grid(grid)?;
    grid.par_iter().map(|&l| Ok((l, evaluator(l)?))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub l: f64,
    pub n: f64,
    pub k: f64,
}

/// Local Heaps exponent `k(L)` along a grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExponentScan {
    pub points: Vec<ScanPoint>,
}

impl ExponentScan {
    /// Grid point whose exponent is closest to `target`, among points with
    /// `L <= l_max`.
    pub fn closest_to(&self, target: f64, l_max: f64) -> Option<ScanPoint> {
        self.points
            .iter()
            .filter(|p| p.l <= l_max)
            .min_by(|a, b| (a.k - target).abs().total_cmp(&(b.k - target).abs()))
            .copied()
    }

    pub fn last(&self) -> Option<ScanPoint> {
        self.points.last().copied()
    }
}

/// Finite-difference estimate of `d ln N / d ln L` on the curve `(L, N)`.
///
/// Interior points use central differences, endpoints one-sided ones. The
/// result is positive for growing `N`. Needs at least two points with `L > 0`
/// and `N > 0`.
pub fn local_exponents(curve: &[(f64, f64)]) -> Result<ExponentScan, ModelError> {
    if curve.len() < 2 {
        return Err(ModelError::Domain(
            "need at least 2 points for a derivative".into(),
        ));
    }
    let mut logs = Vec::with_capacity(curve.len());
    for &(l, n) in curve {
        if l.is_nan() || l <= 0.0 {
            return Err(ModelError::Domain(format!(
                "grid value {l} must be positive"
            )));
        }
        if n.is_nan() || n <= 0.0 {
            return Err(ModelError::Domain(format!(
                "N({l}) = {n}; log derivative undefined"
            )));
        }
        logs.push((l.ln(), n.ln()));
    }
    let last = logs.len() - 1;
    let slope = |a: usize, b: usize| (logs[b].1 - logs[a].1) / (logs[b].0 - logs[a].0);
    let points = curve
        .iter()
        .enumerate()
        .map(|(j, &(l, n))| {
            let k = match j {
                0 => slope(0, 1),
                j if j == last => slope(last - 1, last),
                j => slope(j - 1, j + 1),
            };
            ScanPoint { l, n, k }
        })
        .collect();
    Ok(ExponentScan { points })
}

/// Scans the local Heaps exponent of `evaluator` over a strictly increasing
/// grid of at least three positive lengths.
pub fn local_heaps_exponent<F>(evaluator: F, grid: &[f64]) -> Result<ExponentScan, ModelError>
where
    F: Fn(f64) -> Result<f64, ModelError> + Sync,
{
    if grid.len() < 3 {
        return Err(ModelError::Domain(
            "exponent scan needs at least 3 grid points".into(),
        ));
    }
    local_exponents(&model_growth_curve(evaluator, grid)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_word() -> ProbabilityVector {
        ProbabilityVector::from_probs(vec![0.5, 0.3, 0.2]).unwrap()
    }

    #[test]
    fn hit_probability_edge_cases() {
        assert_eq!(hit_probability(1.0, 5.0).unwrap(), 1.0);
        assert_eq!(hit_probability(0.5, 1.0).unwrap(), 0.5);
        assert_eq!(hit_probability(0.3, 0.0).unwrap(), 0.0);
        assert_eq!(hit_probability(1.0, 0.0).unwrap(), 0.0);
        assert!(hit_probability(0.0, 1.0).is_err());
        assert!(hit_probability(1.5, 1.0).is_err());
        assert!(hit_probability(0.5, -1.0).is_err());
        assert!(hit_probability(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn hit_probability_small_p() {
        // 1 − (1 − p)^L = Lp − C(L,2)p² + C(L,3)p³ − …, alternating and
        // rapidly decreasing for Lp = 1e-6.
        let (p, l) = (1e-12_f64, 1e6_f64);
        let series =
            l * p - l * (l - 1.0) / 2.0 * p * p + l * (l - 1.0) * (l - 2.0) / 6.0 * p * p * p;
        let got = hit_probability(p, l).unwrap();
        assert!(((got - series) / series).abs() < 1e-9, "{got} vs {series}");
        // high-precision reference 9.99999500000666666e-7, rounded to f64
        let reference = 9.999_995_000_006_667e-7;
        assert!(((got - reference) / reference).abs() < 1e-12, "{got}");
        // below the fast-path threshold the term is L·p
        assert_eq!(hit_probability(1e-20, 10.0).unwrap(), 1e-19);
    }

    #[test]
    fn expected_vocab_examples() {
        let one = ProbabilityVector::from_probs(vec![1.0]).unwrap();
        assert_eq!(expected_vocab(&one, 7.0).unwrap(), 1.0);
        let two = zipf_probs(0.0, 2).unwrap();
        assert_eq!(expected_vocab(&two, 1.0).unwrap(), 1.0);
        let exact = (1.0 - 0.5f64.powi(5)) + (1.0 - 0.7f64.powi(5)) + (1.0 - 0.8f64.powi(5));
        let n = expected_vocab(&three_word(), 5.0).unwrap();
        assert!((n - exact).abs() < 1e-14);
        assert!((n - 2.47300).abs() < 5e-6);
        assert!(expected_vocab(&one, -1.0).is_err());
    }

    #[test]
    fn modified_model_examples() {
        let cfg = ModelConfig::new(three_word(), 10, 0.4).unwrap();
        for content in [three_word(), zipf_probs(1.2, 50).unwrap()] {
            let cfg = ModelConfig::new(content, 10, 0.4).unwrap();
            assert_eq!(expected_vocab_modified(&cfg, 0.0).unwrap(), 10.0);
        }
        assert_eq!(cfg.n_serv(), 10);

        let half = ModelConfig::new(three_word(), 2, 0.5).unwrap();
        assert_eq!(
            expected_vocab_modified(&half, 10.0).unwrap(),
            2.0 + expected_vocab(&three_word(), 5.0).unwrap()
        );
        assert!(ModelConfig::new(three_word(), 0, 1.5).is_err());
        assert!(ModelConfig::new(three_word(), 0, -0.1).is_err());
    }

    #[test]
    fn grid_points() {
        let g = GeometricGrid::new(0.0, 1.0, 1).unwrap().points();
        assert_eq!(g, vec![1.0, 10.0]);
        let g = GeometricGrid::new(3.0, 10.0, 16).unwrap().points();
        assert_eq!(g.len(), 7 * 16 + 1);
        assert!((g[0] - 1e3).abs() < 1e-9 && (g[g.len() - 1] / 1e10 - 1.0).abs() < 1e-14);
        assert!(GeometricGrid::new(2.0, 1.0, 4).is_err());
        assert!(GeometricGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn growth_curve_examples() {
        let one = VocabModel::Basic(ProbabilityVector::from_probs(vec![1.0]).unwrap());
        assert_eq!(
            model_growth_curve(|l| one.evaluate(l), &[1.0]).unwrap(),
            vec![(1.0, 1.0)]
        );
        assert!(model_growth_curve(|l| one.evaluate(l), &[1.0, 1.0]).is_err());

        let z = VocabModel::Basic(zipf_probs(1.3, 500).unwrap());
        let grid = GeometricGrid::new(0.0, 6.0, 4).unwrap().points();
        let curve = model_growth_curve(|l| z.evaluate(l), &grid).unwrap();
        assert!(curve.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!(curve.last().unwrap().1 <= 500.0);
    }

    #[test]
    fn exact_power_law_exponent() {
        let grid = GeometricGrid::new(0.0, 8.0, 16).unwrap().points();
        let scan = local_heaps_exponent(|l| Ok(3.0 * l.powf(0.55)), &grid).unwrap();
        assert!(scan.points.iter().all(|p| (p.k - 0.55).abs() < 1e-12));
        let flat = local_heaps_exponent(|_| Ok(42.0), &grid).unwrap();
        assert!(flat.points.iter().all(|p| p.k == 0.0));
    }

    #[test]
    fn exponent_scan_errors() {
        assert!(local_heaps_exponent(Ok, &[1.0, 2.0]).is_err());
        assert!(local_heaps_exponent(Ok, &[1.0, 3.0, 2.0]).is_err());
        assert!(matches!(
            local_heaps_exponent(|_| Ok(0.0), &[1.0, 2.0, 3.0]),
            Err(ModelError::Domain(_))
        ));
        assert!(local_heaps_exponent(Ok, &[0.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn zipf_plateau_near_inverse_beta() {
        let beta = 1.698;
        let probs = zipf_probs(beta, 100_000).unwrap();
        let grid = GeometricGrid::new(0.0, 14.0, 16).unwrap().points();
        let scan = local_heaps_exponent(|l| expected_vocab(&probs, l), &grid).unwrap();
        let best = scan
            .closest_to(1.0 / beta, 1.0 / probs.min_probability())
            .unwrap();
        assert!((best.k - 1.0 / beta).abs() <= 0.05, "{best:?}");
    }

    #[test]
    fn saturates_to_vocabulary() {
        let probs = zipf_probs(1.1, 1000).unwrap();
        let n = expected_vocab(&probs, 1e15).unwrap();
        assert_eq!(n, 1000.0);
    }

    proptest! {
        #[test]
        fn grouped_and_expanded_sums_are_identical(
            counts in proptest::collection::vec(1u64..20, 1..200),
            l in 0.0f64..1e7,
        ) {
            let grouped = ProbabilityVector::from_counts(counts).unwrap();
            let expanded = grouped.expanded();
            prop_assert_eq!(
                expected_vocab(&grouped, l).unwrap().to_bits(),
                expected_vocab(&expanded, l).unwrap().to_bits()
            );
        }

        #[test]
        fn split_model_reduces_to_basic(
            counts in proptest::collection::vec(1u64..1000, 1..100),
            l in 0.0f64..1e9,
        ) {
            let probs = ProbabilityVector::from_counts(counts).unwrap();
            let cfg = ModelConfig::new(probs.clone(), 0, 1.0).unwrap();
            prop_assert_eq!(
                expected_vocab_modified(&cfg, l).unwrap().to_bits(),
                expected_vocab(&probs, l).unwrap().to_bits()
            );
        }
    }
}
