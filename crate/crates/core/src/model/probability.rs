use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::ModelError;
use crate::growth::FunctionWordList;
use crate::ingest::FrequencyTable;

/// Largest supported vocabulary. Keeps fixed-point sums of per-word terms
/// inside a `u128` (see [`super::expected_vocab`]).
pub const MAX_WORDS: u64 = 1 << 43;

const SUM_TOLERANCE: f64 = 1e-9;

/// Word probabilities `p_i` in non-increasing order, stored as
/// `(probability, multiplicity)` groups.
///
/// An explicit vector is simply one where every multiplicity is 1. Empirical
/// distributions have many words sharing a count, so grouping them makes
/// evaluating sums over millions of words cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    groups: Vec<(f64, u64)>,
    words: u64,
}

impl ProbabilityVector {
    /// Validates and wraps `(probability, multiplicity)` groups.
    ///
    /// Probabilities must lie in `(0, 1]` and be non-increasing, every
    /// multiplicity must be at least 1, and `Σ p·m` must equal 1 within `1e-9`.
    pub fn from_groups(groups: Vec<(f64, u64)>) -> Result<Self, ModelError> {
        if groups.is_empty() {
            return Err(ModelError::InvalidVector("no probabilities".into()));
        }
        let mut words: u64 = 0;
        let mut mass = 0.0;
        let mut prev = f64::INFINITY;
        for (i, &(p, m)) in groups.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(ModelError::InvalidVector(format!(
                    "entry {i}: probability {p} outside (0, 1]"
                )));
            }
            if m == 0 {
                return Err(ModelError::InvalidVector(format!(
                    "entry {i}: zero multiplicity"
                )));
            }
            if p > prev {
                return Err(ModelError::InvalidVector(format!(
                    "entry {i}: probabilities must be non-increasing ({p} after {prev})"
                )));
            }
            prev = p;
            words = words
                .checked_add(m)
                .filter(|&w| w <= MAX_WORDS)
                .ok_or_else(|| ModelError::InvalidVector("too many words".into()))?;
            mass += p * m as f64;
        }
        if (mass - 1.0).abs() > SUM_TOLERANCE {
            return Err(ModelError::InvalidVector(format!(
                "probabilities sum to {mass}, expected 1"
            )));
        }
        Ok(Self { groups, words })
    }

    /// One probability per word, in non-increasing order.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self, ModelError> {
        Self::from_groups(probs.into_iter().map(|p| (p, 1)).collect())
    }

    /// Empirical probabilities `count / L` of every token in a table, grouped
    /// by count.
    pub fn from_table(table: &FrequencyTable) -> Result<Self, ModelError> {
        Self::from_counts(table.counts().values().copied())
    }

    /// Empirical probabilities from raw positive counts.
    pub fn from_counts<I: IntoIterator<Item = u64>>(counts: I) -> Result<Self, ModelError> {
        let mut by_count: BTreeMap<u64, u64> = BTreeMap::new();
        let mut total: u64 = 0;
        for c in counts {
            if c == 0 {
                return Err(ModelError::InvalidVector("zero count".into()));
            }
            *by_count.entry(c).or_insert(0) += 1;
            total += c;
        }
        if total == 0 {
            return Err(ModelError::InvalidVector("no counts".into()));
        }
        let total = total as f64;
        Self::from_groups(
            by_count
                .into_iter()
                .rev()
                .map(|(c, m)| (c as f64 / total, m))
                .collect(),
        )
    }

    /// Content-word probabilities of a table: counts of tokens outside `fw`,
    /// renormalized to sum to 1 over the content vocabulary.
    pub fn content_from_table(
        table: &FrequencyTable,
        fw: &FunctionWordList,
    ) -> Result<Self, ModelError> {
        Self::from_counts(
            table
                .counts()
                .iter()
                .filter(|(t, _)| !fw.contains(t))
                .map(|(_, &c)| c),
        )
    }

    /// Parses `probability<TAB>multiplicity` rows. Blank lines, `#` comments
    /// and a `probability\tmultiplicity` header are skipped. A row with a
    /// single column has multiplicity 1.
    pub fn parse_tsv(text: &str) -> Result<Self, ModelError> {
        let mut groups = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') || line.starts_with("probability") {
                continue;
            }
            let bad = || ModelError::InvalidVector(format!("bad row {line:?}"));
            let mut fields = line.split_whitespace();
            let p: f64 = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let m: u64 = match fields.next() {
                Some(m) => m.parse().map_err(|_| bad())?,
                None => 1,
            };
            if fields.next().is_some() {
                return Err(bad());
            }
            groups.push((p, m));
        }
        Self::from_groups(groups)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("probability\tmultiplicity\n");
        for &(p, m) in &self.groups {
            let _ = writeln!(out, "{p:e}\t{m}");
        }
        out
    }

    pub fn groups(&self) -> &[(f64, u64)] {
        &self.groups
    }

    /// Total number of words W (sum of multiplicities).
    pub fn words(&self) -> u64 {
        self.words
    }

    pub fn min_probability(&self) -> f64 {
        self.groups.last().map_or(0.0, |g| g.0)
    }

    /// The same distribution with one group per word.
    pub fn expanded(&self) -> Self {
        let groups = self
            .groups
            .iter()
            .flat_map(|&(p, m)| std::iter::repeat_n((p, 1), m as usize))
            .collect();
        Self {
            groups,
            words: self.words,
        }
    }
}

/// Finite Zipf distribution `p_k = A·k^−β`, `k = 1..=words`, normalized so the
/// probabilities sum to 1.
pub fn zipf_probs(beta: f64, words: u64) -> Result<ProbabilityVector, ModelError> {
    if !(1..=MAX_WORDS).contains(&words) {
        return Err(ModelError::Domain(format!(
            "word count {words} out of range"
        )));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(ModelError::Domain(format!(
            "Zipf exponent {beta} must be >= 0"
        )));
    }
    if beta == 0.0 {
        return ProbabilityVector::from_groups(vec![(1.0 / words as f64, words)]);
    }
    let weights: Vec<f64> = (1..=words).map(|k| (k as f64).powf(-beta)).collect();
    // smallest terms first
    let norm: f64 = weights.iter().rev().sum();
    ProbabilityVector::from_probs(weights.into_iter().map(|w| w / norm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn zipf_uniform_and_degenerate() {
        let u = zipf_probs(0.0, 4).unwrap();
        assert_eq!(u.groups(), &[(0.25, 4)]);
        assert_eq!(u.words(), 4);
        assert_eq!(zipf_probs(2.5, 1).unwrap().groups(), &[(1.0, 1)]);
    }

    #[test]
    fn zipf_two_words() {
        let z = zipf_probs(1.0, 2).unwrap();
        let g = z.groups();
        assert!((g[0].0 - 2.0 / 3.0).abs() < 1e-15);
        assert!((g[1].0 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zipf_domain_errors() {
        assert!(matches!(zipf_probs(1.0, 0), Err(ModelError::Domain(_))));
        assert!(matches!(zipf_probs(-0.5, 10), Err(ModelError::Domain(_))));
        assert!(matches!(
            zipf_probs(f64::NAN, 10),
            Err(ModelError::Domain(_))
        ));
    }

    #[test]
    fn zipf_sums_to_one() {
        for beta in [0.5, 1.077, 1.698, 3.0] {
            let z = zipf_probs(beta, 100_000).unwrap();
            let s: f64 = z.groups().iter().map(|g| g.0).sum();
            assert!((s - 1.0).abs() < 1e-9, "{beta}: {s}");
        }
    }

    #[test]
    fn validation() {
        assert!(ProbabilityVector::from_probs(vec![]).is_err());
        assert!(ProbabilityVector::from_probs(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::from_probs(vec![0.5, 0.4]).is_err());
        assert!(ProbabilityVector::from_probs(vec![1.0, 0.0]).is_err());
        assert!(ProbabilityVector::from_groups(vec![(0.5, 0)]).is_err());
        assert!(ProbabilityVector::from_probs(vec![0.5, 0.3, 0.2]).is_ok());
    }

    #[test]
    fn from_table_groups_by_count() {
        let counts: HashMap<String, u64> = [("a", 4), ("b", 2), ("c", 2), ("d", 2)]
            .map(|(t, c)| (t.to_owned(), c))
            .into();
        let t = FrequencyTable::new(2000, counts).unwrap();
        let pv = ProbabilityVector::from_table(&t).unwrap();
        assert_eq!(pv.groups(), &[(0.4, 1), (0.2, 3)]);
        assert_eq!(pv.words(), 4);
        assert_eq!(pv.expanded().groups().len(), 4);

        let fw = FunctionWordList::from_words(["a"]);
        let content = ProbabilityVector::content_from_table(&t, &fw).unwrap();
        assert_eq!(content.groups().len(), 1);
        assert_eq!(content.words(), 3);
        assert!((content.groups()[0].0 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tsv_round_trip() {
        let pv = ProbabilityVector::from_groups(vec![(0.5, 1), (0.1, 3), (0.05, 4)]).unwrap();
        assert_eq!(ProbabilityVector::parse_tsv(&pv.to_tsv()).unwrap(), pv);
        let single = ProbabilityVector::parse_tsv("# p\n1.0\n").unwrap();
        assert_eq!(single.groups(), &[(1.0, 1)]);
        assert!(ProbabilityVector::parse_tsv("0.5\t1\t3\n0.5\n").is_err());
    }
}
