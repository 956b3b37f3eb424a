//! Monte Carlo counterpart of [`crate::model::expected_vocab`]: draw `L`
//! i.i.d. tokens from a probability vector and count distinct words.
//!
//! # Reproducibility
//!
//! Replica `i` of a run with seed `s` uses `ChaCha8Rng::seed_from_u64(s)` with
//! its stream number set to `i` (`rand_chacha` 0.3, whose `seed_from_u64`
//! expands the `u64` into a key with PCG32 as documented in `rand_core` 0.6).
//! Runs with different seeds therefore share no replicas. From that stream
//! each token consumes two `u64` outputs `a`, `b`:
//!
//! - column `j = (a · n) >> 64` of the alias table with `n` columns,
//! - `u = (b >> 11) · 2^-53`; keep `j` if `u < prob[j]`, else take `alias[j]`.
//!
//! Columns are probability groups; a group of multiplicity `m > 1` consumes a
//! third output `c` and picks member `(c · m) >> 64`. Words are numbered by
//! group order, so for an explicit vector word `r − 1` is the word at rank `r`.

use std::collections::HashSet;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{ModelError, ProbabilityVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Generator for replica `index` of a run seeded with `seed`.
pub fn replica_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
fn bounded(rng: &mut impl RngCore, n: u64) -> u64 {
    ((u128::from(rng.next_u64()) * u128::from(n)) >> 64) as u64
}

#[inline]
fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Vose alias table over the groups of a [`ProbabilityVector`].
#[derive(Debug, Clone)]
pub struct AliasSampler {
    prob: Vec<f64>,
    alias: Vec<u32>,
    /// `(first word index, multiplicity)` per group.
    members: Vec<(u64, u64)>,
    words: u64,
}

impl AliasSampler {
    pub fn new(probs: &ProbabilityVector) -> Self {
        let groups = probs.groups();
        let n = groups.len();
        assert!(
            n <= u32::MAX as usize,
            "too many probability groups for the alias table"
        );

        let masses: Vec<f64> = groups.iter().map(|&(p, m)| p * m as f64).collect();
        let total: f64 = masses.iter().sum();
        let mut scaled: Vec<f64> = masses.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![1.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();

        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }

        let mut next = 0u64;
        let members = groups
            .iter()
            .map(|&(_, m)| {
                let first = next;
                next += m;
                (first, m)
            })
            .collect();
        Self {
            prob,
            alias,
            members,
            words: next,
        }
    }

    pub fn words(&self) -> u64 {
        self.words
    }

    /// Draws one word index in `0..words`.
    #[inline]
    pub fn draw(&self, rng: &mut impl RngCore) -> u64 {
        let column = bounded(rng, self.prob.len() as u64) as usize;
        let group = if unit(rng) < self.prob[column] {
            column
        } else {
            self.alias[column] as usize
        };
        let (first, m) = self.members[group];
        if m == 1 {
            first
        } else {
            first + bounded(rng, m)
        }
    }

    /// Occurrence counts per word after `tokens` draws.
    pub fn sample_counts(&self, tokens: u64, rng: &mut impl RngCore) -> Vec<u64> {
        let mut counts = vec![0u64; self.words as usize];
        for _ in 0..tokens {
            counts[self.draw(rng) as usize] += 1;
        }
        counts
    }
}

/// Words up to this count are tracked with a dense stamp array; larger
/// vocabularies fall back to a hash set.
const DENSE_LIMIT: u64 = 1 << 24;

/// Reusable distinct-word counter.
struct DistinctCounter {
    stamps: Vec<u32>,
    epoch: u32,
    sparse: HashSet<u64>,
}

impl DistinctCounter {
    fn new(words: u64) -> Self {
        let dense = if words <= DENSE_LIMIT {
            words as usize
        } else {
            0
        };
        Self {
            stamps: vec![0; dense],
            epoch: 0,
            sparse: HashSet::new(),
        }
    }

    fn count(&mut self, sampler: &AliasSampler, length: u64, rng: &mut impl RngCore) -> u64 {
        let mut distinct = 0;
        if self.stamps.is_empty() {
            self.sparse.clear();
            for _ in 0..length {
                if self.sparse.insert(sampler.draw(rng)) {
                    distinct += 1;
                }
            }
            return distinct;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamps.fill(0);
            self.epoch = 1;
        }
        for _ in 0..length {
            let stamp = &mut self.stamps[sampler.draw(rng) as usize];
            if *stamp != self.epoch {
                *stamp = self.epoch;
                distinct += 1;
            }
        }
        distinct
    }
}

/// Number of distinct words in one simulated text of `length` tokens.
pub fn sample_distinct_count(probs: &ProbabilityVector, length: u64, seed: u64) -> u64 {
    let sampler = AliasSampler::new(probs);
    let mut counter = DistinctCounter::new(sampler.words());
    counter.count(&sampler, length, &mut replica_rng(seed, 0))
}

/// Mean and standard error of the distinct-word count over `trials`
/// independent replicas. Replicas run in parallel but each has its own
/// generator, so the result equals a sequential run.
pub fn mc_expected_vocab(
    probs: &ProbabilityVector,
    length: u64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate, ModelError> {
    if trials < 2 {
        return Err(ModelError::Domain(format!(
            "need at least 2 trials for a standard error, got {trials}"
        )));
    }
    let sampler = AliasSampler::new(probs);
    let samples: Vec<u64> = (0..trials)
        .into_par_iter()
        .map_init(
            || DistinctCounter::new(sampler.words()),
            |counter, i| counter.count(&sampler, length, &mut replica_rng(seed, i)),
        )
        .collect();

    let n = trials as f64;
    let mean = samples.iter().map(|&x| x as f64).sum::<f64>() / n;
    let var = samples
        .iter()
        .map(|&x| {
            let d = x as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / (n - 1.0);
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        trials,
        seed,
    })
}
