//! Vocabulary growth statistics for diachronic corpora.
//!
//! The crate ingests Google Books Ngram 1-gram files into per-year
//! [`FrequencyTable`]s, measures empirical vocabulary growth (Heaps' law,
//! `N ~ L^k`) and rank-frequency behaviour (Zipf's law, `p_r ~ r^-β`),
//! and evaluates the expected vocabulary size of a text of `L` i.i.d. tokens
//! drawn from a known word distribution:
//!
//! ```text
//! N(L) = Σ_i 1 − (1 − p_i)^L
//! N(L) = N_serv + Σ_{i∈I} 1 − (1 − p_i)^{ζL}      (function/content split)
//! ```
//!
//! Modules:
//!
//! - [`ingest`]: 1-gram parsing, token normalization, per-year tables, snapshots
//! - [`growth`]: growth curves, function-word shares, sliding-window exponents
//! - [`model`]: expected vocabulary and local Heaps exponent scans
//! - [`fit`]: log-log least squares and range-restricted Zipf MLE
//! - [`oracle`]: Monte Carlo estimate of the expected vocabulary

pub mod fit;
pub mod growth;
pub mod ingest;
pub mod model;
pub mod oracle;

pub use fit::{FitError, FitMethod, PowerLawFit, RankFrequency};
pub use growth::{FunctionWordList, GrowthCurve, GrowthError, GrowthPoint, HeapsSeries};
pub use ingest::{FilterConfig, FrequencyTable, IngestError, TokenRecord};
pub use model::{ExponentScan, GeometricGrid, ModelConfig, ModelError, ProbabilityVector};
pub use oracle::McEstimate;
