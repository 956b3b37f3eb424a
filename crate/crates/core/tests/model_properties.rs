use std::path::Path;

use lexgrowth::ingest::FrequencyTable;
use lexgrowth::model::{
    expected_vocab, local_heaps_exponent, zipf_probs, GeometricGrid, ProbabilityVector,
};

/// Slack for finite-difference noise when checking that k(L) never rises.
const GRID_TOLERANCE: f64 = 1e-9;

fn assert_k_non_increasing(name: &str, probs: &ProbabilityVector) {
    let grid = GeometricGrid::new(-1.0, 12.0, 16).unwrap().points();
    let scan = local_heaps_exponent(|l| expected_vocab(probs, l), &grid).unwrap();
    for w in scan.points.windows(2) {
        assert!(
            w[1].k <= w[0].k + GRID_TOLERANCE,
            "{name}: k rises from {} at L={} to {} at L={}",
            w[0].k,
            w[0].l,
            w[1].k,
            w[1].l
        );
    }
    assert!(scan.points[0].k <= 1.0 + 1e-6 && scan.last().unwrap().k >= 0.0);
}

#[test]
fn exponent_decreases_for_uniform() {
    for w in [2, 10, 100, 100_000] {
        assert_k_non_increasing(&format!("uniform W={w}"), &zipf_probs(0.0, w).unwrap());
    }
}

#[test]
fn exponent_decreases_for_zipf() {
    for beta in [1.077, 1.698] {
        assert_k_non_increasing(
            &format!("zipf β={beta}"),
            &zipf_probs(beta, 100_000).unwrap(),
        );
    }
}

/// Exact `L·N'(L)/N(L)` for an explicit vector.
fn analytic_k(probs: &[f64], l: f64) -> f64 {
    let n: f64 = probs.iter().map(|p| 1.0 - (1.0 - p).powf(l)).sum();
    let dn: f64 = probs
        .iter()
        .map(|p| -(1.0 - p).powf(l) * (1.0 - p).ln())
        .sum();
    l * dn / n
}

// One dominant word and three rare ones: k dips while the dominant word
// saturates, then rises again as the rare words start to appear. The
// monotone decrease seen for Zipf and uniform vectors is not universal.
#[test]
fn fixture_year_2000_exponent_is_not_monotone() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden/2000.tsv");
    let table = FrequencyTable::read_snapshot(&std::fs::read_to_string(path).unwrap()).unwrap();
    let probs = ProbabilityVector::from_table(&table).unwrap();
    let explicit: Vec<f64> = probs.expanded().groups().iter().map(|g| g.0).collect();

    let grid = GeometricGrid::new(-1.0, 3.0, 64).unwrap().points();
    let scan = local_heaps_exponent(|l| expected_vocab(&probs, l), &grid).unwrap();
    for p in &scan.points[1..scan.points.len() - 1] {
        let exact = analytic_k(&explicit, p.l);
        assert!((p.k - exact).abs() < 2e-3, "L={}: {} vs {exact}", p.l, p.k);
    }
    let k = |l: f64| analytic_k(&explicit, l);
    assert!(k(2.7) < k(7.5) - 0.03);
    assert!(k(7.5) > k(100.0));
}

#[test]
fn large_grouped_vector_evaluates_quickly() {
    // a 4·10⁶-word vector with few distinct counts, as in a year table
    let groups: Vec<(u64, u64)> = (1..=2000u64).map(|c| (2001 - c, 2000)).collect();
    let total: u64 = groups.iter().map(|&(c, m)| c * m).sum();
    let probs = ProbabilityVector::from_groups(
        groups
            .iter()
            .map(|&(c, m)| (c as f64 / total as f64, m))
            .collect(),
    )
    .unwrap();
    assert_eq!(probs.words(), 4_000_000);
    let grid = GeometricGrid::new(3.0, 10.0, 16).unwrap().points();
    let start = std::time::Instant::now();
    let scan = local_heaps_exponent(|l| expected_vocab(&probs, l), &grid).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert!(scan.points.iter().all(|p| p.n <= 4e6));
}
