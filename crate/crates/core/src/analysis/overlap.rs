use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Execution, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub size_a: usize,
    pub size_b: usize,
    pub intersection: usize,
    pub n_test: usize,
    /// `|A ∩ B| / min(|A|, |B|)`; absent when either set is empty.
    pub observed_overlap: Option<f64>,
    /// Expected observed overlap for independent random error sets of the
    /// same sizes, `max(|A|, |B|) / n_test`.
    pub expected_overlap: Option<f64>,
}

/// Overlap of two models' error sets over a test set of `n_test` instances.
pub fn misclassification_overlap<T: Ord>(
    errors_a: &BTreeSet<T>,
    errors_b: &BTreeSet<T>,
    n_test: usize,
) -> Result<OverlapReport> {
    let (a, b) = (errors_a.len(), errors_b.len());
    if a > n_test || b > n_test {
        return Err(Error::Validation(format!(
            "error sets of size {a} and {b} exceed the test set size {n_test}"
        )));
    }
    let intersection = errors_a.intersection(errors_b).count();
    Ok(overlap_from_counts(a, b, intersection, n_test))
}

fn overlap_from_counts(a: usize, b: usize, intersection: usize, n_test: usize) -> OverlapReport {
    let min = a.min(b);
    let (observed, expected) = if min == 0 {
        (None, None)
    } else {
        (
            Some(intersection as f64 / min as f64),
            Some(a.max(b) as f64 / n_test as f64),
        )
    };
    OverlapReport {
        size_a: a,
        size_b: b,
        intersection,
        n_test,
        observed_overlap: observed,
        expected_overlap: expected,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOverlap {
    pub trials: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub expected: f64,
}

impl MonteCarloOverlap {
    /// Distance between simulated mean and closed-form expectation, in
    /// standard errors.
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == self.expected {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - self.expected).abs() / self.std_error
        }
    }
}

/// Observed overlap of uniformly random error sets of the given sizes,
/// averaged over `trials`. Trial `i` draws from its own random stream, so
/// the result does not depend on the execution strategy.
pub fn monte_carlo_overlap(
    size_a: usize,
    size_b: usize,
    n_test: usize,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<MonteCarloOverlap> {
    if size_a == 0 || size_b == 0 || size_a > n_test || size_b > n_test {
        return Err(Error::Validation(format!(
            "set sizes {size_a} and {size_b} must be in 1..={n_test}"
        )));
    }
    if trials < 2 {
        return Err(Error::Validation("at least two trials are needed".into()));
    }
    let values = exec.map_range(0..trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut in_a = vec![false; n_test];
        for j in sample(&mut rng, n_test, size_a) {
            in_a[j] = true;
        }
        let inter = sample(&mut rng, n_test, size_b).iter().filter(|&j| in_a[j]).count();
        inter as f64 / size_a.min(size_b) as f64
    });
    let n = trials as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MonteCarloOverlap {
        trials,
        seed,
        mean,
        std_error: (var / n).sqrt(),
        expected: size_a.max(size_b) as f64 / n_test as f64,
    })
}
