//! Synthetic PROMISE-shaped datasets for benchmarks.

use defectlab::{ClassLabel, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` rows of `p` skewed, positive features; roughly one row in ten is
/// defective, and defective rows have larger metric values.
pub fn synthetic(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| {
            let defective = rng.random_bool(0.1);
            let scale = if defective { 3.0 } else { 1.0 };
            let x = (0..p)
                .map(|j| {
                    let u: f64 = rng.random_range(0.0..1.0);
                    (scale * (1.0 + j as f64) * u * u * 100.0).round()
                })
                .collect();
            let label = if defective {
                ClassLabel::Defective
            } else {
                ClassLabel::NonDefective
            };
            (x, label)
        })
        .collect();
    Dataset::from_rows(rows, "synthetic").expect("synthetic rows are well formed")
}
