//! Seeded workloads shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satmetric_core::instrument::{Dimension, Item, KanoCategory, LikertScale, SurveyInstrument};
use satmetric_core::ScoreMatrix;

/// `n x k` Likert answers in 1..=5.
pub fn likert_matrix(n: usize, k: usize, seed: u64) -> ScoreMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..k).map(|_| f64::from(rng.random_range(1..=5_u8))).collect())
        .collect();
    ScoreMatrix::from_rows(&rows).expect("non-empty matrix")
}

/// `k` items spread round-robin across the five dimensions.
pub fn instrument(k: usize) -> SurveyInstrument {
    let items = (0..k)
        .map(|i| Item {
            id: i as u32 + 1,
            prompt: format!("item {}", i + 1),
            dimension: Dimension::ALL[i % 5],
            kano: KanoCategory::ALL[i % 4],
            source_key: None,
        })
        .collect();
    SurveyInstrument::new(None, LikertScale::default(), items).expect("valid instrument")
}

/// Per-item target means with `n * mean` integral.
pub fn targets(k: usize, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| rng.random_range(n as u64..=5 * n as u64) as f64 / n as f64)
        .collect()
}
