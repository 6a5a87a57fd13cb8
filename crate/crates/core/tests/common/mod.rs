#![allow(dead_code)]

use mptkrr::{Dataset, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Two Gaussian classes; the first `informative` dimensions are shifted by
/// `+shift` for the positive class and `-shift` for the negative class.
pub fn gaussian_two_class(
    seed: u64,
    n_pos: usize,
    n_neg: usize,
    m: usize,
    informative: usize,
    shift: f64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::with_capacity(n_pos + n_neg);
    let mut labels = Vec::with_capacity(n_pos + n_neg);
    for i in 0..n_pos + n_neg {
        let label = if i < n_pos { Label::Positive } else { Label::Negative };
        let sign = label.target();
        let row: Vec<Option<f64>> = (0..m)
            .map(|j| {
                let mu = if j < informative { sign * shift } else { 0.0 };
                Some(mu + noise.sample(&mut rng))
            })
            .collect();
        rows.push(row);
        labels.push(label);
    }
    Dataset::from_rows(&rows, labels).unwrap()
}

/// Stand-in with the shape of the leukemia microarray table: 72 rows,
/// 7129 dimensions, 47 vs 25 samples. Only synthetic structure; results on
/// it say nothing about the real data.
pub fn microarray_surrogate(seed: u64) -> Dataset {
    gaussian_two_class(seed, 47, 25, 7129, 60, 0.9)
}

/// Stand-in with the shape of the ECG beat table (21 features), overlapping
/// classes.
pub fn ecg_surrogate(seed: u64, n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let label = if rng.gen_bool(0.6) { Label::Positive } else { Label::Negative };
        let sign = label.target();
        let row = (0..21)
            .map(|j| {
                let base = 2.0 + 0.1 * j as f64;
                let shift = if j < 8 { 0.25 * sign } else { 0.0 };
                Some(base + shift + noise.sample(&mut rng))
            })
            .collect();
        rows.push(row);
        labels.push(label);
    }
    Dataset::from_rows(&rows, labels).unwrap()
}

pub fn write_dataset(d: &Dataset, path: &std::path::Path) {
    let f = std::fs::File::create(path).unwrap();
    mptkrr::dataset::write_csv(d, f, d.n_dims(), "").unwrap();
}
