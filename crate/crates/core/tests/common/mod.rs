#![allow(dead_code)]

use std::path::PathBuf;

use adaptive_eps::dataset::{self, Dataset, Format, LabelColumn, LabeledPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn iris_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/iris.csv")
}

pub fn iris() -> Dataset {
    let f = std::fs::File::open(iris_path()).unwrap();
    dataset::load(f, Format::Csv, &LabelColumn::Last).unwrap()
}

/// Gaussian-ish blobs, one or two per class, at a random overall scale.
pub fn random_dataset(
    seed: u64,
    points: (usize, usize),
    dims: (usize, usize),
    classes: (usize, usize),
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(points.0..=points.1);
    let dim = rng.random_range(dims.0..=dims.1);
    let k = rng.random_range(classes.0..=classes.1);
    let scale = [0.3, 1.0, 3.0][rng.random_range(0..3)];
    let centers: Vec<Vec<Vec<f64>>> = (0..k)
        .map(|_| {
            (0..rng.random_range(1..=2))
                .map(|_| (0..dim).map(|_| rng.random_range(0.0..scale)).collect())
                .collect()
        })
        .collect();
    let spread = scale * rng.random_range(0.05..0.5);
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        // every class gets at least one point
        let c = if i < k { i } else { rng.random_range(0..k) };
        let blob = &centers[c][rng.random_range(0..centers[c].len())];
        let x = blob
            .iter()
            .map(|m| m + spread * (rng.random::<f64>() + rng.random::<f64>() - 1.0))
            .collect();
        pts.push(LabeledPoint::new(x, format!("c{c}")));
    }
    Dataset::new(pts).unwrap()
}

/// The 100-dataset corpus: 10-200 points, 2-8 dims, 2-4 classes.
pub fn corpus() -> Vec<Dataset> {
    (0..100)
        .map(|s| random_dataset(1000 + s, (10, 200), (2, 8), (2, 4)))
        .collect()
}

/// Small datasets for the fine-step comparison: <= 30 points, <= 5 dims.
pub fn small_corpus(count: u64) -> Vec<Dataset> {
    (0..count)
        .map(|s| random_dataset(5000 + s, (4, 30), (1, 5), (2, 3)))
        .collect()
}

pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}
