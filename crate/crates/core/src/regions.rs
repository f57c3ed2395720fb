//! Safe perturbation balls built from computed radii.
//!
//! Balls are open: a point at exactly the radius is outside, and a zero
//! radius contains nothing.
//!
//! Sampling uses ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`). Each
//! draw takes a standard-normal direction (one normal per coordinate,
//! normalized) and a magnitude `radius * u^(1/D)` with `u` uniform in
//! `[0, 1)`; draws that round onto or past the boundary are rejected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::{euclidean, ClassId, Dataset};
use crate::error::{Error, Result};
use crate::expansion::RadiusResult;

#[derive(Debug, Clone, PartialEq)]
pub struct SafeRegion {
    pub center: Vec<f64>,
    pub radius: f64,
    pub class_id: ClassId,
}

impl SafeRegion {
    /// Region of point `i` under `radii`.
    pub fn of_point(ds: &Dataset, radii: &[f64], i: usize) -> Result<SafeRegion> {
        if radii.len() != ds.len() {
            return Err(Error::LengthMismatch {
                expected: ds.len(),
                found: radii.len(),
            });
        }
        if i >= ds.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: ds.len(),
            });
        }
        Ok(SafeRegion {
            center: ds.coords(i).to_vec(),
            radius: radii[i],
            class_id: ds.class_id(i).clone(),
        })
    }

    pub fn all(ds: &Dataset, result: &RadiusResult) -> Result<Vec<SafeRegion>> {
        (0..ds.len())
            .map(|i| SafeRegion::of_point(ds, &result.epsilons, i))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(crate::dataset::distance(&self.center, x)? < self.radius)
    }

    /// `count` points drawn uniformly from the open ball.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if self.radius.is_nan() || self.radius <= 0.0 {
            return Err(Error::ZeroRadius);
        }
        let dim = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                continue;
            }
            let u: f64 = rng.random();
            let r = self.radius * u.powf(1.0 / dim as f64);
            let x: Vec<f64> = self
                .center
                .iter()
                .zip(&dir)
                .map(|(c, v)| c + r * v / norm)
                .collect();
            if euclidean(&self.center, &x) < self.radius {
                out.push(x);
            }
        }
        Ok(out)
    }
}

/// Nearest point of another class to point `i`; ties go to the smaller index.
pub fn nearest_foreign(ds: &Dataset, i: usize) -> Result<(usize, f64)> {
    if i >= ds.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: ds.len(),
        });
    }
    let ci = ds.label(i);
    let mut best: Option<(usize, f64)> = None;
    for j in 0..ds.len() {
        if ds.label(j) == ci {
            continue;
        }
        let d = euclidean(ds.coords(i), ds.coords(j));
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((j, d));
        }
    }
    best.ok_or(Error::NoForeignPoint)
}
