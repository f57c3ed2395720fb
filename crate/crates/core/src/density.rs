//! Per-class sampling density from an inverse-multiquadric kernel sum.

use crate::dataset::{euclidean, ClassId, Dataset};
use crate::error::{Error, Result};

/// Inverse-multiquadric kernel `1 / sqrt(1 + (shape * r)^2)`.
pub fn rbf(r: f64, shape: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "kernel distance must be non-negative, got {r}"
        )));
    }
    check_shape(shape)?;
    Ok(inverse_multiquadric(r, shape))
}

#[inline]
fn inverse_multiquadric(r: f64, shape: f64) -> f64 {
    let s = shape * r;
    1.0 / (1.0 + s * s).sqrt()
}

fn check_shape(shape: f64) -> Result<()> {
    if shape > 0.0 && shape.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "shape must be positive and finite, got {shape}"
        )))
    }
}

/// Kernel mixture over each class of a dataset.
#[derive(Debug, Clone, Copy)]
pub struct DensityModel<'a> {
    dataset: &'a Dataset,
    shape: f64,
}

impl<'a> DensityModel<'a> {
    pub fn new(dataset: &'a Dataset, shape: f64) -> Result<Self> {
        check_shape(shape)?;
        Ok(DensityModel { dataset, shape })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    /// Density of class `class` at `x`.
    pub fn class_density(&self, x: &[f64], class: &ClassId) -> Result<f64> {
        let c = self
            .dataset
            .class_index(class)
            .ok_or_else(|| Error::UnknownClass(class.0.clone()))?;
        if x.len() != self.dataset.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dataset.dim(),
                found: x.len(),
            });
        }
        Ok(self.density_by_index(x, c))
    }

    /// Density of class index `c` at `x`; no validation.
    ///
    /// Terms are summed in ascending order so the value depends only on the
    /// multiset of member distances, not on row order.
    pub(crate) fn density_by_index(&self, x: &[f64], c: usize) -> f64 {
        let mut terms: Vec<f64> = self
            .dataset
            .members(c)
            .iter()
            .map(|&j| inverse_multiquadric(euclidean(self.dataset.coords(j), x), self.shape))
            .collect();
        terms.sort_by(f64::total_cmp);
        terms.iter().sum()
    }

    /// `rho_{c(i)}(x_i)` for every sample point, in index order.
    pub fn self_densities(&self) -> Vec<f64> {
        (0..self.dataset.len())
            .map(|i| self.density_by_index(self.dataset.coords(i), self.dataset.label(i)))
            .collect()
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Kernel shape heuristic: reciprocal of the median same-class pairwise
/// distance.
///
/// Falls back to all pairs when some class is a singleton, and to `1.0` when
/// the median distance is zero.
pub fn default_shape(ds: &Dataset) -> Result<f64> {
    if ds.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: ds.len(),
        });
    }
    let has_singleton = (0..ds.classes().len()).any(|c| ds.members(c).len() < 2);
    let mut dists = Vec::new();
    for i in 0..ds.len() {
        for j in (i + 1)..ds.len() {
            if has_singleton || ds.label(i) == ds.label(j) {
                dists.push(euclidean(ds.coords(i), ds.coords(j)));
            }
        }
    }
    let m = median(&mut dists);
    Ok(if m > 0.0 { 1.0 / m } else { 1.0 })
}
