//! Post-hoc evaluation of a radius vector: the per-point non-intersection
//! slack, ball volumes, and a least-squares fit of volume against density.

use serde::{Deserialize, Serialize};

use crate::dataset::{euclidean, Dataset};
use crate::error::{Error, Result};

fn check_len(ds: &Dataset, eps: &[f64]) -> Result<()> {
    if eps.len() != ds.len() {
        return Err(Error::LengthMismatch {
            expected: ds.len(),
            found: eps.len(),
        });
    }
    if let Some(bad) = eps.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "radii must be non-negative and finite, got {bad}"
        )));
    }
    Ok(())
}

/// Per-point sum of `min(d(x_i, x_j) - (eps_i + eps_j), 0)` over every `j` of
/// another class. Zero means the ball of `i` overlaps no foreign ball.
pub fn g_eval(ds: &Dataset, eps: &[f64]) -> Result<Vec<f64>> {
    check_len(ds, eps)?;
    Ok((0..ds.len())
        .map(|i| {
            (0..ds.len())
                .filter(|&j| j != i && ds.label(j) != ds.label(i))
                .map(|j| (euclidean(ds.coords(i), ds.coords(j)) - (eps[i] + eps[j])).min(0.0))
                .sum()
        })
        .collect())
}

/// Cross-class pair with the smallest slack `d - (eps_i + eps_j)`, `i < j`.
pub fn worst_pair(ds: &Dataset, eps: &[f64]) -> Result<Option<PairSlack>> {
    check_len(ds, eps)?;
    let mut worst: Option<PairSlack> = None;
    for (i, j) in crate::dataset::cross_class_pairs(ds) {
        let slack = euclidean(ds.coords(i), ds.coords(j)) - (eps[i] + eps[j]);
        if worst.is_none_or(|w| slack < w.slack) {
            worst = Some(PairSlack { i, j, slack });
        }
    }
    Ok(worst)
}

/// Ball "volume" `eps^D`, without the unit-ball constant.
pub fn volume(eps: f64, dim: u32) -> f64 {
    eps.powi(dim as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSlack {
    pub i: usize,
    pub j: usize,
    pub slack: f64,
}

/// Least-squares fit `volume ~ alpha * density - beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub alpha: f64,
    pub beta: f64,
    /// `volume - (alpha * density - beta)` per point.
    pub residuals: Vec<f64>,
    pub r_squared: f64,
}

pub fn fit_alpha_beta(volumes: &[f64], densities: &[f64]) -> Result<LinearFit> {
    if volumes.len() != densities.len() {
        return Err(Error::LengthMismatch {
            expected: volumes.len(),
            found: densities.len(),
        });
    }
    let n = volumes.len();
    if n < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: n,
        });
    }
    let nf = n as f64;
    let mean_v = volumes.iter().sum::<f64>() / nf;
    let mean_d = densities.iter().sum::<f64>() / nf;
    let (mut sdd, mut sdv, mut svv) = (0.0, 0.0, 0.0);
    for (v, d) in volumes.iter().zip(densities) {
        let (dv, dd) = (v - mean_v, d - mean_d);
        sdd += dd * dd;
        sdv += dd * dv;
        svv += dv * dv;
    }
    if sdd == 0.0 {
        // the model collapses to volume ~ -beta
        return Err(Error::DegenerateFit { beta: -mean_v });
    }
    let alpha = sdv / sdd;
    let beta = alpha * mean_d - mean_v;
    let residuals: Vec<f64> = volumes
        .iter()
        .zip(densities)
        .map(|(v, d)| v - (alpha * d - beta))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if svv > 0.0 { 1.0 - ss_res / svv } else { 1.0 };
    Ok(LinearFit {
        alpha,
        beta,
        residuals,
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub g_slack: Vec<f64>,
    pub worst_pair: Option<PairSlack>,
    pub volumes: Vec<f64>,
    /// `None` when all densities are equal.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub h_residuals: Vec<f64>,
    pub r_squared: Option<f64>,
    /// Cross-class pairs with slack below `-tolerance`.
    pub overlapping_pairs: usize,
    pub tolerance: f64,
}

impl DiagnosticsReport {
    pub fn build(ds: &Dataset, eps: &[f64], densities: &[f64], tolerance: f64) -> Result<Self> {
        let g_slack = g_eval(ds, eps)?;
        if densities.len() != ds.len() {
            return Err(Error::LengthMismatch {
                expected: ds.len(),
                found: densities.len(),
            });
        }
        let worst_pair = worst_pair(ds, eps)?;
        let overlapping_pairs = crate::dataset::cross_class_pairs(ds)
            .filter(|&(i, j)| {
                euclidean(ds.coords(i), ds.coords(j)) - (eps[i] + eps[j]) < -tolerance
            })
            .count();
        let volumes: Vec<f64> = eps.iter().map(|&e| volume(e, ds.dim() as u32)).collect();
        let (alpha, beta, h_residuals, r_squared) = match fit_alpha_beta(&volumes, densities) {
            Ok(fit) => (
                Some(fit.alpha),
                fit.beta,
                fit.residuals,
                Some(fit.r_squared),
            ),
            Err(Error::DegenerateFit { beta }) => {
                let residuals = volumes.iter().map(|v| v + beta).collect();
                (None, beta, residuals, None)
            }
            Err(e) => return Err(e),
        };
        Ok(DiagnosticsReport {
            g_slack,
            worst_pair,
            volumes,
            alpha,
            beta,
            h_residuals,
            r_squared,
            overlapping_pairs,
            tolerance,
        })
    }

    pub fn is_feasible(&self) -> bool {
        self.overlapping_pairs == 0
    }
}
