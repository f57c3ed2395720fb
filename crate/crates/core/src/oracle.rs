//! Brute-force references for strict-mode expansion.
//!
//! Nothing here calls into the expansion code: distances, densities and the
//! growth schedule are recomputed from scratch so the two paths can be
//! compared.

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Largest radius increment of one simulation step.
    pub fine_step: f64,
    pub min_step: f64,
    /// Kernel shape used for the densities.
    pub shape: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            fine_step: 1e-4,
            min_step: 1e-20,
            shape: 1.0,
        }
    }
}

/// Total growth of a point that never meets a foreign ball:
/// `sum_{n=1}^{N} exp(-rho n)` with `N` the last sweep whose step exceeds
/// `min_step`.
pub fn isolated_radius(rho: f64, min_step: f64) -> f64 {
    let q = (-rho).exp();
    // N = max n with exp(-rho n) > min_step
    let mut last = (-min_step.ln() / rho).floor().max(0.0) as i64;
    while last > 0 && (-rho * last as f64).exp() <= min_step {
        last -= 1;
    }
    while (-rho * (last + 1) as f64).exp() > min_step {
        last += 1;
    }
    if last == 0 {
        return 0.0;
    }
    (q - (-rho * (last + 1) as f64).exp()) / (1.0 - q)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        let t = a[k] - b[k];
        s += t * t;
    }
    s.sqrt()
}

/// Own-class kernel sum at every point, by direct summation.
fn own_densities(ds: &Dataset, shape: f64) -> Vec<f64> {
    (0..ds.len())
        .map(|i| {
            let mut rho = 0.0;
            for j in 0..ds.len() {
                if ds.class_id(j) == ds.class_id(i) {
                    let r = dist(ds.coords(i), ds.coords(j));
                    rho += 1.0 / (1.0 + shape * shape * r * r).sqrt();
                }
            }
            rho
        })
        .collect()
}

/// Simulate strict-mode growth with many small increments.
///
/// Virtual sweep `n` hands each point a budget of `exp(-rho n)`. At the start
/// of the sweep every point is granted half of each cross-class gap, and a
/// point with no gap left stops. All radii then grow together in increments of
/// at most `fine_step`, each point halting when its budget runs out or when it
/// reaches its share of the nearest gap.
pub fn fine_step_expand(ds: &Dataset, cfg: &OracleConfig) -> Result<Vec<f64>> {
    if !(cfg.fine_step > 0.0 && cfg.min_step > 0.0 && cfg.shape > 0.0) {
        return Err(Error::InvalidParameter(
            "oracle steps and shape must be positive".into(),
        ));
    }
    let n_pts = ds.len();
    let rho = own_densities(ds, cfg.shape);
    let d: Vec<Vec<f64>> = (0..n_pts)
        .map(|i| {
            (0..n_pts)
                .map(|j| dist(ds.coords(i), ds.coords(j)))
                .collect()
        })
        .collect();
    let foreign = |i: usize, j: usize| ds.class_id(i) != ds.class_id(j);

    let mut eps = vec![0.0f64; n_pts];
    let mut done = vec![false; n_pts];
    let mut sweep = 0usize;
    while done.iter().any(|s| !s) {
        sweep += 1;
        // contact check and gap shares against the start-of-sweep radii
        let mut target = vec![0.0f64; n_pts];
        let mut contact = vec![false; n_pts];
        for i in 0..n_pts {
            if done[i] {
                continue;
            }
            let mut share = f64::INFINITY;
            for j in 0..n_pts {
                if foreign(i, j) {
                    if d[i][j] <= eps[i] + eps[j] {
                        contact[i] = true;
                    }
                    share = share.min((d[i][j] - eps[i] - eps[j]) / 2.0);
                }
            }
            target[i] = share;
        }
        for i in 0..n_pts {
            if done[i] {
                continue;
            }
            if contact[i] {
                done[i] = true;
                continue;
            }
            let budget = (-rho[i] * sweep as f64).exp();
            if budget <= cfg.min_step || target[i] <= 0.0 {
                done[i] = true;
                continue;
            }
            target[i] = target[i].min(budget);
        }

        let mut grown = vec![0.0f64; n_pts];
        loop {
            let mut moved = false;
            for i in 0..n_pts {
                if done[i] || grown[i] >= target[i] {
                    continue;
                }
                let inc = cfg.fine_step.min(target[i] - grown[i]);
                grown[i] += inc;
                eps[i] += inc;
                moved = true;
            }
            if !moved {
                break;
            }
        }
    }

    for i in 0..n_pts {
        let bound = isolated_radius(rho[i], cfg.min_step) + cfg.fine_step;
        if eps[i] > bound {
            return Err(Error::OracleBudget {
                index: i,
                radius: eps[i],
                bound,
            });
        }
    }
    Ok(eps)
}
