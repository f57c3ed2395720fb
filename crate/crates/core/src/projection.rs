//! Two-component principal projection for plot export.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dataset::Dataset;

/// Project every point onto the first two principal axes of the centered
/// data. Axis signs are fixed so the largest-magnitude loading is positive.
/// One-dimensional data gets a zero second coordinate.
pub fn principal_2d(ds: &Dataset) -> Vec<[f64; 2]> {
    let (n, dim) = (ds.len(), ds.dim());
    let mut mean = vec![0.0; dim];
    for p in ds.points() {
        for (m, v) in mean.iter_mut().zip(&p.coords) {
            *m += v / n as f64;
        }
    }
    let centered = DMatrix::from_fn(n, dim, |i, k| ds.coords(i)[k] - mean[k]);
    let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let axis = |rank: usize| -> Option<Vec<f64>> {
        let col = eig.eigenvectors.column(*order.get(rank)?);
        let mut v: Vec<f64> = col.iter().copied().collect();
        let pivot = v
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        Some(v)
    };
    let axes = [axis(0), axis(1)];

    (0..n)
        .map(|i| {
            let row = centered.row(i);
            let mut out = [0.0; 2];
            for (o, a) in out.iter_mut().zip(&axes) {
                if let Some(a) = a {
                    *o = row.iter().zip(a).map(|(x, w)| x * w).sum();
                }
            }
            out
        })
        .collect()
}
