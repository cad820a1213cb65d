//! Inverse-distance weighted k-nearest-neighbour regression.

use super::linalg::Matrix;
use super::Metric;

/// Predicts one query point from the stored training set.
///
/// Neighbours are ranked by `(distance, row index)` so equal distances
/// resolve the same way on every platform. Weights are `1/d`; when any of
/// the k selected neighbours sits at distance zero, the prediction is the
/// plain average of those exact matches instead.
pub fn predict_one(x: &Matrix, y: &[f64], k: usize, metric: Metric, query: &[f64]) -> f64 {
    debug_assert!(k >= 1 && k <= x.rows());
    let mut ranked: Vec<(f64, usize)> = x
        .row_iter()
        .enumerate()
        .map(|(i, row)| (metric.distance(row, query), i))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let selected = &ranked[..k];

    let exact: Vec<usize> = selected
        .iter()
        .filter(|(d, _)| *d == 0.0)
        .map(|&(_, i)| i)
        .collect();
    if !exact.is_empty() {
        return exact.iter().map(|&i| y[i]).sum::<f64>() / exact.len() as f64;
    }

    let mut weighted = 0.0;
    let mut total = 0.0;
    for &(d, i) in selected {
        let w = 1.0 / d;
        weighted += w * y[i];
        total += w;
    }
    weighted / total
}
