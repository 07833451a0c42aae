//! F1 scoring of detected boundary sets against ground-truth collar regions.

use crate::baselines::CpsDistances;

/// F1 scores over a radius grid.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct F1Report {
    pub per_r: Vec<(f64, f64)>,
    pub f1_max: f64,
    pub best_r: f64,
    pub detector: String,
}

/// Default number of grid radii `r_i = 0.05 i`.
pub const DEFAULT_GRID_K: usize = 40;

pub fn grid(k: usize) -> Vec<f64> {
    (1..=k).map(|i| 0.05 * i as f64).collect()
}

/// `2 |detected ∩ C_r| / (|detected| + |C_r|)` with collar
/// `C_r = {i : dist_gt[i] <= r}`; zero when both sets are empty.
pub fn f1(detected: &[usize], dist_gt: &[f64], r: f64) -> f64 {
    let collar = dist_gt.iter().filter(|&&d| d <= r).count();
    let hits = detected.iter().filter(|&&i| dist_gt[i] <= r).count();
    let denom = detected.len() + collar;
    if denom == 0 {
        0.0
    } else {
        2.0 * hits as f64 / denom as f64
    }
}

/// Maximum F1 over the grid; ties resolve to the smallest radius.
pub fn f1_max(detected: &[usize], dist_gt: &[f64], k: usize, detector: &str) -> F1Report {
    let per_r: Vec<(f64, f64)> = grid(k)
        .into_iter()
        .map(|r| (r, f1(detected, dist_gt, r)))
        .collect();
    let (best_r, f1_max) = per_r
        .iter()
        .fold((per_r[0].0, f64::NEG_INFINITY), |(br, bf), &(r, f)| {
            if f > bf {
                (r, f)
            } else {
                (br, bf)
            }
        });
    F1Report {
        per_r,
        f1_max,
        best_r,
        detector: detector.into(),
    }
}

/// CPS variant: the detected set is re-thresholded at every grid radius,
/// `F1_max = max_i F1({k : d_hat_k < r_i}, r_i)`.
pub fn f1_max_cps(cps: &CpsDistances, dist_gt: &[f64], k: usize) -> F1Report {
    let per_r: Vec<(f64, f64)> = grid(k)
        .into_iter()
        .map(|r| {
            let detected: Vec<usize> = cps
                .d_hat
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v < r)
                .map(|(i, _)| i)
                .collect();
            (r, f1(&detected, dist_gt, r))
        })
        .collect();
    let (best_r, f1_max) = per_r
        .iter()
        .fold((per_r[0].0, f64::NEG_INFINITY), |(br, bf), &(r, f)| {
            if f > bf {
                (r, f)
            } else {
                (br, bf)
            }
        });
    F1Report {
        per_r,
        f1_max,
        best_r,
        detector: "cps".into(),
    }
}
