//! Six reference boundary detectors used for comparison: BORDER, BRIM, BAND,
//! SPINVER, LEVER, and CPS.
//!
//! Thresholds follow the percentile rules stated with each detector; all
//! percentiles use the nearest-rank method so results are deterministic and
//! interpolation-free.

use rayon::prelude::*;

use crate::bdlle::{local_covariance_spectrum_with_vectors, local_data_matrix};
use crate::error::Result;
use crate::oracles::sphere_volume;
use crate::pointcloud::{all_neighbors, NeighborIndex, NeighborParams, NeighborSet, PointCloud};

/// Output of one detector: the detected set plus the raw per-point statistic.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BaselineResult {
    pub name: String,
    pub boundary_indices: Vec<usize>,
    /// One row per statistic the detector thresholds on.
    pub scores: Vec<Vec<f64>>,
}

/// Value at the q-th percentile of `values` by the nearest-rank method:
/// the element at rank `ceil(q/100 * n)` of the ascending sort.
pub fn percentile_nearest_rank(values: &[f64], q: f64) -> f64 {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = (q / 100.0 * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// BORDER: boundary points have few reverse K nearest neighbors.
pub fn border(cloud: &PointCloud, k: usize, pct: f64) -> Result<BaselineResult> {
    let index = NeighborIndex::build(cloud);
    let nbrs = all_neighbors(&index, NeighborParams::Knn { k })?;
    let mut reverse = vec![0f64; cloud.n()];
    for nb in &nbrs {
        for &i in &nb.indices {
            reverse[i] += 1.0;
        }
    }
    let delta = percentile_nearest_rank(&reverse, pct);
    let boundary_indices = (0..cloud.n()).filter(|&i| reverse[i] < delta).collect();
    Ok(BaselineResult {
        name: "border".into(),
        boundary_indices,
        scores: vec![reverse],
    })
}

/// BRIM: compares the neighbor counts on either side of the densest neighbor.
pub fn brim(cloud: &PointCloud, epsilon: f64, pct: f64) -> Result<BaselineResult> {
    let index = NeighborIndex::build(cloud);
    let nbrs = all_neighbors(&index, NeighborParams::EpsilonBall { epsilon })?;
    let counts: Vec<usize> = nbrs.iter().map(NeighborSet::count).collect();
    let bd: Vec<f64> = nbrs
        .par_iter()
        .map(|nb| {
            // Attractor: neighbor with the largest own count, ties to the
            // lowest index.
            let att = *nb
                .indices
                .iter()
                .max_by(|&&a, &&b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
                .unwrap();
            let zk = cloud.point(nb.center);
            let va: Vec<f64> = cloud.point(att).iter().zip(zk).map(|(x, y)| x - y).collect();
            let na = norm(&va);
            let mut pn = 0usize;
            let mut nn = 0usize;
            for &i in &nb.indices {
                if i == att {
                    // Angle of the attractor against itself is 0.
                    pn += 1;
                    continue;
                }
                let vi: Vec<f64> = cloud.point(i).iter().zip(zk).map(|(x, y)| x - y).collect();
                let cos = dot(&vi, &va) / (norm(&vi) * na);
                if cos >= 0.0 {
                    pn += 1;
                } else {
                    nn += 1;
                }
            }
            let ratio = if nn == 0 { pn as f64 } else { pn as f64 / nn as f64 };
            ratio * (pn as f64 - nn as f64).abs()
        })
        .collect();
    let delta = percentile_nearest_rank(&bd, pct);
    let boundary_indices = (0..cloud.n()).filter(|&i| bd[i] > delta).collect();
    Ok(BaselineResult {
        name: "brim".into(),
        boundary_indices,
        scores: vec![bd],
    })
}

/// BAND: low inverse-average-distance density plus high local variance of it.
pub fn band(cloud: &PointCloud, k: usize, pct_low: f64, pct_high: f64) -> Result<BaselineResult> {
    let index = NeighborIndex::build(cloud);
    let nbrs = all_neighbors(&index, NeighborParams::Knn { k })?;
    let d: Vec<f64> = nbrs
        .par_iter()
        .map(|nb| nb.count() as f64 / nb.distances.iter().sum::<f64>())
        .collect();
    let vd: Vec<f64> = nbrs
        .par_iter()
        .map(|nb| {
            // Population variance of D over the center and its neighbors.
            let m = nb.count() + 1;
            let mean = (d[nb.center] + nb.indices.iter().map(|&i| d[i]).sum::<f64>()) / m as f64;
            let mut ss = (d[nb.center] - mean).powi(2);
            for &i in &nb.indices {
                ss += (d[i] - mean).powi(2);
            }
            ss / m as f64
        })
        .collect();
    let delta = percentile_nearest_rank(&d, pct_low);
    let delta2 = percentile_nearest_rank(&vd, pct_high);
    let boundary_indices = (0..cloud.n())
        .filter(|&i| d[i] < delta && vd[i] > delta2)
        .collect();
    Ok(BaselineResult {
        name: "band".into(),
        boundary_indices,
        scores: vec![d, vd],
    })
}

/// SPINVER: large L1 offset sum plus low density proxy.
pub fn spinver(cloud: &PointCloud, k: usize, pct_s: f64, pct_f: f64) -> Result<BaselineResult> {
    let index = NeighborIndex::build(cloud);
    let nbrs = all_neighbors(&index, NeighborParams::Knn { k })?;
    let stats: Vec<(f64, f64)> = nbrs
        .par_iter()
        .map(|nb| {
            let zk = cloud.point(nb.center);
            let mut sum = vec![0.0; cloud.p()];
            let mut sq = 0.0;
            for &i in &nb.indices {
                for (s, (x, y)) in sum.iter_mut().zip(cloud.point(i).iter().zip(zk)) {
                    *s += x - y;
                }
            }
            for &di in &nb.distances {
                sq += di * di;
            }
            let s: f64 = sum.iter().map(|v| v.abs()).sum();
            // Gaussian-style density proxy: small in sparse (boundary)
            // neighborhoods, so the low-percentile cut selects the boundary.
            (s, (-sq / nb.count() as f64).exp())
        })
        .collect();
    let s: Vec<f64> = stats.iter().map(|&(a, _)| a).collect();
    let f: Vec<f64> = stats.iter().map(|&(_, b)| b).collect();
    let delta = percentile_nearest_rank(&s, pct_s);
    let delta2 = percentile_nearest_rank(&f, pct_f);
    let boundary_indices = (0..cloud.n())
        .filter(|&i| s[i] > delta && f[i] < delta2)
        .collect();
    Ok(BaselineResult {
        name: "spinver".into(),
        boundary_indices,
        scores: vec![s, f],
    })
}

/// LEVER: L1 distance to the neighborhood mean plus an exponential density
/// proxy. `H(z_k) * N_k` equals the SPINVER `s(z_k)` statistic.
pub fn lever(cloud: &PointCloud, k: usize, pct_h: f64, pct_d: f64) -> Result<BaselineResult> {
    let index = NeighborIndex::build(cloud);
    let nbrs = all_neighbors(&index, NeighborParams::Knn { k })?;
    let stats: Vec<(f64, f64)> = nbrs
        .par_iter()
        .map(|nb| {
            let zk = cloud.point(nb.center);
            let mut mean = vec![0.0; cloud.p()];
            for &i in &nb.indices {
                for (m, x) in mean.iter_mut().zip(cloud.point(i)) {
                    *m += x;
                }
            }
            let nk = nb.count() as f64;
            let h: f64 = mean
                .iter()
                .zip(zk)
                .map(|(m, y)| (y - m / nk).abs())
                .sum();
            // Density proxy decays with distance for the same reason as the
            // exponential statistic above.
            let dens: f64 = nb.distances.iter().map(|di| (-di).exp()).sum();
            (h, dens)
        })
        .collect();
    let h: Vec<f64> = stats.iter().map(|&(a, _)| a).collect();
    let dens: Vec<f64> = stats.iter().map(|&(_, b)| b).collect();
    let delta = percentile_nearest_rank(&h, pct_h);
    let delta2 = percentile_nearest_rank(&dens, pct_d);
    let boundary_indices = (0..cloud.n())
        .filter(|&i| h[i] > delta && dens[i] < delta2)
        .collect();
    Ok(BaselineResult {
        name: "lever".into(),
        boundary_indices,
        scores: vec![h, dens],
    })
}

/// Per-point boundary-distance estimates from the CPS construction.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CpsDistances {
    pub d_hat: Vec<f64>,
    pub tangent_dim: usize,
}

/// CPS: estimates the distance to the boundary from a density-corrected
/// inward-direction field projected onto the estimated tangent space.
pub fn cps_distances(cloud: &PointCloud, epsilon: f64, d: usize) -> Result<CpsDistances> {
    let index = NeighborIndex::build(cloud);
    let nbrs = all_neighbors(&index, NeighborParams::EpsilonBall { epsilon })?;
    // Half-radius counts include the center so every divisor is positive.
    let half_counts: Vec<f64> = (0..cloud.n())
        .into_par_iter()
        .map(|i| match index.epsilon_neighbors(i, epsilon / 2.0) {
            Ok(nb) => (nb.count() + 1) as f64,
            Err(_) => 1.0,
        })
        .collect();
    let scale = sphere_volume(d - 1) / d as f64 * (epsilon / 2.0).powi(d as i32);
    let v_hat: Vec<Option<Vec<f64>>> = nbrs
        .par_iter()
        .map(|nb| {
            let zk = cloud.point(nb.center);
            let mut v = vec![0.0; cloud.p()];
            for &i in &nb.indices {
                let w = scale / half_counts[i];
                for (a, (x, y)) in v.iter_mut().zip(cloud.point(i).iter().zip(zk)) {
                    *a += w * (x - y);
                }
            }
            let nv = norm(&v);
            (nv > 0.0).then(|| {
                v.iter_mut().for_each(|a| *a /= nv);
                v
            })
        })
        .collect();
    let d_hat: Vec<f64> = nbrs
        .par_iter()
        .map(|nb| {
            let Some(vk) = v_hat[nb.center].as_ref() else {
                // Direction undefined; treat as deep interior.
                return Ok(f64::INFINITY);
            };
            let g = local_data_matrix(cloud, nb)?;
            let spec = local_covariance_spectrum_with_vectors(&g);
            let u = spec.eigenvectors.as_ref().unwrap();
            let dim = d.min(spec.rank);
            let proj = |v: &[f64]| -> Vec<f64> {
                let mut out = vec![0.0; cloud.p()];
                for c in 0..dim {
                    let col = u.column(c);
                    let coef: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
                    for (o, b) in out.iter_mut().zip(col.iter()) {
                        *o += coef * b;
                    }
                }
                out
            };
            let pvk = proj(vk);
            let zk = cloud.point(nb.center);
            let mut best = f64::NEG_INFINITY;
            for &i in &nb.indices {
                // z_k - z_i: the max over neighbors then estimates the
                // distance to the boundary (near zero at the boundary).
                let diff: Vec<f64> = zk.iter().zip(cloud.point(i)).map(|(x, y)| x - y).collect();
                let pdiff = proj(&diff);
                let mut dir = vk.clone();
                if let Some(vi) = v_hat[i].as_ref() {
                    let pvi = proj(vi);
                    if dot(&pvi, &pvk) > 0.0 {
                        for (a, (x, y)) in dir.iter_mut().zip(vi.iter().zip(vk)) {
                            *a = y + 0.5 * (x - y);
                        }
                    }
                }
                best = best.max(dot(&pdiff, &dir));
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    Ok(CpsDistances {
        d_hat,
        tangent_dim: d,
    })
}

/// Thresholds the CPS distance estimates at radius r.
pub fn cps_detect(dists: &CpsDistances, r: f64) -> BaselineResult {
    let boundary_indices = dists
        .d_hat
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v < r)
        .map(|(i, _)| i)
        .collect();
    BaselineResult {
        name: "cps".into(),
        boundary_indices,
        scores: vec![dists.d_hat.clone()],
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
