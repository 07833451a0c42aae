//! Boundary detection through regularized barycentric coordinates, with the
//! local-covariance machinery and the parameter-selection rules that go with
//! it.
//!
//! For each point the local data matrix `G` collects the neighbor offsets.
//! The indicator solves the small SPD system `(G^T G + c I) y = 1` and sets
//! `B_k = (N_k - c y^T 1) / N_k`. Points with `B_k` above a fraction of the
//! maximum are reported as boundary points.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pointcloud::{all_neighbors, NeighborIndex, NeighborParams, NeighborSet, PointCloud};

/// Relative cut below which an eigenvalue counts as zero for rank decisions.
pub const RANK_RTOL: f64 = 1e-12;

/// `p x N_k` matrix whose j-th column is `z_{k,j} - z_k`.
#[derive(Debug, Clone)]
pub struct LocalDataMatrix {
    pub columns: DMatrix<f64>,
    pub center: usize,
}

pub fn local_data_matrix(cloud: &PointCloud, nbrs: &NeighborSet) -> Result<LocalDataMatrix> {
    if nbrs.indices.is_empty() {
        return Err(Error::EmptyNeighborhood { index: nbrs.center });
    }
    let p = cloud.p();
    let center = cloud.point(nbrs.center);
    let mut columns = DMatrix::zeros(p, nbrs.indices.len());
    for (j, &i) in nbrs.indices.iter().enumerate() {
        let zi = cloud.point(i);
        for a in 0..p {
            columns[(a, j)] = zi[a] - center[a];
        }
    }
    Ok(LocalDataMatrix {
        columns,
        center: nbrs.center,
    })
}

/// Sorted spectrum of the local covariance matrix `C = G G^T`.
#[derive(Debug, Clone)]
pub struct LocalSpectrum {
    /// All `p` eigenvalues, descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Numerical rank: eigenvalues above `RANK_RTOL * lambda_1`.
    pub rank: usize,
    /// Orthonormal eigenvectors for the nonzero eigenvalues, one column per
    /// retained eigenvalue. Only present when requested.
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl LocalSpectrum {
    fn from_eigs(mut eigs: Vec<f64>, p: usize, vecs: Option<DMatrix<f64>>) -> Self {
        for v in eigs.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        eigs.resize(p, 0.0);
        let lead = eigs.first().copied().unwrap_or(0.0);
        let rank = eigs.iter().filter(|&&v| v > RANK_RTOL * lead && v > 0.0).count();
        LocalSpectrum {
            eigenvalues: eigs,
            rank,
            eigenvectors: vecs,
        }
    }
}

/// Eigenvalues of `G G^T` as squared singular values of `G`, computed on the
/// smaller Gram side so the `p x p` product is never formed when `p >> N_k`.
pub fn local_covariance_spectrum(g: &LocalDataMatrix) -> LocalSpectrum {
    spectrum_impl(g, false)
}

/// Same as [`local_covariance_spectrum`] but keeps the eigenvectors of the
/// nonzero eigenvalues (needed by the pseudo-inverse and tangent estimates).
pub fn local_covariance_spectrum_with_vectors(g: &LocalDataMatrix) -> LocalSpectrum {
    spectrum_impl(g, true)
}

fn spectrum_impl(g: &LocalDataMatrix, want_vectors: bool) -> LocalSpectrum {
    let (p, m) = g.columns.shape();
    if p <= m {
        let c = &g.columns * g.columns.transpose();
        let eig = c.symmetric_eigen();
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let eigs: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = want_vectors.then(|| {
            let lead = eigs.first().copied().unwrap_or(0.0).max(0.0);
            let r = eigs.iter().filter(|&&v| v > RANK_RTOL * lead && v > 0.0).count();
            let mut u = DMatrix::zeros(p, r);
            for (col, &i) in order.iter().take(r).enumerate() {
                u.set_column(col, &eig.eigenvectors.column(i));
            }
            u
        });
        LocalSpectrum::from_eigs(eigs, p, vecs)
    } else {
        // Gram side: eigen of G^T G, map v -> G v / sqrt(lambda).
        let gram = g.columns.transpose() * &g.columns;
        let eig = gram.symmetric_eigen();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let eigs: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = want_vectors.then(|| {
            let lead = eigs.first().copied().unwrap_or(0.0).max(0.0);
            let r = eigs.iter().filter(|&&v| v > RANK_RTOL * lead && v > 0.0).count();
            let mut u = DMatrix::zeros(p, r);
            for (col, &i) in order.iter().take(r).enumerate() {
                let v = eig.eigenvectors.column(i);
                let gu = &g.columns * v;
                u.set_column(col, &(gu / eigs[col].sqrt()));
            }
            u
        });
        LocalSpectrum::from_eigs(eigs, p, vecs)
    }
}

/// Regularized pseudo-inverse `U I_{p,r} (Lambda + c I)^{-1} U^T`.
pub fn regularized_pseudo_inverse(spec: &LocalSpectrum, c: f64, p: usize) -> Result<DMatrix<f64>> {
    let u = spec.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    let mut out = DMatrix::zeros(p, p);
    for i in 0..spec.rank {
        let ui = u.column(i);
        let w = 1.0 / (spec.eigenvalues[i] + c);
        // out += w * ui ui^T
        for a in 0..p {
            for b in 0..p {
                out[(a, b)] += w * ui[a] * ui[b];
            }
        }
    }
    Ok(out)
}

/// Indicator value at one point from the SPD solve
/// `(G^T G + c I) y = 1`, `B_k = (N_k - c y^T 1) / N_k`.
pub fn boundary_indicator_at(g: &LocalDataMatrix, c: f64) -> Result<f64> {
    let y = solve_barycentric_system(g, c)?;
    let nk = g.columns.ncols() as f64;
    // N_k - c 1^T y = 1^T (G^T G) y = (G 1)^T (G y): same value, but free of
    // the cancellation that loses relative accuracy when B_k is small.
    let g1 = &g.columns * DVector::from_element(g.columns.ncols(), 1.0);
    let gy = &g.columns * y;
    Ok(g1.dot(&gy) / nk)
}

fn solve_barycentric_system(g: &LocalDataMatrix, c: f64) -> Result<DVector<f64>> {
    let m = g.columns.ncols();
    let mut gram = g.columns.transpose() * &g.columns;
    for i in 0..m {
        gram[(i, i)] += c;
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::SolveFailure("G^T G + cI not positive definite".into()))?;
    Ok(chol.solve(&DVector::from_element(m, 1.0)))
}

/// Indicator value through the pseudo-inverse identity
/// `1^T G^T I_c(C) G 1 / N_k`; cross-check path for small instances.
pub fn boundary_indicator_pseudo_inverse(g: &LocalDataMatrix, c: f64) -> Result<f64> {
    let spec = local_covariance_spectrum_with_vectors(g);
    let p = g.columns.nrows();
    let ic = regularized_pseudo_inverse(&spec, c, p)?;
    let g1 = &g.columns * DVector::from_element(g.columns.ncols(), 1.0);
    let value = (g1.transpose() * ic * &g1)[(0, 0)];
    Ok(value / g.columns.ncols() as f64)
}

/// Normalized barycentric weights `w = y / (y^T 1)`.
#[derive(Debug, Clone)]
pub struct BarycentricSolution {
    pub y: Vec<f64>,
    pub w: Vec<f64>,
}

pub fn barycentric_weights(g: &LocalDataMatrix, c: f64) -> Result<BarycentricSolution> {
    let y = solve_barycentric_system(g, c)?;
    let total = y.sum();
    if total.abs() < 1e-14 * y.len() as f64 {
        return Err(Error::DegenerateNormalization { value: total });
    }
    let w = y.iter().map(|v| v / total).collect();
    Ok(BarycentricSolution {
        y: y.iter().copied().collect(),
        w,
    })
}

/// How the regularizer was obtained.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum RegProvenance {
    Explicit,
    /// Geometric mean of the d-th and (d+1)-th eigenvalue sums.
    SpectralGap,
    /// Scaled d-th eigenvalue sum, used when only d eigenvalues are nonzero.
    DNonzero,
    /// Theoretical order `n eps^{d+3}` or `n (K/n)^{(d+3)/d}`.
    Theoretical,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Regularizer {
    pub c: f64,
    pub provenance: RegProvenance,
}

/// Default scale factor for the d-nonzero branch.
pub const DEFAULT_S_FACTOR: f64 = 0.01;

/// The scale factor must stay below the neighborhood scale (epsilon, or
/// `(K/n)^{1/d}` under KNN); halves the scale when the configured factor
/// is not already below it.
pub fn clamp_s_factor(s: f64, scheme_scale: f64) -> f64 {
    if s < scheme_scale {
        s
    } else {
        0.5 * scheme_scale
    }
}

/// Data-driven regularizer from the per-point covariance spectra.
///
/// If `d < p` and some point has a nonzero (d+1)-th eigenvalue, takes the
/// geometric mean `(1/n) sqrt(sum lambda_d * sum lambda_{d+1})`; otherwise
/// `(s/n) sum lambda_d`.
pub fn select_regularizer(
    cloud: &PointCloud,
    all_nbrs: &[NeighborSet],
    d: usize,
    s_factor: f64,
) -> Result<Regularizer> {
    let spectra: Vec<Vec<f64>> = all_nbrs
        .par_iter()
        .map(|nb| {
            let g = local_data_matrix(cloud, nb)?;
            Ok(local_covariance_spectrum(&g).eigenvalues)
        })
        .collect::<Result<_>>()?;
    select_regularizer_from_spectra(&spectra, cloud.p(), d, s_factor)
}

pub fn select_regularizer_from_spectra(
    spectra: &[Vec<f64>],
    p: usize,
    d: usize,
    s_factor: f64,
) -> Result<Regularizer> {
    let n = spectra.len() as f64;
    let sum_d: f64 = spectra.iter().map(|s| s[d - 1]).sum();
    if sum_d <= 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    let next_nonzero = d < p
        && spectra
            .iter()
            .any(|s| s[d] > RANK_RTOL * s[0] && s[d] > 0.0);
    if next_nonzero {
        let sum_d1: f64 = spectra.iter().map(|s| s[d]).sum();
        Ok(Regularizer {
            c: (sum_d * sum_d1).sqrt() / n,
            provenance: RegProvenance::SpectralGap,
        })
    } else {
        Ok(Regularizer {
            c: s_factor / n * sum_d,
            provenance: RegProvenance::DNonzero,
        })
    }
}

/// `K = ceil(n^{1/(1+d/2)})`, clamped to `[1, n-1]`.
pub fn select_k(n: usize, d: usize) -> usize {
    if n < 2 {
        return 1;
    }
    let exponent = 1.0 / (1.0 + d as f64 / 2.0);
    let k = (n as f64).powf(exponent).ceil() as usize;
    k.clamp(1, n - 1)
}

/// `(median, max)` of the K-distances with `K = select_k(n, d)`.
pub fn select_epsilon_range(index: &NeighborIndex, d: usize) -> Result<(f64, f64)> {
    let n = index.cloud().n();
    let k = select_k(n, d);
    let mut radii: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| index.k_distance(i, k))
        .collect::<Result<_>>()?;
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if n % 2 == 1 {
        radii[n / 2]
    } else {
        0.5 * (radii[n / 2 - 1] + radii[n / 2])
    };
    Ok((median, radii[n - 1]))
}

/// Per-point indicator values with the parameters that produced them.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BoundaryIndicator {
    pub values: Vec<f64>,
    pub params: NeighborParams,
    pub c: Regularizer,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BoundaryReport {
    pub boundary_indices: Vec<usize>,
    pub threshold: f64,
    pub indicator: BoundaryIndicator,
}

/// Full detection pass: neighborhoods, indicator values, threshold at
/// `threshold_frac * max B` (1/2 by default).
pub fn detect_boundary(
    cloud: &PointCloud,
    params: NeighborParams,
    c: Regularizer,
    threshold_frac: f64,
) -> Result<BoundaryReport> {
    let index = NeighborIndex::build(cloud);
    let nbrs = all_neighbors(&index, params)?;
    detect_boundary_with_neighbors(cloud, &nbrs, params, c, threshold_frac)
}

pub fn detect_boundary_with_neighbors(
    cloud: &PointCloud,
    nbrs: &[NeighborSet],
    params: NeighborParams,
    c: Regularizer,
    threshold_frac: f64,
) -> Result<BoundaryReport> {
    let values: Vec<f64> = nbrs
        .par_iter()
        .map(|nb| {
            let g = local_data_matrix(cloud, nb)?;
            boundary_indicator_at(&g, c.c)
        })
        .collect::<Result<_>>()?;
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = threshold_frac * max;
    let boundary_indices = values
        .iter()
        .enumerate()
        .filter(|&(_, &b)| b >= threshold)
        .map(|(i, _)| i)
        .collect();
    Ok(BoundaryReport {
        boundary_indices,
        threshold,
        indicator: BoundaryIndicator { values, params, c },
    })
}
