//! Diffusion-maps embedding with alpha=1 density normalization, and the
//! denoise-then-detect pipeline built on it.
//!
//! The non-symmetric operator `D^{-1} W` is diagonalized through its
//! symmetric conjugate `D^{-1/2} W D^{-1/2}`; eigenvectors are mapped back
//! by `D^{-1/2}` scaling.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::bdlle::BoundaryReport;
use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DmParams {
    /// Kernel bandwidth; the kernel is `exp(-|z-z'|^2 / (4 eps_dm^2))`.
    pub eps_dm: f64,
    /// Embedding dimension: coordinates V_1..V_l.
    pub l: usize,
    /// Optional cap applied by callers that subsample before embedding.
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct DmEmbedding {
    /// Row i holds (V_1(i), ..., V_l(i)).
    pub coords: PointCloud,
    /// Laplacian eigenvalues lambda_0..lambda_l, ascending.
    pub eigenvalues: Vec<f64>,
}

impl DmParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.eps_dm > 0.0) {
            return Err(Error::InvalidParams(format!("eps_dm={}", self.eps_dm)));
        }
        if self.l < 1 || self.l + 1 > n {
            return Err(Error::InvalidParams(format!("l={} with n={n}", self.l)));
        }
        Ok(())
    }
}

/// Embeds the cloud through the alpha=1 kernel-normalized graph Laplacian,
/// returning the coordinates (V_1..V_l) and eigenvalues lambda_0..lambda_l.
pub fn dm_embed(cloud: &PointCloud, params: &DmParams) -> Result<DmEmbedding> {
    params.validate(cloud.n())?;
    let n = cloud.n();
    let denom = 4.0 * params.eps_dm * params.eps_dm;

    let mut kernel = DMatrix::zeros(n, n);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = cloud.distance(i, j);
                    (-d * d / denom).exp()
                })
                .collect()
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            kernel[(i, j)] = v;
        }
    }

    let q: Vec<f64> = (0..n).map(|i| kernel.row(i).sum()).collect();
    if q.iter().any(|&v| v <= 0.0) {
        return Err(Error::EigenFailure("zero kernel row sum".into()));
    }
    // W_ij = k_ij / (q_i q_j), D_ii = sum_j W_ij.
    let mut w = kernel;
    for i in 0..n {
        for j in 0..n {
            w[(i, j)] /= q[i] * q[j];
        }
    }
    let d_diag: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    let d_isqrt: Vec<f64> = d_diag.iter().map(|&v| 1.0 / v.sqrt()).collect();
    // Symmetric conjugate S = D^{-1/2} W D^{-1/2}.
    let mut s = w;
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] *= d_isqrt[i] * d_isqrt[j];
        }
    }

    let eig = s.symmetric_eigen();
    // Top l+1 eigenvalues of S are the smallest of L = (I - D^{-1}W)/eps^2.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let mut eigenvalues = Vec::with_capacity(params.l + 1);
    let mut columns: Vec<DVector<f64>> = Vec::with_capacity(params.l + 1);
    for &idx in order.iter().take(params.l + 1) {
        eigenvalues.push((1.0 - eig.eigenvalues[idx]) / (params.eps_dm * params.eps_dm));
        let mut v: DVector<f64> = eig.eigenvectors.column(idx).into();
        for i in 0..n {
            v[i] *= d_isqrt[i];
        }
        v /= v.norm();
        // Sign convention: first entry of meaningful size positive.
        if let Some(lead) = v.iter().find(|x| x.abs() > 1e-12) {
            if *lead < 0.0 {
                v = -v;
            }
        }
        columns.push(v);
    }

    let mut coords = vec![0.0; n * params.l];
    for (c, v) in columns.iter().skip(1).enumerate() {
        for i in 0..n {
            coords[i * params.l + c] = v[i];
        }
    }
    Ok(DmEmbedding {
        coords: PointCloud::new(coords, n, params.l)?,
        eigenvalues,
    })
}

/// Embeds the cloud and runs a detector on the embedded coordinates. The
/// embedding preserves point order, so detected indices refer to the
/// original cloud directly.
pub fn denoise_detect<F>(cloud: &PointCloud, params: &DmParams, detector: F) -> Result<BoundaryReport>
where
    F: FnOnce(&PointCloud) -> Result<BoundaryReport>,
{
    let embedding = dm_embed(cloud, params)?;
    detector(&embedding.coords)
}
