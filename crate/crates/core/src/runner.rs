//! Benchmark orchestration: configuration files, automatic scale and
//! regularizer selection, and end-to-end runs chaining sampling, optional
//! spectral denoising, detection, and scoring.

use std::fs;
use std::path::{Path, PathBuf};

use crate::baselines::{self, BaselineResult};
use crate::bdlle::{
    clamp_s_factor, detect_boundary_with_neighbors, select_epsilon_range, select_k,
    select_regularizer, BoundaryReport, Regularizer, DEFAULT_S_FACTOR,
};
use crate::datasets::{self, DatasetBundle, DiskMode};
use crate::diffusion::{dm_embed, DmParams};
use crate::error::{Error, Result};
use crate::eval::{self, F1Report};
use crate::pointcloud::{all_neighbors, NeighborIndex, NeighborParams, PointCloud};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunConfig {
    /// Schema version of this config format.
    pub version: u32,
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub detectors: Vec<DetectorConfig>,
    /// When set, detection runs on the diffusion embedding of the cloud.
    pub dm: Option<DmParams>,
    /// Radius-grid length for F1 scoring.
    pub grid_k: usize,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum DatasetConfig {
    Disk { n: usize, nonuniform: bool },
    Ball { n: usize },
    Vcut { n: usize },
    Tcut { n_raw: usize },
    Klein { n: usize },
    NoisyDisk { n: usize, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "algo", rename_all = "kebab-case")]
pub enum DetectorConfig {
    BdLle {
        /// Ball radius; absent means automatic mid-range selection.
        epsilon: Option<f64>,
        /// KNN size; used when `epsilon` is absent and `knn` is true.
        knn: bool,
        k: Option<usize>,
        threshold_frac: f64,
        s_factor: f64,
    },
    Border { k: usize },
    Brim { epsilon: f64 },
    Band { k: usize },
    Spinver { k: usize },
    Lever { k: usize },
    Cps { epsilon: f64, radius: Option<f64> },
}

impl DetectorConfig {
    pub fn id(&self) -> &'static str {
        match self {
            DetectorConfig::BdLle { .. } => "bd-lle",
            DetectorConfig::Border { .. } => "border",
            DetectorConfig::Brim { .. } => "brim",
            DetectorConfig::Band { .. } => "band",
            DetectorConfig::Spinver { .. } => "spinver",
            DetectorConfig::Lever { .. } => "lever",
            DetectorConfig::Cps { .. } => "cps",
        }
    }
}

pub fn default_bdlle(epsilon: Option<f64>) -> DetectorConfig {
    DetectorConfig::BdLle {
        epsilon,
        knn: false,
        k: None,
        threshold_frac: 0.5,
        s_factor: DEFAULT_S_FACTOR,
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }
}

pub fn sample_dataset(cfg: &DatasetConfig, seed: u64) -> Result<DatasetBundle> {
    match *cfg {
        DatasetConfig::Disk { n, nonuniform } => datasets::sample_disk(
            n,
            seed,
            if nonuniform {
                DiskMode::Nonuniform
            } else {
                DiskMode::Uniform
            },
        ),
        DatasetConfig::Ball { n } => datasets::sample_ball(n, seed),
        DatasetConfig::Vcut { n } => datasets::sample_vcut_torus(n, seed),
        DatasetConfig::Tcut { n_raw } => datasets::sample_tcut_torus(n_raw, seed),
        DatasetConfig::Klein { n } => datasets::sample_klein(n, seed),
        DatasetConfig::NoisyDisk { n, sigma } => datasets::sample_noisy_disk(n, seed, sigma),
    }
}

/// Detection run with automatic parameter selection where requested.
pub fn detect_bdlle(
    cloud: &PointCloud,
    d: usize,
    epsilon: Option<f64>,
    knn_k: Option<usize>,
    use_knn: bool,
    threshold_frac: f64,
    s_factor: f64,
) -> Result<BoundaryReport> {
    let index = NeighborIndex::build(cloud);
    let params = if use_knn {
        NeighborParams::Knn {
            k: knn_k.unwrap_or_else(|| select_k(cloud.n(), d)),
        }
    } else {
        let epsilon = match epsilon {
            Some(e) => e,
            None => {
                let (lo, hi) = select_epsilon_range(&index, d)?;
                0.5 * (lo + hi)
            }
        };
        NeighborParams::EpsilonBall { epsilon }
    };
    let nbrs = all_neighbors(&index, params)?;
    let scheme_scale = match params {
        NeighborParams::EpsilonBall { epsilon } => epsilon,
        NeighborParams::Knn { k } => (k as f64 / cloud.n() as f64).powf(1.0 / d as f64),
    };
    let c = select_regularizer(cloud, &nbrs, d, clamp_s_factor(s_factor, scheme_scale))?;
    detect_boundary_with_neighbors(cloud, &nbrs, params, c, threshold_frac)
}

/// One detector's outcome within a benchmark run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DetectorOutcome {
    pub detector: String,
    pub boundary_indices: Vec<usize>,
    pub f1: F1Report,
    /// Indicator values for bd-lle runs.
    pub indicator: Option<Vec<f64>>,
    /// Regularizer actually used, for bd-lle runs.
    pub regularizer: Option<Regularizer>,
    pub params: String,
}

pub fn run_detector(
    cfg: &DetectorConfig,
    cloud: &PointCloud,
    d: usize,
    dist_gt: &[f64],
    grid_k: usize,
) -> Result<DetectorOutcome> {
    let (indices, f1, indicator, regularizer, params) = match cfg {
        DetectorConfig::BdLle {
            epsilon,
            knn,
            k,
            threshold_frac,
            s_factor,
        } => {
            let report = detect_bdlle(cloud, d, *epsilon, *k, *knn, *threshold_frac, *s_factor)?;
            let f1 = eval::f1_max(&report.boundary_indices, dist_gt, grid_k, cfg.id());
            let params = format!("{:?}", report.indicator.params);
            (
                report.boundary_indices,
                f1,
                Some(report.indicator.values),
                Some(report.indicator.c),
                params,
            )
        }
        DetectorConfig::Cps { epsilon, radius } => {
            let dists = baselines::cps_distances(cloud, *epsilon, d)?;
            match radius {
                Some(r) => {
                    let res = baselines::cps_detect(&dists, *r);
                    let f1 = eval::f1_max(&res.boundary_indices, dist_gt, grid_k, cfg.id());
                    (res.boundary_indices, f1, None, None, format!("epsilon={epsilon} r={r}"))
                }
                None => {
                    let f1 = eval::f1_max_cps(&dists, dist_gt, grid_k);
                    let best = baselines::cps_detect(&dists, f1.best_r);
                    (best.boundary_indices, f1, None, None, format!("epsilon={epsilon}"))
                }
            }
        }
        other => {
            let res: BaselineResult = match *other {
                DetectorConfig::Border { k } => baselines::border(cloud, k, 5.0)?,
                DetectorConfig::Brim { epsilon } => baselines::brim(cloud, epsilon, 95.0)?,
                DetectorConfig::Band { k } => baselines::band(cloud, k, 20.0, 80.0)?,
                DetectorConfig::Spinver { k } => baselines::spinver(cloud, k, 95.0, 5.0)?,
                DetectorConfig::Lever { k } => baselines::lever(cloud, k, 95.0, 5.0)?,
                _ => unreachable!(),
            };
            let f1 = eval::f1_max(&res.boundary_indices, dist_gt, grid_k, cfg.id());
            (res.boundary_indices, f1, None, None, format!("{other:?}"))
        }
    };
    Ok(DetectorOutcome {
        detector: cfg.id().into(),
        boundary_indices: indices,
        f1,
        indicator,
        regularizer,
        params,
    })
}

/// Deterministic even subsample of size at most `m`, preserving order.
pub fn subsample_indices(n: usize, m: usize) -> Vec<usize> {
    if m >= n {
        return (0..n).collect();
    }
    (0..m).map(|i| i * n / m).collect()
}

pub fn subsample_bundle(bundle: &DatasetBundle, m: usize) -> Result<DatasetBundle> {
    let idx = subsample_indices(bundle.cloud.n(), m);
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| bundle.cloud.point(i).to_vec()).collect();
    let clean = match &bundle.clean_cloud {
        Some(c) => Some(PointCloud::from_rows(
            &idx.iter().map(|&i| c.point(i).to_vec()).collect::<Vec<_>>(),
        )?),
        None => None,
    };
    Ok(DatasetBundle {
        cloud: PointCloud::from_rows(&rows)?,
        name: bundle.name.clone(),
        d: bundle.d,
        dist_to_boundary: idx.iter().map(|&i| bundle.dist_to_boundary[i]).collect(),
        params: idx.iter().map(|&i| bundle.params[i].clone()).collect(),
        clean_cloud: clean,
    })
}

/// Full benchmark: sample, optionally embed, run all detectors, score, and
/// write artifacts into the configured output directory.
pub fn run_benchmark(config: &RunConfig) -> Result<Vec<DetectorOutcome>> {
    let mut bundle = sample_dataset(&config.dataset, config.seed)?;
    if let Some(dm) = &config.dm {
        if let Some(cap) = dm.n_max {
            bundle = subsample_bundle(&bundle, cap)?;
        }
    }
    let detect_cloud = match &config.dm {
        Some(dm) => dm_embed(&bundle.cloud, dm)?.coords,
        None => bundle.cloud.clone(),
    };

    fs::create_dir_all(&config.out_dir)?;
    let mut outcomes = Vec::new();
    let mut aggregate = String::from("detector,dataset,f1_max,best_r,params\n");
    for det in &config.detectors {
        let outcome = run_detector(det, &detect_cloud, bundle.d, &bundle.dist_to_boundary, config.grid_k)?;
        aggregate.push_str(&format!(
            "{},{},{:.4},{:.2},{}\n",
            outcome.detector,
            bundle.name,
            outcome.f1.f1_max,
            outcome.f1.best_r,
            outcome.params.replace(',', ";"),
        ));
        let json = serde_json::to_string_pretty(&outcome).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(
            config.out_dir.join(format!("{}-{}.json", bundle.name, outcome.detector)),
            json,
        )?;
        fs::write(
            config.out_dir.join(format!("{}-{}.plot.csv", bundle.name, outcome.detector)),
            plot_data(&outcome, &bundle),
        )?;
        outcomes.push(outcome);
    }
    fs::write(config.out_dir.join(format!("{}-summary.csv", bundle.name)), aggregate)?;
    Ok(outcomes)
}

/// Per-point plot rows: ambient coordinates for low-dimensional clouds,
/// intrinsic parameters otherwise, plus indicator value and detected flag.
pub fn plot_data(outcome: &DetectorOutcome, bundle: &DatasetBundle) -> String {
    let n = bundle.cloud.n();
    let mut detected = vec![false; n];
    for &i in &outcome.boundary_indices {
        detected[i] = true;
    }
    let use_params = bundle.cloud.p() > 3;
    let mut out = String::new();
    let dims = if use_params {
        bundle.params.first().map_or(0, Vec::len)
    } else {
        bundle.cloud.p()
    };
    let header: Vec<String> = (0..dims).map(|j| format!("c{j}")).collect();
    out.push_str(&format!("{},indicator,detected\n", header.join(",")));
    for i in 0..n {
        let coords: &[f64] = if use_params {
            &bundle.params[i]
        } else {
            bundle.cloud.point(i)
        };
        let row: Vec<String> = coords.iter().map(|v| format!("{v:.17e}")).collect();
        let b = outcome
            .indicator
            .as_ref()
            .map_or(String::from(""), |vals| format!("{:.17e}", vals[i]));
        out.push_str(&format!("{},{},{}\n", row.join(","), b, u8::from(detected[i])));
    }
    out
}
