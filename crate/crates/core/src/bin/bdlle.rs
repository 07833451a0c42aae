//! Command-line front end for sampling benchmarks, detecting boundary
//! points, running the comparison detectors, spectral denoising, and F1
//! scoring.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime stage error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use bdlle::baselines;
use bdlle::datasets::DatasetBundle;
use bdlle::diffusion::{dm_embed, DmParams};
use bdlle::eval::{self, DEFAULT_GRID_K};
use bdlle::runner::{self, default_bdlle, DatasetConfig, RunConfig};
use bdlle::PointCloud;

#[derive(Parser)]
#[command(name = "bdlle", version, about = "Boundary detection for manifold point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic benchmark dataset to CSV.
    Sample(SampleArgs),
    /// Detect boundary points with the indicator method.
    Detect(DetectArgs),
    /// Run one of the comparison detectors.
    Baseline(BaselineArgs),
    /// Diffusion-maps embedding of a point cloud.
    Dm(DmArgs),
    /// Sample, optionally embed, detect, and score in one run.
    Pipeline(PipelineArgs),
    /// Score a detected index set against ground-truth distances.
    Eval(EvalArgs),
    /// Run a full config file and write a summary matrix.
    Report(ReportArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// disk, disk-nonuniform, ball, vcut, tcut, klein, noisy-disk
    #[arg(long)]
    name: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    r#in: PathBuf,
    /// Intrinsic dimension of the manifold.
    #[arg(long)]
    d: usize,
    /// Ball radius; omitted selects the mid-range radius automatically.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Use the KNN scheme instead of the ball scheme.
    #[arg(long)]
    knn: bool,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    threshold_frac: f64,
    #[arg(long, default_value_t = 0.01)]
    s_factor: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineArgs {
    /// border, brim, band, spinver, lever, cps
    #[arg(long)]
    algo: String,
    #[arg(long)]
    r#in: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Intrinsic dimension (cps only).
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Detection radius (cps only); omitted stores raw distance estimates.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DmArgs {
    #[arg(long)]
    r#in: PathBuf,
    #[arg(long)]
    epsilon_dm: f64,
    #[arg(long, default_value_t = 3)]
    l: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    /// Dataset name as in `sample`.
    #[arg(long)]
    name: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    #[arg(long)]
    dm_epsilon: Option<f64>,
    #[arg(long, default_value_t = 3)]
    l: usize,
    #[arg(long)]
    n_max: Option<usize>,
    /// Detection radius for the indicator method on the final cloud.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_K)]
    grid_k: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// JSON file with a `boundary_indices` array, or CSV with one index per line.
    #[arg(long)]
    detected: PathBuf,
    /// CSV of per-point ground-truth distances.
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GRID_K)]
    grid_k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    init_workers();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

/// Worker-count override through the BDLLE_WORKERS environment variable.
fn init_workers() {
    if let Ok(v) = std::env::var("BDLLE_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct ConfigError(String);

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(msg.into()))
}

fn dataset_config(name: &str, n: usize, sigma: f64) -> Result<DatasetConfig> {
    Ok(match name {
        "disk" => DatasetConfig::Disk { n, nonuniform: false },
        "disk-nonuniform" => DatasetConfig::Disk { n, nonuniform: true },
        "ball" => DatasetConfig::Ball { n },
        "vcut" => DatasetConfig::Vcut { n },
        "tcut" => DatasetConfig::Tcut { n_raw: n },
        "klein" => DatasetConfig::Klein { n },
        "noisy-disk" => DatasetConfig::NoisyDisk { n, sigma },
        other => return Err(config_err(format!("unknown dataset {other:?}"))),
    })
}

fn write_bundle(bundle: &DatasetBundle, out: &PathBuf) -> Result<()> {
    bundle.cloud.save_csv(out)?;
    // Sidecar: ground-truth distance plus intrinsic parameters per point.
    let mut gt = String::from("# dist_to_boundary,params...\n");
    for i in 0..bundle.cloud.n() {
        let mut row = vec![format!("{:.17e}", bundle.dist_to_boundary[i])];
        row.extend(bundle.params[i].iter().map(|v| format!("{v:.17e}")));
        gt.push_str(&row.join(","));
        gt.push('\n');
    }
    let sidecar = |suffix: &str| {
        let mut name = out.as_os_str().to_owned();
        name.push(suffix);
        PathBuf::from(name)
    };
    std::fs::write(sidecar(".gt.csv"), gt)?;
    if let Some(clean) = &bundle.clean_cloud {
        clean.save_csv(&sidecar(".clean.csv"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample(a) => {
            if a.n == 0 {
                return Err(config_err("n must be positive"));
            }
            let cfg = dataset_config(&a.name, a.n, a.sigma)?;
            let bundle = runner::sample_dataset(&cfg, a.seed)?;
            write_bundle(&bundle, &a.out)?;
            println!("wrote {} points to {}", bundle.cloud.n(), a.out.display());
        }
        Command::Detect(a) => {
            let cloud = PointCloud::load_csv(&a.r#in)?;
            let report = runner::detect_bdlle(
                &cloud,
                a.d,
                a.epsilon,
                a.k,
                a.knn,
                a.threshold_frac,
                a.s_factor,
            )?;
            std::fs::write(&a.out, serde_json::to_string_pretty(&report)?)?;
            println!(
                "detected {} boundary points (threshold {:.4})",
                report.boundary_indices.len(),
                report.threshold
            );
        }
        Command::Baseline(a) => {
            let cloud = PointCloud::load_csv(&a.r#in)?;
            let need_k = || a.k.ok_or_else(|| config_err("--k required for this algo"));
            let need_eps = || a.epsilon.ok_or_else(|| config_err("--epsilon required for this algo"));
            let json = match a.algo.as_str() {
                "border" => serde_json::to_string_pretty(&baselines::border(&cloud, need_k()?, 5.0)?)?,
                "brim" => serde_json::to_string_pretty(&baselines::brim(&cloud, need_eps()?, 95.0)?)?,
                "band" => serde_json::to_string_pretty(&baselines::band(&cloud, need_k()?, 20.0, 80.0)?)?,
                "spinver" => serde_json::to_string_pretty(&baselines::spinver(&cloud, need_k()?, 95.0, 5.0)?)?,
                "lever" => serde_json::to_string_pretty(&baselines::lever(&cloud, need_k()?, 95.0, 5.0)?)?,
                "cps" => {
                    let dists = baselines::cps_distances(&cloud, need_eps()?, a.d)?;
                    match a.radius {
                        Some(r) => serde_json::to_string_pretty(&baselines::cps_detect(&dists, r))?,
                        None => serde_json::to_string_pretty(&dists)?,
                    }
                }
                other => return Err(config_err(format!("unknown algo {other:?}"))),
            };
            std::fs::write(&a.out, json)?;
        }
        Command::Dm(a) => {
            let cloud = PointCloud::load_csv(&a.r#in)?;
            let params = DmParams { eps_dm: a.epsilon_dm, l: a.l, n_max: None };
            let embedding = dm_embed(&cloud, &params)?;
            embedding.coords.save_csv(&a.out)?;
            println!("eigenvalues: {:?}", embedding.eigenvalues);
        }
        Command::Pipeline(a) => {
            let config = RunConfig {
                version: 1,
                seed: a.seed,
                dataset: dataset_config(&a.name, a.n, a.sigma)?,
                detectors: vec![default_bdlle(a.epsilon)],
                dm: a.dm_epsilon.map(|e| DmParams { eps_dm: e, l: a.l, n_max: a.n_max }),
                grid_k: a.grid_k,
                out_dir: a.out_dir,
            };
            let outcomes = runner::run_benchmark(&config)?;
            for o in &outcomes {
                println!("{}: F1_max={:.4} at r={:.2}", o.detector, o.f1.f1_max, o.f1.best_r);
            }
        }
        Command::Eval(a) => {
            let detected = load_indices(&a.detected)?;
            let gt = load_column(&a.gt)?;
            let report = eval::f1_max(&detected, &gt, a.grid_k, "external");
            std::fs::write(&a.out, serde_json::to_string_pretty(&report)?)?;
            println!("F1_max={:.4} at r={:.2}", report.f1_max, report.best_r);
        }
        Command::Report(a) => {
            let config = RunConfig::load(&a.config).map_err(|e| config_err(e.to_string()))?;
            let outcomes = runner::run_benchmark(&config).context("benchmark run")?;
            for o in &outcomes {
                println!("{}: F1_max={:.4}", o.detector, o.f1.f1_max);
            }
        }
    }
    Ok(())
}

fn load_indices(path: &PathBuf) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        #[derive(serde::Deserialize)]
        struct WithIndices {
            boundary_indices: Vec<usize>,
        }
        let parsed: WithIndices = serde_json::from_str(&text)?;
        Ok(parsed.boundary_indices)
    } else {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.parse::<usize>().context("index parse"))
            .collect()
    }
}

/// First column of a CSV, skipping comment lines.
fn load_column(path: &PathBuf) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(',')
                .next()
                .unwrap()
                .trim()
                .parse::<f64>()
                .context("value parse")
        })
        .collect()
}
