//! Synthetic benchmark samplers with per-point ground-truth distance to the
//! boundary.
//!
//! Sampling is single-threaded and seed-deterministic. Ground-truth distance
//! uses closed forms where available (disk, ball) and otherwise a
//! multi-source shortest path over a proximity graph that includes densely
//! sampled boundary nodes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pointcloud::{NeighborIndex, PointCloud};

/// One sampled benchmark instance.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub cloud: PointCloud,
    pub name: String,
    /// Intrinsic dimension of the underlying manifold.
    pub d: usize,
    /// Geodesic distance from each point to the boundary.
    pub dist_to_boundary: Vec<f64>,
    /// Per-point intrinsic parameters (columns depend on the dataset).
    pub params: Vec<Vec<f64>>,
    /// Noise-free positions, present only for noisy datasets.
    pub clean_cloud: Option<PointCloud>,
}

/// Independent RNG streams drawn from one seed.
mod stream {
    pub const PARAMS: u64 = 0;
    pub const COEFFS: u64 = 1;
    pub const NOISE: u64 = 2;
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DiskMode {
    /// Area-uniform: radius is the square root of a uniform draw.
    Uniform,
    /// Radius uniform in [0,1], denser toward the center.
    Nonuniform,
}

/// Unit disk in the plane; distance to the boundary is `1 - |z|`.
pub fn sample_disk(n: usize, seed: u64, mode: DiskMode) -> Result<DatasetBundle> {
    let mut r = rng(seed, stream::PARAMS);
    let mut rows = Vec::with_capacity(n);
    let mut params = Vec::with_capacity(n);
    let mut dist = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = r.gen();
        let radius = match mode {
            DiskMode::Uniform => u.sqrt(),
            DiskMode::Nonuniform => u,
        };
        let angle = r.gen::<f64>() * 2.0 * PI;
        rows.push(vec![radius * angle.cos(), radius * angle.sin()]);
        params.push(vec![radius, angle]);
        dist.push(1.0 - radius);
    }
    Ok(DatasetBundle {
        cloud: PointCloud::from_rows(&rows)?,
        name: match mode {
            DiskMode::Uniform => "disk".into(),
            DiskMode::Nonuniform => "disk-nonuniform".into(),
        },
        d: 2,
        dist_to_boundary: dist,
        params,
        clean_cloud: None,
    })
}

/// Unit ball in R^3 with radially non-uniform density; distance `1 - |z|`.
pub fn sample_ball(n: usize, seed: u64) -> Result<DatasetBundle> {
    let mut r = rng(seed, stream::PARAMS);
    let mut rows = Vec::with_capacity(n);
    let mut params = Vec::with_capacity(n);
    let mut dist = Vec::with_capacity(n);
    for _ in 0..n {
        let rad: f64 = r.gen();
        let theta = r.gen::<f64>() * 2.0 * PI;
        let phi = r.gen::<f64>() * PI;
        let s = rad.sqrt();
        let z = vec![
            s * phi.sin() * theta.cos(),
            s * phi.sin() * theta.sin(),
            s * phi.cos(),
        ];
        dist.push(1.0 - (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt());
        rows.push(z);
        params.push(vec![rad, theta, phi]);
    }
    Ok(DatasetBundle {
        cloud: PointCloud::from_rows(&rows)?,
        name: "ball".into(),
        d: 3,
        dist_to_boundary: dist,
        params,
        clean_cloud: None,
    })
}

fn torus_point(theta: f64, phi: f64) -> [f64; 3] {
    let ring = 3.0 + 1.2 * theta.cos();
    [ring * phi.cos(), ring * phi.sin(), 1.2 * theta.sin()]
}

/// Torus with a vertical band removed: phi avoids (-0.5, 0.5), so the
/// boundary is the pair of circles phi = +-0.5.
pub fn sample_vcut_torus(n: usize, seed: u64) -> Result<DatasetBundle> {
    let mut r = rng(seed, stream::PARAMS);
    let mut rows = Vec::with_capacity(n);
    let mut params = Vec::with_capacity(n);
    for _ in 0..n {
        let theta = r.gen::<f64>() * 2.0 * PI - PI;
        // phi uniform on [-pi,pi) minus (-0.5, 0.5): draw from the reduced
        // length and shift across the gap.
        let gap = 1.0;
        let u = r.gen::<f64>() * (2.0 * PI - gap);
        let phi = if u < PI - 0.5 { u - PI } else { u - PI + gap };
        rows.push(torus_point(theta, phi).to_vec());
        params.push(vec![theta, phi]);
    }
    // Boundary circles phi = +-0.5.
    let m = 2000;
    let mut boundary = Vec::with_capacity(m);
    for i in 0..m {
        let theta = 2.0 * PI * i as f64 / (m / 2) as f64;
        let phi = if i < m / 2 { 0.5 } else { -0.5 };
        boundary.push(torus_point(theta, phi).to_vec());
    }
    let cloud = PointCloud::from_rows(&rows)?;
    let dist = graph_distance(&cloud, &boundary)?;
    Ok(DatasetBundle {
        cloud,
        name: "vcut".into(),
        d: 2,
        dist_to_boundary: dist,
        params,
        clean_cloud: None,
    })
}

const TCUT_ANGLE: f64 = 3.0 * PI / 4.0;
const TCUT_LEVEL: f64 = 2.8;

fn tcut_rotate(p: [f64; 3]) -> [f64; 3] {
    let (s, c) = TCUT_ANGLE.sin_cos();
    [c * p[0] - s * p[2], p[1], s * p[0] + c * p[2]]
}

/// Torus rotated about the y-axis and cut by the plane w' = 2.8. Draws
/// `n_raw` points and keeps those below the cut.
pub fn sample_tcut_torus(n_raw: usize, seed: u64) -> Result<DatasetBundle> {
    let mut r = rng(seed, stream::PARAMS);
    let mut rows = Vec::new();
    let mut params = Vec::new();
    for _ in 0..n_raw {
        let theta = r.gen::<f64>() * 2.0 * PI - PI;
        let phi = r.gen::<f64>() * 2.0 * PI - PI;
        let p = tcut_rotate(torus_point(theta, phi));
        if p[2] < TCUT_LEVEL {
            rows.push(p.to_vec());
            params.push(vec![theta, phi]);
        }
    }
    // Cut curve: points of the rotated torus with w' = 2.8. In the original
    // coordinates w' = (u - w)/sqrt(2), so cos(phi) is solved per theta.
    let mut boundary = Vec::new();
    let m = 4000;
    for i in 0..m {
        let theta = 2.0 * PI * i as f64 / m as f64 - PI;
        let ring = 3.0 + 1.2 * theta.cos();
        let cos_phi = (TCUT_LEVEL * std::f64::consts::SQRT_2 + 1.2 * theta.sin()) / ring;
        if cos_phi.abs() <= 1.0 {
            let phi = cos_phi.acos();
            for sign in [1.0, -1.0] {
                boundary.push(tcut_rotate(torus_point(theta, sign * phi)).to_vec());
            }
        }
    }
    let cloud = PointCloud::from_rows(&rows)?;
    let dist = graph_distance(&cloud, &boundary)?;
    Ok(DatasetBundle {
        cloud,
        name: "tcut".into(),
        d: 2,
        dist_to_boundary: dist,
        params,
        clean_cloud: None,
    })
}

const KLEIN_AMBIENT: usize = 500;

fn klein_point(theta: f64, phi: f64) -> Vec<f64> {
    let ring = 1.0 + 0.5 * theta.cos();
    let mut z = vec![0.0; KLEIN_AMBIENT];
    z[0] = ring * phi.cos();
    z[1] = ring * phi.sin();
    z[2] = 0.5 * theta.sin() * (phi / 2.0).cos();
    z[3] = 0.5 * theta.sin() * (phi / 2.0).sin();
    z
}

/// Klein bottle surface in R^4 (zero-padded to R^500) with the unit disk
/// around (pi, pi) removed from the parameter domain.
pub fn sample_klein(n: usize, seed: u64) -> Result<DatasetBundle> {
    let mut r = rng(seed, stream::PARAMS);
    let mut rows = Vec::with_capacity(n);
    let mut params = Vec::with_capacity(n);
    while rows.len() < n {
        let theta = r.gen::<f64>() * 2.0 * PI;
        let phi = r.gen::<f64>() * 2.0 * PI;
        if (theta - PI).powi(2) + (phi - PI).powi(2) < 1.0 {
            continue;
        }
        rows.push(klein_point(theta, phi));
        params.push(vec![theta, phi]);
    }
    // Boundary: unit circle around (pi, pi) in the parameter domain.
    let m = 2500;
    let boundary: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / m as f64;
            klein_point(PI + t.cos(), PI + t.sin())
        })
        .collect();
    let cloud = PointCloud::from_rows(&rows)?;
    let dist = graph_distance(&cloud, &boundary)?;
    Ok(DatasetBundle {
        cloud,
        name: "klein".into(),
        d: 2,
        dist_to_boundary: dist,
        params,
        clean_cloud: None,
    })
}

const NOISY_AMBIENT: usize = 500;
const NOISY_COEFFS: usize = 22;

fn noisy_disk_point(u: f64, v: f64, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; NOISY_AMBIENT];
    z[0] = u;
    z[1] = v;
    z[2] = 0.2 * (2.0 * PI * (u * u + v * v)).sin();
    for j in 0..NOISY_COEFFS {
        z[3 + j] = a[j] * u * u + b[j] * v * v;
    }
    z
}

/// Curved disk embedded in R^500 with isotropic Gaussian noise. Ground-truth
/// distance is computed on the clean cloud.
pub fn sample_noisy_disk(n: usize, seed: u64, sigma: f64) -> Result<DatasetBundle> {
    let mut cr = rng(seed, stream::COEFFS);
    let na = Normal::new(0.0, 0.1).unwrap();
    let nb = Normal::new(0.0, 0.05).unwrap();
    let a: Vec<f64> = (0..NOISY_COEFFS).map(|_| na.sample(&mut cr)).collect();
    let b: Vec<f64> = (0..NOISY_COEFFS).map(|_| nb.sample(&mut cr)).collect();

    let mut pr = rng(seed, stream::PARAMS);
    let mut clean = Vec::with_capacity(n);
    let mut params = Vec::with_capacity(n);
    for _ in 0..n {
        let radius = pr.gen::<f64>().sqrt();
        let angle = pr.gen::<f64>() * 2.0 * PI;
        let (u, v) = (radius * angle.cos(), radius * angle.sin());
        clean.push(noisy_disk_point(u, v, &a, &b));
        params.push(vec![u, v]);
    }

    let mut nr = rng(seed, stream::NOISE);
    let noise = Normal::new(0.0, sigma).unwrap();
    let noisy: Vec<Vec<f64>> = clean
        .iter()
        .map(|row| row.iter().map(|x| x + noise.sample(&mut nr)).collect())
        .collect();

    let clean_cloud = PointCloud::from_rows(&clean)?;
    let m = 2500;
    let boundary: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / m as f64;
            noisy_disk_point(t.cos(), t.sin(), &a, &b)
        })
        .collect();
    let dist = graph_distance(&clean_cloud, &boundary)?;
    Ok(DatasetBundle {
        cloud: PointCloud::from_rows(&noisy)?,
        name: "noisy-disk".into(),
        d: 2,
        dist_to_boundary: dist,
        params,
        clean_cloud: Some(clean_cloud),
    })
}

/// Number of leading coordinates that can be nonzero; trailing zero padding
/// does not affect Euclidean distances, so the graph runs on the prefix.
fn active_prefix(rows: &PointCloud, boundary: &[Vec<f64>]) -> usize {
    let p = rows.p();
    let mut last = 1;
    for row in rows.points().chain(boundary.iter().map(Vec::as_slice)) {
        for j in (last..p).rev() {
            if row[j] != 0.0 {
                last = j + 1;
                break;
            }
        }
    }
    last
}

/// Multi-source shortest-path distance from every cloud point to the
/// boundary node set, over a proximity graph with ambient edge lengths.
pub fn graph_distance(cloud: &PointCloud, boundary: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = cloud.n();
    let prefix = active_prefix(cloud, boundary);
    let mut rows: Vec<Vec<f64>> = cloud.points().map(|z| z[..prefix].to_vec()).collect();
    for b in boundary {
        rows.push(b[..prefix].to_vec());
    }
    let total = rows.len();
    // The neighbor index drops zero-length edges, so cloud points that
    // coincide with a boundary node bit-exactly are seeded as sources too.
    let node_key = |row: &[f64]| -> Vec<u64> { row.iter().map(|v| v.to_bits()).collect() };
    let boundary_keys: std::collections::HashSet<Vec<u64>> =
        rows[n..].iter().map(|r| node_key(r)).collect();
    let coincident: Vec<usize> = (0..n)
        .filter(|&i| boundary_keys.contains(&node_key(&rows[i])))
        .collect();
    let combined = PointCloud::from_rows(&rows)?;
    let index = NeighborIndex::build(&combined);

    // Radius: every vertex keeps at least 4 neighbors, then margin.
    let base: f64 = (0..total)
        .into_par_iter()
        .map(|i| index.k_distance(i, 4.min(total - 1)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut radius = 1.5 * base;
    for attempt in 0..3 {
        let adjacency: Vec<Vec<(usize, f64)>> = (0..total)
            .into_par_iter()
            .map(|i| {
                let nb = index.epsilon_neighbors(i, radius)?;
                Ok(nb.indices.into_iter().zip(nb.distances).collect())
            })
            .collect::<Result<_>>()?;
        let dist = dijkstra(&adjacency, n, total, &coincident);
        if dist.iter().all(|v| v.is_finite()) {
            return Ok(dist);
        }
        if attempt == 2 {
            break;
        }
        radius *= 2.0;
    }
    Err(Error::DisconnectedGraph { attempts: 3 })
}

fn dijkstra(
    adjacency: &[Vec<(usize, f64)>],
    n: usize,
    total: usize,
    extra_sources: &[usize],
) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; total];
    let mut heap: BinaryHeap<Reverse<(ordered::F64, usize)>> = BinaryHeap::new();
    for s in (n..total).chain(extra_sources.iter().copied()) {
        dist[s] = 0.0;
        heap.push(Reverse((ordered::F64(0.0), s)));
    }
    while let Some(Reverse((ordered::F64(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &adjacency[v] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Reverse((ordered::F64(nd), w)));
            }
        }
    }
    dist.truncate(n);
    dist
}

mod ordered {
    /// Total order wrapper for finite distances in the heap.
    #[derive(PartialEq, PartialOrd)]
    pub struct F64(pub f64);
    impl Eq for F64 {}
    impl Ord for F64 {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.partial_cmp(other).unwrap()
        }
    }
}
