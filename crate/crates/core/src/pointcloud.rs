//! Point-cloud storage and exact nearest-neighbor search under the
//! ε-radius-ball and KNN schemes.
//!
//! Both schemes exclude points coincident with the query point (strict
//! `0 < ||z_i - z_k||`). The KNN scheme includes every point tied at the
//! K-distance, so a neighborhood may hold more than `K` points.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A cloud of `n` points in `R^p`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    n: usize,
    p: usize,
}

impl PointCloud {
    pub fn new(data: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidCloud(format!("n={n}, p={p}")));
        }
        if data.len() != n * p {
            return Err(Error::InvalidCloud(format!(
                "buffer holds {} values, expected {}",
                data.len(),
                n * p
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidCloud(format!("non-finite entry {bad}")));
        }
        Ok(Self { data, n, p })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidCloud("ragged rows".into()));
        }
        Self::new(rows.concat(), n, p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(self.point(i), self.point(j))
    }

    /// Loads a CSV written by [`PointCloud::write_csv`]: one row per point,
    /// optional `# n=<n> p=<p>` header.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad value {tok:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    /// Writes one row per point with 17 significant digits so that values
    /// round-trip exactly.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = BufWriter::new(writer);
        writeln!(w, "# n={} p={}", self.n, self.p)?;
        for point in self.points() {
            let row: Vec<String> = point.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Neighbor-search scheme with its scale parameter.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum NeighborParams {
    EpsilonBall { epsilon: f64 },
    Knn { k: usize },
}

impl NeighborParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            NeighborParams::EpsilonBall { epsilon } => {
                if epsilon > 0.0 && epsilon.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!("epsilon={epsilon}")))
                }
            }
            NeighborParams::Knn { k } => {
                if k >= 1 && k <= n.saturating_sub(1) {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!("K={k} with n={n}")))
                }
            }
        }
    }
}

/// Neighbors of one point: indices and distances sorted ascending, center
/// excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    pub center: usize,
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

impl NeighborSet {
    pub fn count(&self) -> usize {
        self.indices.len()
    }

    fn from_pairs(center: usize, mut pairs: Vec<(f64, usize)>) -> Self {
        // Sort by distance, then index, so output never depends on scan order.
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        NeighborSet {
            center,
            indices: pairs.iter().map(|&(_, i)| i).collect(),
            distances: pairs.iter().map(|&(d, _)| d).collect(),
        }
    }
}

const KDTREE_MAX_DIM: usize = 25;
const LEAF_SIZE: usize = 16;

enum IndexBackend {
    /// Balanced kd-tree over point indices.
    KdTree { nodes: Vec<KdNode>, root: usize },
    /// Linear scan; tree pruning degenerates in high ambient dimension.
    BruteForce,
}

struct KdNode {
    axis: usize,
    split: f64,
    left: usize,
    right: usize,
    /// Point indices for leaves; empty for inner nodes.
    points: Vec<usize>,
}

const NO_CHILD: usize = usize::MAX;

/// Spatial index over a [`PointCloud`]. Queries are exact: they agree with a
/// brute-force distance scan including ties.
pub struct NeighborIndex<'a> {
    cloud: &'a PointCloud,
    backend: IndexBackend,
}

impl<'a> NeighborIndex<'a> {
    pub fn build(cloud: &'a PointCloud) -> Self {
        let backend = if cloud.p() > KDTREE_MAX_DIM {
            IndexBackend::BruteForce
        } else {
            let mut nodes = Vec::new();
            let mut ids: Vec<usize> = (0..cloud.n()).collect();
            let root = build_node(cloud, &mut ids, 0, &mut nodes);
            IndexBackend::KdTree { nodes, root }
        };
        NeighborIndex { cloud, backend }
    }

    pub fn cloud(&self) -> &PointCloud {
        self.cloud
    }

    /// All points with `0 < ||z_i - z_k|| <= epsilon`.
    pub fn epsilon_neighbors(&self, k: usize, epsilon: f64) -> Result<NeighborSet> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParams(format!("epsilon={epsilon}")));
        }
        let pairs = self.range_query(self.cloud.point(k), epsilon, Some(k));
        if pairs.is_empty() {
            return Err(Error::EmptyNeighborhood { index: k });
        }
        Ok(NeighborSet::from_pairs(k, pairs))
    }

    /// KNN neighborhood including all ties at the K-distance.
    pub fn knn_neighbors(&self, k: usize, kn: usize) -> Result<NeighborSet> {
        NeighborParams::Knn { k: kn }.validate(self.cloud.n())?;
        let radius = self.k_distance(k, kn)?;
        let pairs = self.range_query(self.cloud.point(k), radius, Some(k));
        Ok(NeighborSet::from_pairs(k, pairs))
    }

    /// Distance from `z_k` to its K-th nearest point. The ranking runs over
    /// `X \ {z_k}`, so duplicates of `z_k` at distance 0 participate.
    pub fn k_distance(&self, k: usize, kn: usize) -> Result<f64> {
        NeighborParams::Knn { k: kn }.validate(self.cloud.n())?;
        match &self.backend {
            IndexBackend::BruteForce => {
                let mut dists: Vec<f64> = (0..self.cloud.n())
                    .filter(|&i| i != k)
                    .map(|i| self.cloud.distance(i, k))
                    .collect();
                dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
                Ok(dists[kn - 1])
            }
            IndexBackend::KdTree { nodes, root } => {
                let mut heap = BoundedMaxHeap::new(kn);
                knn_search(
                    self.cloud,
                    nodes,
                    *root,
                    self.cloud.point(k),
                    Some(k),
                    &mut heap,
                );
                Ok(heap.max())
            }
        }
    }

    fn range_query(&self, query: &[f64], radius: f64, exclude: Option<usize>) -> Vec<(f64, usize)> {
        let mut pairs = Vec::new();
        match &self.backend {
            IndexBackend::BruteForce => {
                for i in 0..self.cloud.n() {
                    if Some(i) == exclude {
                        continue;
                    }
                    let d = dist(self.cloud.point(i), query);
                    if d > 0.0 && d <= radius {
                        pairs.push((d, i));
                    }
                }
            }
            IndexBackend::KdTree { nodes, root } => {
                range_search(self.cloud, nodes, *root, query, radius, exclude, &mut pairs);
            }
        }
        pairs
    }
}

fn build_node(cloud: &PointCloud, ids: &mut [usize], depth: usize, nodes: &mut Vec<KdNode>) -> usize {
    if ids.len() <= LEAF_SIZE {
        nodes.push(KdNode {
            axis: 0,
            split: 0.0,
            left: NO_CHILD,
            right: NO_CHILD,
            points: ids.to_vec(),
        });
        return nodes.len() - 1;
    }
    let axis = widest_axis(cloud, ids).unwrap_or(depth % cloud.p());
    let mid = ids.len() / 2;
    ids.select_nth_unstable_by(mid, |&a, &b| {
        cloud.point(a)[axis].partial_cmp(&cloud.point(b)[axis]).unwrap()
    });
    let split = cloud.point(ids[mid])[axis];
    let (lo, hi) = ids.split_at_mut(mid);
    if lo.is_empty() || hi.is_empty() {
        // All coordinates equal along every axis; keep as one leaf.
        nodes.push(KdNode {
            axis: 0,
            split: 0.0,
            left: NO_CHILD,
            right: NO_CHILD,
            points: [lo, hi].concat(),
        });
        return nodes.len() - 1;
    }
    let left = build_node(cloud, lo, depth + 1, nodes);
    let right = build_node(cloud, hi, depth + 1, nodes);
    nodes.push(KdNode {
        axis,
        split,
        left,
        right,
        points: Vec::new(),
    });
    nodes.len() - 1
}

fn widest_axis(cloud: &PointCloud, ids: &[usize]) -> Option<usize> {
    let p = cloud.p();
    let mut best = None;
    let mut best_spread = 0.0;
    for axis in 0..p {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in ids {
            let v = cloud.point(i)[axis];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let spread = hi - lo;
        if spread > best_spread {
            best_spread = spread;
            best = Some(axis);
        }
    }
    best
}

fn range_search(
    cloud: &PointCloud,
    nodes: &[KdNode],
    node: usize,
    query: &[f64],
    radius: f64,
    exclude: Option<usize>,
    out: &mut Vec<(f64, usize)>,
) {
    let nd = &nodes[node];
    if nd.left == NO_CHILD {
        for &i in &nd.points {
            if Some(i) == exclude {
                continue;
            }
            let d = dist(cloud.point(i), query);
            if d > 0.0 && d <= radius {
                out.push((d, i));
            }
        }
        return;
    }
    // Left holds coords <= split, right holds coords >= split (equal values
    // may land on either side), so both bounds are inclusive.
    let diff = query[nd.axis] - nd.split;
    if diff <= radius {
        range_search(cloud, nodes, nd.left, query, radius, exclude, out);
    }
    if diff >= -radius {
        range_search(cloud, nodes, nd.right, query, radius, exclude, out);
    }
}

struct BoundedMaxHeap {
    cap: usize,
    data: Vec<f64>,
}

impl BoundedMaxHeap {
    fn new(cap: usize) -> Self {
        BoundedMaxHeap {
            cap,
            data: Vec::with_capacity(cap + 1),
        }
    }

    fn bound(&self) -> f64 {
        if self.data.len() < self.cap {
            f64::INFINITY
        } else {
            self.data[0]
        }
    }

    fn push(&mut self, d: f64) {
        if self.data.len() < self.cap {
            self.data.push(d);
            let mut i = self.data.len() - 1;
            while i > 0 {
                let parent = (i - 1) / 2;
                if self.data[parent] < self.data[i] {
                    self.data.swap(parent, i);
                    i = parent;
                } else {
                    break;
                }
            }
        } else if d < self.data[0] {
            self.data[0] = d;
            let mut i = 0;
            loop {
                let (l, r) = (2 * i + 1, 2 * i + 2);
                let mut largest = i;
                if l < self.data.len() && self.data[l] > self.data[largest] {
                    largest = l;
                }
                if r < self.data.len() && self.data[r] > self.data[largest] {
                    largest = r;
                }
                if largest == i {
                    break;
                }
                self.data.swap(i, largest);
                i = largest;
            }
        }
    }

    fn max(&self) -> f64 {
        self.data[0]
    }
}

fn knn_search(
    cloud: &PointCloud,
    nodes: &[KdNode],
    node: usize,
    query: &[f64],
    exclude: Option<usize>,
    heap: &mut BoundedMaxHeap,
) {
    let nd = &nodes[node];
    if nd.left == NO_CHILD {
        for &i in &nd.points {
            if Some(i) == exclude {
                continue;
            }
            heap.push(dist(cloud.point(i), query));
        }
        return;
    }
    let diff = query[nd.axis] - nd.split;
    let (near, far) = if diff < 0.0 {
        (nd.left, nd.right)
    } else {
        (nd.right, nd.left)
    };
    knn_search(cloud, nodes, near, query, exclude, heap);
    if diff.abs() <= heap.bound() {
        knn_search(cloud, nodes, far, query, exclude, heap);
    }
}

/// Neighbor sets for every point under `params`, computed in parallel.
pub fn all_neighbors(index: &NeighborIndex, params: NeighborParams) -> Result<Vec<NeighborSet>> {
    use rayon::prelude::*;
    params.validate(index.cloud().n())?;
    (0..index.cloud().n())
        .into_par_iter()
        .map(|k| match params {
            NeighborParams::EpsilonBall { epsilon } => index.epsilon_neighbors(k, epsilon),
            NeighborParams::Knn { k: kn } => index.knn_neighbors(k, kn),
        })
        .collect()
}
