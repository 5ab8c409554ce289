//! DBSCAN outlier suppression, densest-cluster selection and medoids.
//!
//! Labeling rules:
//! - a point is core when at least `min_pts` points (itself included) lie
//!   within `eps` of it;
//! - clusters are the connected components of core points, numbered by their
//!   lowest point index;
//! - a non-core point within `eps` of a core point joins the cluster of its
//!   nearest core neighbor (ties go to the lower index), otherwise it is noise.
//!
//! Border assignment by nearest core point makes the partition independent of
//! input order, except for exact distance ties.

use std::collections::HashMap;

use nalgebra::Point3;
use rayon::prelude::*;
use thiserror::Error;

use crate::geom::PointCloud;

/// Label of points that belong to no cluster.
pub const NOISE: i32 = -1;

/// Below this size neighbor queries scan all pairs.
const BRUTE_FORCE_BELOW: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("invalid DBSCAN parameters: eps={eps}, min_pts={min_pts}")]
    InvalidParams { eps: f64, min_pts: usize },
    #[error("labeling has {labels} labels for {points} points")]
    LabelMismatch { labels: usize, points: usize },
    #[error("every point is noise")]
    AllNoise,
    #[error("empty point set")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanParams {
    eps: f64,
    min_pts: usize,
}

impl Default for DbscanParams {
    fn default() -> Self {
        Self {
            eps: 0.75,
            min_pts: 5,
        }
    }
}

impl DbscanParams {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self, ClusterError> {
        if !(eps.is_finite() && eps > 0.0) || min_pts == 0 {
            return Err(ClusterError::InvalidParams { eps, min_pts });
        }
        Ok(Self { eps, min_pts })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn min_pts(&self) -> usize {
        self.min_pts
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabeling {
    labels: Vec<i32>,
    cluster_sizes: Vec<usize>,
}

impl ClusterLabeling {
    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_sizes.len()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    /// Point indices of cluster `id`, ascending.
    pub fn members(&self, id: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == id as i32)
            .map(|(i, _)| i)
            .collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // lower index becomes the root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

type Cell = (i64, i64, i64);

/// Exact fixed-radius neighbor search.
enum NeighborIndex<'a> {
    Brute(&'a [Point3<f64>]),
    Grid {
        points: &'a [Point3<f64>],
        cell_size: f64,
        cells: HashMap<Cell, Vec<usize>>,
    },
}

impl<'a> NeighborIndex<'a> {
    fn new(points: &'a [Point3<f64>], eps: f64) -> Self {
        if points.len() < BRUTE_FORCE_BELOW {
            return NeighborIndex::Brute(points);
        }
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(cell_of(p, eps)).or_default().push(i);
        }
        NeighborIndex::Grid {
            points,
            cell_size: eps,
            cells,
        }
    }

    /// Calls `f(j, squared_distance)` for every `j` with distance `<= eps`,
    /// including `i` itself.
    fn for_each_neighbor(&self, i: usize, eps_sq: f64, mut f: impl FnMut(usize, f64)) {
        match self {
            NeighborIndex::Brute(points) => {
                let p = &points[i];
                for (j, q) in points.iter().enumerate() {
                    let d = (p - q).norm_squared();
                    if d <= eps_sq {
                        f(j, d);
                    }
                }
            }
            NeighborIndex::Grid {
                points,
                cell_size,
                cells,
            } => {
                let p = &points[i];
                let (cx, cy, cz) = cell_of(p, *cell_size);
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        for dz in -1..=1 {
                            let key = (cx.saturating_add(dx), cy.saturating_add(dy), cz.saturating_add(dz));
                            let Some(bucket) = cells.get(&key) else {
                                continue;
                            };
                            for &j in bucket {
                                let d = (p - points[j]).norm_squared();
                                if d <= eps_sq {
                                    f(j, d);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

fn cell_of(p: &Point3<f64>, size: f64) -> Cell {
    // `as` saturates for out-of-range values
    (
        (p.x / size).floor() as i64,
        (p.y / size).floor() as i64,
        (p.z / size).floor() as i64,
    )
}

/// Density-based clustering of `points`. Deterministic for a given input.
pub fn dbscan(points: &PointCloud, params: &DbscanParams) -> ClusterLabeling {
    let pts = points.positions();
    let n = pts.len();
    let eps_sq = params.eps * params.eps;
    let index = NeighborIndex::new(pts, params.eps);

    let is_core: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut count = 0usize;
            index.for_each_neighbor(i, eps_sq, |_, _| count += 1);
            count >= params.min_pts
        })
        .collect();

    let mut uf = UnionFind::new(n);
    for i in (0..n).filter(|&i| is_core[i]) {
        index.for_each_neighbor(i, eps_sq, |j, _| {
            if j > i && is_core[j] {
                uf.union(i, j);
            }
        });
    }

    let mut labels = vec![NOISE; n];
    let mut cluster_of_root: HashMap<usize, i32> = HashMap::new();
    let mut cluster_sizes: Vec<usize> = Vec::new();
    for i in (0..n).filter(|&i| is_core[i]) {
        let root = uf.find(i);
        let id = *cluster_of_root.entry(root).or_insert_with(|| {
            cluster_sizes.push(0);
            cluster_sizes.len() as i32 - 1
        });
        labels[i] = id;
        cluster_sizes[id as usize] += 1;
    }

    for i in (0..n).filter(|&i| !is_core[i]) {
        let mut best: Option<(f64, usize)> = None;
        index.for_each_neighbor(i, eps_sq, |j, d| {
            if is_core[j] && best.is_none_or(|(bd, bj)| d < bd || (d == bd && j < bj)) {
                best = Some((d, j));
            }
        });
        if let Some((_, j)) = best {
            let id = labels[j];
            labels[i] = id;
            cluster_sizes[id as usize] += 1;
        }
    }

    ClusterLabeling {
        labels,
        cluster_sizes,
    }
}

/// Sub-cloud of the largest cluster (ties go to the lowest cluster id).
pub fn densest_cluster(points: &PointCloud, labeling: &ClusterLabeling) -> Result<PointCloud, ClusterError> {
    if labeling.labels.len() != points.len() {
        return Err(ClusterError::LabelMismatch {
            labels: labeling.labels.len(),
            points: points.len(),
        });
    }
    let best = labeling
        .cluster_sizes
        .iter()
        .enumerate()
        .filter(|(_, &size)| size > 0)
        .fold(None, |best: Option<(usize, usize)>, (id, &size)| match best {
            Some((_, s)) if s >= size => best,
            _ => Some((id, size)),
        });
    let (id, _) = best.ok_or(ClusterError::AllNoise)?;
    Ok(points.select(&labeling.members(id)))
}

/// The input point minimizing the summed Euclidean distance to all others.
/// Ties go to the lowest index.
pub fn medoid(points: &PointCloud) -> Result<Point3<f64>, ClusterError> {
    let pts = points.positions();
    if pts.is_empty() {
        return Err(ClusterError::Empty);
    }
    let sums: Vec<f64> = pts
        .par_iter()
        .map(|p| pts.iter().map(|q| (p - q).norm()).sum())
        .collect();
    let mut best = 0;
    for (i, &s) in sums.iter().enumerate().skip(1) {
        if s < sums[best] {
            best = i;
        }
    }
    Ok(pts[best])
}
