//! Slow, obviously-correct reference implementations.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{Point2, Point3};

/// O(N²) DBSCAN under the crate's labeling rules: core points need
/// `min_pts` neighbors within `eps` (self included), clusters are connected
/// core components numbered by lowest index, and border points join their
/// nearest core neighbor's cluster (lower index on ties).
pub fn naive_dbscan(points: &[Point3<f64>], eps: f64, min_pts: usize) -> Vec<i32> {
    let n = points.len();
    let eps2 = eps * eps;
    let d2 = |i: usize, j: usize| (points[i] - points[j]).norm_squared();
    let neighbors: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| d2(i, j) <= eps2).collect()).collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut labels = vec![-1i32; n];
    let mut next = 0;
    for start in 0..n {
        if !core[start] || labels[start] >= 0 {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        labels[start] = next;
        while let Some(i) = queue.pop_front() {
            for &j in &neighbors[i] {
                if core[j] && labels[j] < 0 {
                    labels[j] = next;
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }
    for i in 0..n {
        if core[i] {
            continue;
        }
        let nearest = neighbors[i]
            .iter()
            .copied()
            .filter(|&j| core[j])
            .min_by(|&a, &b| d2(i, a).total_cmp(&d2(i, b)).then(a.cmp(&b)));
        if let Some(j) = nearest {
            labels[i] = labels[j];
        }
    }
    labels
}

/// Clusters as sorted member lists (sorted by first member) plus the noise set.
pub fn partition(labels: &[i32]) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut groups: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let noise = groups.remove(&-1).unwrap_or_default();
    let mut clusters: Vec<Vec<usize>> = groups.into_values().collect();
    clusters.sort();
    (clusters, noise)
}

fn cross(o: Point2<f64>, a: Point2<f64>, b: Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_closed_segment(a: Point2<f64>, b: Point2<f64>, p: Point2<f64>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Strict hull vertices by checking every ordered pair: `(i, j)` is a hull
/// edge when every point lies left of it or on the closed segment. O(N³).
pub fn brute_hull_vertices(points: &[Point2<f64>]) -> Vec<[f64; 2]> {
    let mut pts: Vec<Point2<f64>> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts.iter().map(|p| [p.x, p.y]).collect();
    }
    let mut out = Vec::new();
    for &a in &pts {
        for &b in &pts {
            if a == b {
                continue;
            }
            let edge = pts.iter().all(|&p| {
                let c = cross(a, b, p);
                c > 0.0 || (c == 0.0 && on_closed_segment(a, b, p))
            });
            if edge {
                out.push([a.x, a.y]);
                out.push([b.x, b.y]);
            }
        }
    }
    out.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    out.dedup();
    out
}

/// Gift wrapping, counter-clockwise, collinear points skipped. O(N·h).
pub fn jarvis_hull(points: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let start = *points
        .iter()
        .min_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)))
        .expect("non-empty");
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut next = None::<Point2<f64>>;
        for &p in points {
            if p == current {
                continue;
            }
            next = Some(match next {
                None => p,
                Some(q) => {
                    let c = cross(current, q, p);
                    // p is clockwise of q, or collinear and farther
                    if c < 0.0 || (c == 0.0 && (p - current).norm_squared() > (q - current).norm_squared()) {
                        p
                    } else {
                        q
                    }
                }
            });
        }
        let Some(n) = next else { break };
        if n == start || hull.len() > points.len() {
            break;
        }
        hull.push(n);
        current = n;
    }
    hull
}

/// Area of the bounding rectangle aligned with direction `theta`.
pub fn area_at(points: &[Point2<f64>], theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let (mut lo_u, mut hi_u, mut lo_v, mut hi_v) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        let u = c * p.x + s * p.y;
        let v = -s * p.x + c * p.y;
        lo_u = lo_u.min(u);
        hi_u = hi_u.max(u);
        lo_v = lo_v.min(v);
        hi_v = hi_v.max(v);
    }
    (hi_u - lo_u) * (hi_v - lo_v)
}

/// Minimum of `area_at` over `n` evenly spaced angles in `[0, π/2)`.
pub fn sweep_min_area(points: &[Point2<f64>], n: usize) -> f64 {
    (0..n)
        .map(|k| area_at(points, k as f64 * std::f64::consts::FRAC_PI_2 / n as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Minimum of `area_at` over the directions of the hull's edges; the optimum
/// rectangle is always flush with some edge.
pub fn edge_min_area(hull: &[Point2<f64>]) -> f64 {
    let n = hull.len();
    (0..n)
        .map(|i| {
            let d = hull[(i + 1) % n] - hull[i];
            area_at(hull, d.y.atan2(d.x))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Whether the minimum-area rectangle is unique: no edge direction that
/// differs from the best one modulo π/2 comes within `rel` of its area.
pub fn unique_min_rect(hull: &[Point2<f64>], rel: f64) -> bool {
    let n = hull.len();
    let dirs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let d = hull[(i + 1) % n] - hull[i];
            let theta = d.y.atan2(d.x);
            (theta, area_at(hull, theta))
        })
        .collect();
    let Some(&(best_theta, best)) = dirs.iter().min_by(|a, b| a.1.total_cmp(&b.1)) else {
        return false;
    };
    let quarter = std::f64::consts::FRAC_PI_2;
    dirs.iter().all(|&(theta, area)| {
        let d = (theta - best_theta).rem_euclid(quarter);
        let same = d.min(quarter - d) < 1e-9;
        same || area > best * (1.0 + rel)
    })
}
