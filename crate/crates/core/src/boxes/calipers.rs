use nalgebra::{Point2, Vector2};

use super::{fold_half_turn, Hull2D, MIN_EXTENT};

/// Oriented rectangle in the ground plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub center: [f64; 2],
    /// `(length, width)` with `length >= width`.
    pub extent: [f64; 2],
    /// Direction of the length axis, in `(-π/2, π/2]`.
    pub yaw: f64,
}

impl OrientedRect {
    pub fn area(&self) -> f64 {
        self.extent[0] * self.extent[1]
    }

    fn from_frame(origin: Point2<f64>, dir: Vector2<f64>, along: (f64, f64), across: (f64, f64)) -> Self {
        let normal = Vector2::new(-dir.y, dir.x);
        let mid_along = (along.0 + along.1) / 2.0;
        let mid_across = (across.0 + across.1) / 2.0;
        let center = origin + dir * mid_along + normal * mid_across;
        let (len_along, len_across) = (along.1 - along.0, across.1 - across.0);
        let yaw = dir.y.atan2(dir.x);
        let (extent, yaw) = if len_across > len_along {
            ([len_across, len_along], yaw + std::f64::consts::FRAC_PI_2)
        } else {
            ([len_along, len_across], yaw)
        };
        Self {
            center: [center.x, center.y],
            extent,
            yaw: fold_half_turn(yaw),
        }
    }
}

/// Minimum-area enclosing rectangle of a convex hull by rotating calipers.
///
/// For each hull edge the rectangle flush with that edge is bounded by three
/// more calipers (farthest forward, farthest back and farthest from the edge),
/// each of which only ever advances counter-clockwise. The first edge
/// achieving the minimum area wins.
///
/// One-point hulls yield a `MIN_EXTENT` square; two-point hulls a segment
/// box of width `MIN_EXTENT`.
pub fn min_area_rect(hull: &Hull2D) -> OrientedRect {
    let v = hull.vertices();
    match v.len() {
        0 => OrientedRect {
            center: [0.0, 0.0],
            extent: [MIN_EXTENT, MIN_EXTENT],
            yaw: 0.0,
        },
        1 => OrientedRect {
            center: [v[0].x, v[0].y],
            extent: [MIN_EXTENT, MIN_EXTENT],
            yaw: 0.0,
        },
        2 => {
            let d = v[1] - v[0];
            let mid = nalgebra::center(&v[0], &v[1]);
            OrientedRect {
                center: [mid.x, mid.y],
                extent: [d.norm().max(MIN_EXTENT), MIN_EXTENT],
                yaw: fold_half_turn(d.y.atan2(d.x)),
            }
        }
        n => {
            let at = |i: usize| v[i % n];
            // Pointers are unbounded counters; `at` wraps them.
            let (mut fwd, mut top, mut back) = (1usize, 1usize, 1usize);
            let mut best: Option<(f64, OrientedRect)> = None;
            for i in 0..n {
                let origin = at(i);
                let dir = (at(i + 1) - origin).normalize();
                let normal = Vector2::new(-dir.y, dir.x);
                let along = |k: usize| (at(k) - origin).dot(&dir);
                let across = |k: usize| (at(k) - origin).dot(&normal);

                fwd = fwd.max(i + 1);
                while along(fwd + 1) > along(fwd) {
                    fwd += 1;
                }
                top = top.max(fwd);
                while across(top + 1) > across(top) {
                    top += 1;
                }
                back = back.max(top);
                while along(back + 1) < along(back) {
                    back += 1;
                }

                let (lo, hi, height) = (along(back), along(fwd), across(top));
                let area = (hi - lo) * height;
                if best.as_ref().is_none_or(|(a, _)| area < *a) {
                    let rect = OrientedRect::from_frame(origin, dir, (lo, hi), (0.0, height));
                    best = Some((area, rect));
                }
            }
            best.expect("hull has edges").1
        }
    }
}
