use nalgebra::Point2;

use super::{convex_hull_2d, min_area_rect, normalize_yaw, Box3D, BoxError, OrientedRect, ShapePriorTable, MIN_EXTENT};
use crate::cluster::medoid;
use crate::geom::PointCloud;
use crate::io::InstanceDetection;

/// How a point segment becomes a box.
#[derive(Debug, Clone, PartialEq)]
pub enum InflationStrategy {
    /// Medoid center, per-class prior size, heading from the hint (or 0).
    MedoidPrior(ShapePriorTable),
    /// Center, size and heading all from the minimum-area rectangle.
    CalipersFull,
    /// Medoid center; size and heading from the minimum-area rectangle.
    MedoidCalipers,
}

/// Strategy tag without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    MedoidPrior,
    CalipersFull,
    MedoidCalipers,
}

impl InflationStrategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            InflationStrategy::MedoidPrior(_) => StrategyKind::MedoidPrior,
            InflationStrategy::CalipersFull => StrategyKind::CalipersFull,
            InflationStrategy::MedoidCalipers => StrategyKind::MedoidCalipers,
        }
    }

    /// Checks that a prior-based strategy covers every class in `classes`.
    pub fn check_classes<'a>(&self, classes: impl IntoIterator<Item = &'a str>) -> Result<(), BoxError> {
        if let InflationStrategy::MedoidPrior(table) = self {
            for class in classes {
                if table.get(class).is_none() {
                    return Err(BoxError::MissingPrior(class.to_string()));
                }
            }
        }
        Ok(())
    }
}

fn ground_rect(segment: &PointCloud) -> Result<OrientedRect, BoxError> {
    let ground: Vec<Point2<f64>> = segment.positions().iter().map(|p| Point2::new(p.x, p.y)).collect();
    Ok(min_area_rect(&convex_hull_2d(&ground)?))
}

/// Fits a box to a segment expressed in a z-up evaluation frame.
///
/// Every dimension is floored at [`MIN_EXTENT`]; velocity is zero.
pub fn inflate(
    segment: &PointCloud,
    strategy: &InflationStrategy,
    label: &str,
    score: f64,
    heading_hint: Option<f64>,
) -> Result<Box3D, BoxError> {
    if segment.is_empty() {
        return Err(BoxError::EmptySegment);
    }
    let (z_lo, z_hi) = segment
        .positions()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)));
    let z_mid = (z_lo + z_hi) / 2.0;
    let height = (z_hi - z_lo).max(MIN_EXTENT);
    let medoid_xy = || -> Result<[f64; 2], BoxError> {
        let m = medoid(segment).map_err(|_| BoxError::EmptySegment)?;
        Ok([m.x, m.y])
    };

    let (center, size, yaw) = match strategy {
        InflationStrategy::MedoidPrior(table) => {
            let prior = table.get(label).ok_or_else(|| BoxError::MissingPrior(label.to_string()))?;
            let [x, y] = medoid_xy()?;
            ([x, y, z_mid], prior.size, heading_hint.unwrap_or(0.0))
        }
        InflationStrategy::CalipersFull => {
            let r = ground_rect(segment)?;
            (
                [r.center[0], r.center[1], z_mid],
                [r.extent[0].max(MIN_EXTENT), r.extent[1].max(MIN_EXTENT), height],
                r.yaw,
            )
        }
        InflationStrategy::MedoidCalipers => {
            let r = ground_rect(segment)?;
            let [x, y] = medoid_xy()?;
            (
                [x, y, z_mid],
                [r.extent[0].max(MIN_EXTENT), r.extent[1].max(MIN_EXTENT), height],
                r.yaw,
            )
        }
    };
    Ok(Box3D {
        center,
        size,
        yaw: normalize_yaw(yaw),
        label: label.to_string(),
        score,
        velocity: [0.0, 0.0],
    })
}

/// Copies the detection's class label and confidence onto the box.
pub fn assign_label(det: &InstanceDetection, b: Box3D) -> Box3D {
    Box3D {
        label: det.label.clone(),
        score: det.score,
        ..b
    }
}
