//! Oriented 3D boxes and the strategies that fit them to point segments.

mod calipers;
mod hull;
mod inflate;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use thiserror::Error;

pub use calipers::{min_area_rect, OrientedRect};
pub use hull::{convex_hull_2d, Hull2D};
pub use inflate::{assign_label, inflate, InflationStrategy, StrategyKind};

/// Floor applied to every box dimension, meters.
pub const MIN_EXTENT: f64 = 0.2;

#[derive(Debug, Error, PartialEq)]
pub enum BoxError {
    #[error("cannot fit a box to an empty point set")]
    EmptySegment,
    #[error("no shape prior for class `{0}`")]
    MissingPrior(String),
    #[error("invalid shape prior for `{label}`: {size:?}")]
    InvalidPrior { label: String, size: [f64; 3] },
    #[error("shape prior table: {0}")]
    PriorTable(String),
    #[error("invalid box: {0}")]
    InvalidBox(String),
}

/// Wraps an angle into `(-π, π]`.
pub fn normalize_yaw(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Wraps an angle into `(-π/2, π/2]`; rectangles are symmetric under a half turn.
pub fn fold_half_turn(angle: f64) -> f64 {
    let r = normalize_yaw(angle);
    if r > FRAC_PI_2 {
        r - PI
    } else if r <= -FRAC_PI_2 {
        r + PI
    } else {
        r
    }
}

/// Oriented box with a ground-plane heading about +z.
#[derive(Debug, Clone, PartialEq)]
pub struct Box3D {
    pub center: [f64; 3],
    /// `(length, width, height)`; length runs along the heading.
    pub size: [f64; 3],
    pub yaw: f64,
    pub label: String,
    pub score: f64,
    pub velocity: [f64; 2],
}

impl Box3D {
    pub fn new(center: [f64; 3], size: [f64; 3], yaw: f64, label: impl Into<String>, score: f64) -> Self {
        Self {
            center,
            size,
            yaw: normalize_yaw(yaw),
            label: label.into(),
            score,
            velocity: [0.0, 0.0],
        }
    }

    pub fn validate(&self) -> Result<(), BoxError> {
        let finite = self
            .center
            .iter()
            .chain(&self.size)
            .chain(&self.velocity)
            .chain([&self.yaw, &self.score])
            .all(|v| v.is_finite());
        if !finite {
            return Err(BoxError::InvalidBox("non-finite field".into()));
        }
        if self.size.iter().any(|&s| s <= 0.0) {
            return Err(BoxError::InvalidBox(format!("size {:?} must be positive", self.size)));
        }
        if !(self.yaw > -PI && self.yaw <= PI) {
            return Err(BoxError::InvalidBox(format!("yaw {} outside (-pi, pi]", self.yaw)));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(BoxError::InvalidBox(format!("score {} outside [0, 1]", self.score)));
        }
        Ok(())
    }

    /// Ground-plane corners, counter-clockwise, starting at front-right.
    pub fn ground_corners(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.yaw.sin_cos();
        let (hl, hw) = (self.size[0] / 2.0, self.size[1] / 2.0);
        [(hl, -hw), (hl, hw), (-hl, hw), (-hl, -hw)].map(|(a, b)| {
            [self.center[0] + c * a - s * b, self.center[1] + s * a + c * b]
        })
    }

    /// Whether `p` lies inside the box grown by `tol` on every side.
    pub fn contains(&self, p: [f64; 3], tol: f64) -> bool {
        let (s, c) = self.yaw.sin_cos();
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        let along = c * dx + s * dy;
        let across = -s * dx + c * dy;
        let up = p[2] - self.center[2];
        along.abs() <= self.size[0] / 2.0 + tol
            && across.abs() <= self.size[1] / 2.0 + tol
            && up.abs() <= self.size[2] / 2.0 + tol
    }
}

/// Fixed per-class box dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapePrior {
    pub label: String,
    pub size: [f64; 3],
}

impl ShapePrior {
    pub fn new(label: impl Into<String>, size: [f64; 3]) -> Result<Self, BoxError> {
        let label = label.into();
        if size.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(BoxError::InvalidPrior { label, size });
        }
        Ok(Self { label, size })
    }
}

/// Class text → prior dimensions. Serialized as a JSON object mapping each
/// class to `[length, width, height]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShapePriorTable {
    priors: BTreeMap<String, ShapePrior>,
}

impl ShapePriorTable {
    pub fn new(priors: impl IntoIterator<Item = ShapePrior>) -> Self {
        Self {
            priors: priors.into_iter().map(|p| (p.label.clone(), p)).collect(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, BoxError> {
        let raw: BTreeMap<String, [f64; 3]> =
            serde_json::from_str(text).map_err(|e| BoxError::PriorTable(e.to_string()))?;
        let priors = raw
            .into_iter()
            .map(|(label, size)| ShapePrior::new(label, size))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(priors))
    }

    pub fn get(&self, label: &str) -> Option<&ShapePrior> {
        self.priors.get(label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.priors.keys().map(String::as_str)
    }
}
