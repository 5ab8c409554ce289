//! Rigid-body poses, the pinhole camera model, and pixel/point mappings.
//!
//! Quaternions are scalar-first `(w, x, y, z)`, matching nuScenes calibration
//! records. Camera frames are z-forward, x-right, y-down.

use nalgebra::{Matrix3, Point3, Quaternion, UnitQuaternion, Vector3};
use thiserror::Error;

/// Minimum camera-frame depth (meters) a point must exceed to be projected.
pub const Z_MIN: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("quaternion ({0}, {1}, {2}, {3}) cannot be normalized")]
    DegenerateQuaternion(f64, f64, f64, f64),
    #[error("non-finite pose component")]
    NonFinitePose,
    #[error("invalid camera intrinsics: {0}")]
    InvalidCamera(String),
    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },
    #[error("attribute `{name}` has length {len}, expected {expected}")]
    AttributeLength {
        name: &'static str,
        len: usize,
        expected: usize,
    },
    #[error("invalid depth sample {0} (must be positive and finite)")]
    InvalidDepth(f64),
}

/// A rigid transform `p -> R p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se3Pose {
    rotation: UnitQuaternion<f64>,
    translation: Vector3<f64>,
}

impl Default for Se3Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Se3Pose {
    pub fn identity() -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose from a scalar-first quaternion and a translation. The
    /// quaternion is renormalized.
    pub fn from_wxyz(q: [f64; 4], translation: [f64; 3]) -> Result<Self, GeomError> {
        if q.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(GeomError::NonFinitePose);
        }
        let quat = Quaternion::new(q[0], q[1], q[2], q[3]);
        let norm = quat.norm();
        if norm < 1e-12 {
            return Err(GeomError::DegenerateQuaternion(q[0], q[1], q[2], q[3]));
        }
        Ok(Self {
            rotation: UnitQuaternion::new_normalize(quat),
            translation: Vector3::from(translation),
        })
    }

    pub fn from_parts(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation: UnitQuaternion::new_normalize(rotation.into_inner()),
            translation,
        }
    }

    /// Rotation about +z by `yaw` radians.
    pub fn from_yaw(yaw: f64, translation: [f64; 3]) -> Self {
        Self {
            rotation: UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw),
            translation: Vector3::from(translation),
        }
    }

    pub fn rotation(&self) -> &UnitQuaternion<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    /// Quaternion as `[w, x, y, z]`.
    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.rotation.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn inverse(&self) -> Self {
        let inv = self.rotation.inverse();
        Self {
            rotation: inv,
            translation: -(inv * self.translation),
        }
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Se3Pose) -> Self {
        let rotation = UnitQuaternion::new_normalize((self.rotation * other.rotation).into_inner());
        Self {
            rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        self.rotation * p + self.translation
    }

    /// Rotation angle of the pose, in `[0, π]`.
    pub fn angle(&self) -> f64 {
        self.rotation.angle()
    }

    /// Heading of the rotated +x axis projected onto the ground plane.
    pub fn yaw(&self) -> f64 {
        let x = self.rotation * Vector3::x();
        x.y.atan2(x.x)
    }
}

/// Coordinate frame a point cloud is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Lidar,
    Camera,
    Ego,
    Global,
}

/// Columnar 3D points with optional per-point attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    positions: Vec<Point3<f64>>,
    intensity: Option<Vec<f32>>,
    ring: Option<Vec<f32>>,
    frame: Frame,
}

impl PointCloud {
    pub fn new(positions: Vec<Point3<f64>>, frame: Frame) -> Result<Self, GeomError> {
        Self::with_attributes(positions, None, None, frame)
    }

    pub fn with_attributes(
        positions: Vec<Point3<f64>>,
        intensity: Option<Vec<f32>>,
        ring: Option<Vec<f32>>,
        frame: Frame,
    ) -> Result<Self, GeomError> {
        if let Some(index) = positions
            .iter()
            .position(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
        {
            return Err(GeomError::NonFinitePoint { index });
        }
        for (name, attr) in [("intensity", &intensity), ("ring", &ring)] {
            if let Some(values) = attr {
                if values.len() != positions.len() {
                    return Err(GeomError::AttributeLength {
                        name,
                        len: values.len(),
                        expected: positions.len(),
                    });
                }
            }
        }
        Ok(Self {
            positions,
            intensity,
            ring,
            frame,
        })
    }

    pub fn empty(frame: Frame) -> Self {
        Self {
            positions: Vec::new(),
            intensity: None,
            ring: None,
            frame,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point3<f64>] {
        &self.positions
    }

    pub fn intensity(&self) -> Option<&[f32]> {
        self.intensity.as_deref()
    }

    pub fn ring(&self) -> Option<&[f32]> {
        self.ring.as_deref()
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Sub-cloud of the given indices, in the given order, with attributes.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let pick = |v: &Vec<f32>| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        PointCloud {
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            intensity: self.intensity.as_ref().map(pick),
            ring: self.ring.as_ref().map(pick),
            frame: self.frame,
        }
    }
}

/// Maps every point by `pose`, preserving order and attributes, and tags the
/// result with `target`.
pub fn transform_cloud(pose: &Se3Pose, cloud: &PointCloud, target: Frame) -> PointCloud {
    PointCloud {
        positions: cloud.positions.iter().map(|p| pose.apply(p)).collect(),
        intensity: cloud.intensity.clone(),
        ring: cloud.ring.clone(),
        frame: target,
    }
}

/// Distortion-free pinhole camera.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// Maps reference (ego) frame points into the camera frame.
    pub sensor_from_reference: Se3Pose,
}

impl CameraModel {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
        sensor_from_reference: Se3Pose,
    ) -> Result<Self, GeomError> {
        if !(fx.is_finite() && fx > 0.0 && fy.is_finite() && fy > 0.0) {
            return Err(GeomError::InvalidCamera(format!(
                "focal lengths must be positive (fx={fx}, fy={fy})"
            )));
        }
        if width == 0 || height == 0 {
            return Err(GeomError::InvalidCamera("image size must be non-zero".into()));
        }
        if !(0.0..width as f64).contains(&cx) || !(0.0..height as f64).contains(&cy) {
            return Err(GeomError::InvalidCamera(format!(
                "principal point ({cx}, {cy}) outside {width}x{height} image"
            )));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            sensor_from_reference,
        })
    }

    /// Projects a camera-frame point. Returns `None` when the point is not
    /// deeper than [`Z_MIN`] or lands outside the image.
    pub fn project(&self, p: &Point3<f64>) -> Option<[f64; 2]> {
        // Negated so NaN depths are rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(p.z > Z_MIN) {
            return None;
        }
        let u = self.fx * p.x / p.z + self.cx;
        let v = self.fy * p.y / p.z + self.cy;
        let inside = (0.0..self.width as f64).contains(&u) && (0.0..self.height as f64).contains(&v);
        inside.then_some([u, v])
    }

    pub fn backproject(&self, u: f64, v: f64, depth: f64) -> Result<Point3<f64>, GeomError> {
        if !(depth.is_finite() && depth > 0.0) {
            return Err(GeomError::InvalidDepth(depth));
        }
        Ok(Point3::new(
            (u - self.cx) * depth / self.fx,
            (v - self.cy) * depth / self.fy,
            depth,
        ))
    }
}

/// Projected points of a cloud: sub-pixel coordinates, camera depth, and the
/// index of the originating point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PixelPointMap {
    pub width: u32,
    pub height: u32,
    pub pixel_uv: Vec<[f64; 2]>,
    pub depth: Vec<f64>,
    pub source_index: Vec<usize>,
}

impl PixelPointMap {
    pub fn len(&self) -> usize {
        self.source_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_index.is_empty()
    }
}

/// Projects a camera-frame cloud into the image. Points behind the near plane
/// or outside the image are omitted.
pub fn project_cloud(cam: &CameraModel, cloud: &PointCloud) -> PixelPointMap {
    let mut map = PixelPointMap {
        width: cam.width,
        height: cam.height,
        ..Default::default()
    };
    for (i, p) in cloud.positions().iter().enumerate() {
        if let Some(uv) = cam.project(p) {
            map.pixel_uv.push(uv);
            map.depth.push(p.z);
            map.source_index.push(i);
        }
    }
    map
}

pub fn backproject_pixel(
    cam: &CameraModel,
    u: f64,
    v: f64,
    depth: f64,
) -> Result<Point3<f64>, GeomError> {
    cam.backproject(u, v, depth)
}
