//! Camera calibration records.
//!
//! ```json
//! {
//!   "camera_intrinsic": [[fx, 0, cx], [0, fy, cy], [0, 0, 1]],
//!   "image_size": [width, height],
//!   "camera_to_ego": {"rotation": [w, x, y, z], "translation": [x, y, z]},
//!   "lidar_to_ego": {"rotation": [w, x, y, z], "translation": [x, y, z]},
//!   "ego_to_global": {"rotation": [w, x, y, z], "translation": [x, y, z]},
//!   "distortion": [k1, k2, p1, p2, k3]
//! }
//! ```
//!
//! Poses follow the nuScenes `calibrated_sensor` / `ego_pose` convention: each
//! maps points from the named source frame into the target frame.
//! `lidar_to_ego` and `distortion` are optional; distortion is ignored.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{CameraModel, Se3Pose};

const QUATERNION_NORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRecord {
    pub rotation: [f64; 4],
    pub translation: [f64; 3],
}

impl PoseRecord {
    pub fn from_pose(pose: &Se3Pose) -> Self {
        let t = pose.translation();
        Self {
            rotation: pose.wxyz(),
            translation: [t.x, t.y, t.z],
        }
    }

    fn to_pose(&self, name: &str) -> std::result::Result<Se3Pose, String> {
        let norm = self.rotation.iter().map(|v| v * v).sum::<f64>().sqrt();
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !((norm - 1.0).abs() <= QUATERNION_NORM_TOLERANCE) {
            return Err(format!("{name}: quaternion norm {norm} is not 1"));
        }
        Se3Pose::from_wxyz(self.rotation, self.translation).map_err(|e| format!("{name}: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationRecord {
    pub camera_intrinsic: [[f64; 3]; 3],
    pub image_size: [u32; 2],
    pub camera_to_ego: PoseRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lidar_to_ego: Option<PoseRecord>,
    pub ego_to_global: PoseRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<Vec<f64>>,
}

/// A camera with the pose chain linking it to the LiDAR and global frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// `sensor_from_reference` maps ego points into the camera.
    pub camera: CameraModel,
    pub ego_from_lidar: Option<Se3Pose>,
    pub global_from_ego: Se3Pose,
}

impl Calibration {
    pub fn ego_from_camera(&self) -> Se3Pose {
        self.camera.sensor_from_reference.inverse()
    }

    pub fn global_from_camera(&self) -> Se3Pose {
        self.global_from_ego.compose(&self.ego_from_camera())
    }

    pub fn ego_from_global(&self) -> Se3Pose {
        self.global_from_ego.inverse()
    }

    /// Maps LiDAR points into the camera; `None` without a LiDAR pose.
    pub fn camera_from_lidar(&self) -> Option<Se3Pose> {
        self.ego_from_lidar
            .map(|l| self.camera.sensor_from_reference.compose(&l))
    }
}

impl CalibrationRecord {
    pub fn resolve(&self) -> std::result::Result<Calibration, String> {
        let k = &self.camera_intrinsic;
        if k[0][1] != 0.0 || k[1][0] != 0.0 || k[2] != [0.0, 0.0, 1.0] {
            return Err(format!("camera_intrinsic {k:?} is not a skew-free pinhole matrix"));
        }
        if self.distortion.as_ref().is_some_and(|d| d.iter().any(|&c| c != 0.0)) {
            log::warn!("ignoring non-zero lens distortion coefficients; images are assumed rectified");
        }
        let ego_from_camera = self.camera_to_ego.to_pose("camera_to_ego")?;
        let camera = CameraModel::new(
            k[0][0],
            k[1][1],
            k[0][2],
            k[1][2],
            self.image_size[0],
            self.image_size[1],
            ego_from_camera.inverse(),
        )
        .map_err(|e| e.to_string())?;
        Ok(Calibration {
            camera,
            ego_from_lidar: self.lidar_to_ego.as_ref().map(|p| p.to_pose("lidar_to_ego")).transpose()?,
            global_from_ego: self.ego_to_global.to_pose("ego_to_global")?,
        })
    }
}

pub fn parse_calibration(text: &str) -> std::result::Result<Calibration, String> {
    let record: CalibrationRecord = serde_json::from_str(text).map_err(|e| e.to_string())?;
    record.resolve()
}

pub fn read_calibration(path: &Path) -> Result<Calibration> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_calibration(&text).map_err(|m| Error::parse(path, m))
}
