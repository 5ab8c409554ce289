//! Dataset manifest.
//!
//! A dataset root holds `frames.json`; every path inside it is relative to
//! the root:
//!
//! ```json
//! {"frames": [{
//!   "frame_id": "f0", "camera": "CAM_FRONT",
//!   "calibration": "calib/f0.json", "image": "images/f0.png",
//!   "depth": "depth/f0.png", "lidar": "lidar/f0.bin", "lidar_frame": "lidar",
//!   "masks": "masks/f0.png",
//!   "detections": [{"label": "car", "score": 0.8, "box2d": [10, 20, 90, 80],
//!                   "mask": {"png_id": 1}}]
//! }]}
//! ```
//!
//! `lidar_frame` says whether the cloud is in the LiDAR sensor frame (the
//! default, placed via the calibration's `lidar_to_ego`) or already in the
//! camera frame, as pseudo-LiDAR clouds are.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::calib::{read_calibration, Calibration};
use super::InstanceDetection;
use crate::error::{Error, Result};
use crate::geom::{CameraModel, Se3Pose};

pub const MANIFEST_NAME: &str = "frames.json";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LidarFrame {
    #[default]
    Lidar,
    Camera,
}

impl LidarFrame {
    fn is_default(&self) -> bool {
        *self == LidarFrame::Lidar
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameEntry {
    pub frame_id: String,
    pub camera: String,
    pub calibration: PathBuf,
    pub image: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lidar: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "LidarFrame::is_default")]
    pub lidar_frame: LidarFrame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<PathBuf>,
    #[serde(default)]
    pub detections: Vec<InstanceDetection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub frames: Vec<FrameEntry>,
}

/// A frame with its calibration loaded and paths made absolute.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBundle {
    pub frame_id: String,
    pub camera_name: String,
    pub calibration: Calibration,
    pub image: PathBuf,
    pub depth: Option<PathBuf>,
    pub lidar: Option<PathBuf>,
    pub lidar_frame: LidarFrame,
    pub masks: Option<PathBuf>,
    pub detections: Vec<InstanceDetection>,
}

impl FrameBundle {
    pub fn camera(&self) -> &CameraModel {
        &self.calibration.camera
    }

    pub fn ego_from_global(&self) -> Se3Pose {
        self.calibration.ego_from_global()
    }
}

impl Manifest {
    pub fn load(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST_NAME);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::parse(&path, e.to_string()))?;
        let mut seen = BTreeSet::new();
        let mut problems = Vec::new();
        for (i, f) in manifest.frames.iter().enumerate() {
            if f.frame_id.is_empty() {
                problems.push(format!("frame {i}: empty frame_id"));
            } else if !seen.insert(f.frame_id.as_str()) {
                problems.push(format!("frame {i}: duplicate frame_id {:?}", f.frame_id));
            }
            if f.depth.is_none() && f.lidar.is_none() {
                problems.push(format!("frame {:?}: needs a depth or lidar path", f.frame_id));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Schema { path, problems });
        }
        Ok(manifest)
    }
}

impl FrameEntry {
    /// Loads the calibration and checks every detection against the image size.
    pub fn resolve(&self, root: &Path) -> Result<FrameBundle> {
        let calibration = read_calibration(&root.join(&self.calibration))?;
        let (w, h) = (calibration.camera.width, calibration.camera.height);
        let problems: Vec<String> = self
            .detections
            .iter()
            .enumerate()
            .filter_map(|(i, d)| d.validate(w, h).err().map(|e| format!("frame {:?} detection {i}: {e}", self.frame_id)))
            .collect();
        if !problems.is_empty() {
            return Err(Error::Schema {
                path: root.join(MANIFEST_NAME),
                problems,
            });
        }
        if self.lidar.is_some() && self.lidar_frame == LidarFrame::Lidar && calibration.ego_from_lidar.is_none() {
            return Err(Error::parse(
                root.join(&self.calibration),
                format!("frame {:?} has a LiDAR-frame cloud but no lidar_to_ego pose", self.frame_id),
            ));
        }
        Ok(FrameBundle {
            frame_id: self.frame_id.clone(),
            camera_name: self.camera.clone(),
            calibration,
            image: root.join(&self.image),
            depth: self.depth.as_ref().map(|p| root.join(p)),
            lidar: self.lidar.as_ref().map(|p| root.join(p)),
            lidar_frame: self.lidar_frame,
            masks: self.masks.as_ref().map(|p| root.join(p)),
            detections: self.detections.clone(),
        })
    }
}

/// Loads and resolves every frame, sorted by frame id.
pub fn load_manifest(root: &Path) -> Result<Vec<FrameBundle>> {
    let manifest = Manifest::load(root)?;
    let mut frames = manifest
        .frames
        .iter()
        .map(|f| f.resolve(root))
        .collect::<Result<Vec<_>>>()?;
    frames.sort_by(|a, b| a.frame_id.cmp(&b.frame_id));
    Ok(frames)
}
