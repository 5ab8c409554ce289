//! File formats and dataset layout.

mod calib;
mod config;
mod dataset;
mod lidar;
mod raster;
mod records;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lift::InstanceMask;

pub use calib::{parse_calibration, read_calibration, Calibration, CalibrationRecord, PoseRecord};
pub use config::{PipelineConfig, PointSource};
pub use dataset::{load_manifest, FrameBundle, FrameEntry, LidarFrame, Manifest, MANIFEST_NAME};
pub use lidar::{encode_lidar_bin, parse_lidar_bin, read_lidar_bin, write_lidar_bin, LIDAR_RECORD_BYTES};
pub use raster::{
    encode_depth_png, encode_depth_raw, encode_id_map, parse_depth, read_depth, read_id_map, read_rgb_png,
    write_rgb_png, IdMap, Rle, RAW_DEPTH_MAGIC,
};
pub use records::{parse_boxes, read_boxes, to_json_string, write_boxes, BoxRecord};

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Which pixels belong to a detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskRef {
    /// Instance id inside the frame's id-map PNG.
    PngId(u32),
    Rle(Rle),
}

/// One text-prompted 2D detection with its instance mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDetection {
    pub label: String,
    pub score: f64,
    /// `[x1, y1, x2, y2]` in pixels.
    pub box2d: [f64; 4],
    pub mask: MaskRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading_hint: Option<f64>,
}

impl InstanceDetection {
    /// Checks score range and that the box is non-empty and inside the image.
    pub fn validate(&self, width: u32, height: u32) -> std::result::Result<(), String> {
        if self.label.is_empty() {
            return Err("empty label".into());
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(format!("score {} outside [0, 1]", self.score));
        }
        let [x1, y1, x2, y2] = self.box2d;
        let (w, h) = (f64::from(width), f64::from(height));
        if !(0.0 <= x1 && x1 < x2 && x2 <= w && 0.0 <= y1 && y1 < y2 && y2 <= h) {
            return Err(format!("box2d {:?} is empty or outside the {width}x{height} image", self.box2d));
        }
        if self.heading_hint.is_some_and(|a| !a.is_finite()) {
            return Err("non-finite heading_hint".into());
        }
        Ok(())
    }

    /// Materializes the mask; `id_map` is the frame's instance-id image.
    pub fn resolve_mask(&self, id_map: Option<&IdMap>, width: u32, height: u32) -> std::result::Result<InstanceMask, String> {
        let mask = match &self.mask {
            MaskRef::PngId(id) => {
                let map = id_map.ok_or("png_id mask without a masks file for the frame")?;
                let id16 = u16::try_from(*id).map_err(|_| format!("mask id {id} exceeds 16 bits"))?;
                if id16 == 0 {
                    return Err("mask id 0 is background".into());
                }
                InstanceMask::from_id_map(map.width, map.height, &map.ids, u32::from(id16)).map_err(|e| e.to_string())?
            }
            MaskRef::Rle(rle) => rle.decode(0)?,
        };
        if (mask.width(), mask.height()) != (width, height) {
            return Err(format!(
                "mask is {}x{}, image is {width}x{height}",
                mask.width(),
                mask.height()
            ));
        }
        Ok(mask)
    }
}
