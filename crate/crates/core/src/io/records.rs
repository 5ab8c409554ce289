//! Prediction and ground-truth box files.
//!
//! A JSON array of global-frame records:
//!
//! ```json
//! [{"frame_id": "f0", "label": "car", "score": 0.9,
//!   "center": [x, y, z], "size": [l, w, h], "yaw": 0.0,
//!   "velocity": [vx, vy], "attribute": "vehicle.moving", "num_pts": 12}]
//! ```
//!
//! `score` defaults to 1 and `velocity` to zero; `attribute` and `num_pts`
//! are optional. Yaw is wrapped into `(-pi, pi]` on read.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boxes::{normalize_yaw, Box3D};
use crate::error::{Error, Result};
use crate::eval::EvalBox;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxRecord {
    pub frame_id: String,
    pub label: String,
    #[serde(default = "one")]
    pub score: f64,
    pub center: [f64; 3],
    pub size: [f64; 3],
    pub yaw: f64,
    #[serde(default)]
    pub velocity: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_pts: Option<u32>,
}

impl From<&EvalBox> for BoxRecord {
    fn from(b: &EvalBox) -> Self {
        Self {
            frame_id: b.frame_id.clone(),
            label: b.bbox.label.clone(),
            score: b.bbox.score,
            center: b.bbox.center,
            size: b.bbox.size,
            yaw: b.bbox.yaw,
            velocity: b.bbox.velocity,
            attribute: b.attribute.clone(),
            num_pts: b.num_pts,
        }
    }
}

impl BoxRecord {
    pub fn into_eval_box(self) -> std::result::Result<EvalBox, String> {
        if self.frame_id.is_empty() || self.label.is_empty() {
            return Err("empty frame_id or label".into());
        }
        let bbox = Box3D {
            center: self.center,
            size: self.size,
            yaw: normalize_yaw(self.yaw),
            label: self.label,
            score: self.score,
            velocity: self.velocity,
        };
        bbox.validate().map_err(|e| e.to_string())?;
        Ok(EvalBox {
            frame_id: self.frame_id,
            bbox,
            attribute: self.attribute,
            num_pts: self.num_pts,
        })
    }
}

/// Parses a record array, reporting every offending record by index.
pub fn parse_boxes(text: &str) -> std::result::Result<Vec<EvalBox>, Vec<String>> {
    let raw: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| vec![e.to_string()])?;
    let mut boxes = Vec::with_capacity(raw.len());
    let mut problems = Vec::new();
    for (i, value) in raw.into_iter().enumerate() {
        match serde_json::from_value::<BoxRecord>(value)
            .map_err(|e| e.to_string())
            .and_then(BoxRecord::into_eval_box)
        {
            Ok(b) => boxes.push(b),
            Err(e) => problems.push(format!("record {i}: {e}")),
        }
    }
    if problems.is_empty() {
        Ok(boxes)
    } else {
        Err(problems)
    }
}

pub fn read_boxes(path: &Path) -> Result<Vec<EvalBox>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_boxes(&text).map_err(|problems| Error::Schema {
        path: path.to_path_buf(),
        problems,
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    text
}

pub fn write_boxes(path: &Path, boxes: &[EvalBox]) -> Result<()> {
    let records: Vec<BoxRecord> = boxes.iter().map(BoxRecord::from).collect();
    super::write_file(path, to_json_string(&records).as_bytes())
}
