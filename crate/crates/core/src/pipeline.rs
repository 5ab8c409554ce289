//! End-to-end runs over a dataset root: box inference, evaluation and
//! pseudo-LiDAR / fog dataset generation.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxes::{assign_label, inflate};
use crate::cluster::{dbscan, densest_cluster};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalBox, MatchConfig, MetricsReport};
use crate::fog::{apply_fog, FogParams};
use crate::geom::{project_cloud, transform_cloud, Frame, PointCloud, Se3Pose};
use crate::io::{
    load_manifest, read_boxes, read_depth, read_id_map, read_lidar_bin, read_rgb_png, to_json_string, write_file,
    write_lidar_bin, write_rgb_png, FrameBundle, IdMap, LidarFrame, Manifest, PipelineConfig, PointSource,
    MANIFEST_NAME,
};
use crate::lift::{depth_to_pseudocloud, lift_mask_depth, lift_mask_lidar, LiftedSegment};

/// A detection that produced no box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropRecord {
    pub frame_id: String,
    pub detection_index: usize,
    pub label: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InflateOutput {
    /// Ordered by frame id, then detection index.
    pub predictions: Vec<EvalBox>,
    pub drops: Vec<DropRecord>,
}

/// Camera-frame points of the frame's cloud, or its depth map, loaded once
/// per frame.
enum FrameSource {
    Cloud(crate::geom::PixelPointMap, PointCloud),
    Depth(crate::lift::DepthMap),
}

fn load_source(frame: &FrameBundle, source: PointSource) -> Result<FrameSource> {
    let missing = |what: &str| {
        Error::Config(format!("source is {what} but frame {:?} has no {what} file", frame.frame_id))
    };
    match source {
        PointSource::Lidar => {
            let path = frame.lidar.as_ref().ok_or_else(|| missing("lidar"))?;
            let cloud = read_lidar_bin(path)?;
            let camera_from_cloud = match frame.lidar_frame {
                LidarFrame::Camera => Se3Pose::identity(),
                LidarFrame::Lidar => frame
                    .calibration
                    .camera_from_lidar()
                    .expect("checked when the manifest was resolved"),
            };
            let cloud = transform_cloud(&camera_from_cloud, &cloud, Frame::Camera);
            Ok(FrameSource::Cloud(project_cloud(frame.camera(), &cloud), cloud))
        }
        PointSource::Depth => {
            let path = frame.depth.as_ref().ok_or_else(|| missing("depth"))?;
            Ok(FrameSource::Depth(read_depth(path)?))
        }
    }
}

fn infer_frame(frame: &FrameBundle, config: &PipelineConfig) -> Result<(Vec<EvalBox>, Vec<DropRecord>)> {
    let mut boxes = Vec::new();
    let mut drops = Vec::new();
    let wanted = |label: &str| config.classes.as_ref().is_none_or(|c| c.iter().any(|k| k == label));
    if !frame.detections.iter().any(|d| wanted(&d.label)) {
        return Ok((boxes, drops));
    }
    let source = load_source(frame, config.source)?;
    let id_map: Option<IdMap> = frame.masks.as_deref().map(read_id_map).transpose()?;
    let cam = frame.camera();
    let global_from_camera = frame.calibration.global_from_camera();

    for (index, det) in frame.detections.iter().enumerate() {
        if !wanted(&det.label) {
            continue;
        }
        let detection_ref = format!("{}#{index}", frame.frame_id);
        let attempt = || -> std::result::Result<EvalBox, String> {
            let mask = det.resolve_mask(id_map.as_ref(), cam.width, cam.height)?;
            let LiftedSegment { points, .. } = match &source {
                FrameSource::Cloud(map, cloud) => lift_mask_lidar(&mask, map, cloud, &detection_ref),
                FrameSource::Depth(depth) => lift_mask_depth(&mask, depth, cam, config.stride, &detection_ref),
            }
            .map_err(|e| e.to_string())?;
            let mut points = transform_cloud(&global_from_camera, &points, Frame::Global);
            if let Some(params) = config.dbscan_for(&det.label) {
                let labeling = dbscan(&points, &params);
                points = densest_cluster(&points, &labeling).map_err(|e| e.to_string())?;
            }
            let b = inflate(&points, &config.strategy, &det.label, det.score, det.heading_hint)
                .map_err(|e| e.to_string())?;
            Ok(EvalBox::new(frame.frame_id.clone(), assign_label(det, b)))
        };
        match attempt() {
            Ok(b) => boxes.push(b),
            Err(reason) => {
                log::warn!("{detection_ref} ({}): dropped: {reason}", det.label);
                drops.push(DropRecord {
                    frame_id: frame.frame_id.clone(),
                    detection_index: index,
                    label: det.label.clone(),
                    reason,
                });
            }
        }
    }
    Ok((boxes, drops))
}

/// Infers one global-frame box per usable detection of every frame under
/// `root`. Detections whose segment is empty or all noise are dropped and
/// reported; I/O and schema problems abort the run.
pub fn run_inflate(config: &PipelineConfig, root: &Path) -> Result<InflateOutput> {
    let frames = load_manifest(root)?;
    let per_frame: Vec<(Vec<EvalBox>, Vec<DropRecord>)> = frames
        .par_iter()
        .map(|f| infer_frame(f, config))
        .collect::<Result<_>>()?;
    let mut out = InflateOutput::default();
    for (boxes, drops) in per_frame {
        out.predictions.extend(boxes);
        out.drops.extend(drops);
    }
    log::info!(
        "{} frames: {} boxes, {} dropped detections",
        frames.len(),
        out.predictions.len(),
        out.drops.len()
    );
    Ok(out)
}

/// Scores a prediction file against a ground-truth file.
pub fn run_eval(pred: &Path, gt: &Path, classes: Option<&[String]>, config: &MatchConfig) -> Result<MetricsReport> {
    let preds = read_boxes(pred)?;
    let gts = read_boxes(gt)?;
    Ok(evaluate(&preds, &gts, classes, config)?)
}

/// Writes the report as JSON at `path` and as a text table next to it
/// (same stem, `.txt`).
pub fn write_report(path: &Path, report: &MetricsReport) -> Result<PathBuf> {
    write_file(path, to_json_string(report).as_bytes())?;
    let table = path.with_extension("txt");
    write_file(&table, report.to_table().as_bytes())?;
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoOptions {
    /// Fog applied to every image; `None` copies images unchanged.
    pub fog: Option<FogParams>,
    /// Pixel stride of the depth-derived clouds; `None` keeps the input
    /// LiDAR files instead.
    pub stride: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PseudoSummary {
    pub frames_written: Vec<String>,
    /// Frames without a depth map.
    pub frames_skipped: Vec<String>,
}

fn file_stem_for(frame_id: &str) -> Result<&str> {
    let ok = !frame_id.is_empty()
        && frame_id != "."
        && frame_id != ".."
        && frame_id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(frame_id)
    } else {
        Err(Error::Config(format!("frame id {frame_id:?} is not usable as a file name")))
    }
}

fn copy_into(src: &Path, out_root: &Path, rel: PathBuf) -> Result<PathBuf> {
    let bytes = fs::read(src).map_err(|e| Error::io(src, e))?;
    write_file(&out_root.join(&rel), &bytes)?;
    Ok(rel)
}

fn extension_of(path: &Path, fallback: &str) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .map_or_else(|| fallback.to_string(), str::to_string)
}

/// Mirrors a dataset into `out_root` with fogged images and/or
/// depth-derived camera-frame clouds. Frames without depth are skipped.
/// Re-running with the same inputs rewrites identical bytes.
pub fn build_pseudo_dataset(in_root: &Path, out_root: &Path, options: &PseudoOptions) -> Result<PseudoSummary> {
    if let Some(0) = options.stride {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    let manifest = Manifest::load(in_root)?;
    let mut entries = manifest.frames.clone();
    entries.sort_by(|a, b| a.frame_id.cmp(&b.frame_id));
    let mut ids = BTreeSet::new();
    for e in &entries {
        ids.insert(file_stem_for(&e.frame_id)?);
    }

    let results: Vec<Option<crate::io::FrameEntry>> = entries
        .par_iter()
        .map(|entry| -> Result<Option<crate::io::FrameEntry>> {
            let Some(depth_rel) = &entry.depth else {
                log::warn!("frame {:?}: no depth map, skipped", entry.frame_id);
                return Ok(None);
            };
            let bundle = entry.resolve(in_root)?;
            let id = file_stem_for(&entry.frame_id)?;
            let depth_path = in_root.join(depth_rel);
            let mut out = entry.clone();

            out.calibration = copy_into(&in_root.join(&entry.calibration), out_root, format!("calib/{id}.json").into())?;
            out.depth = Some(copy_into(
                &depth_path,
                out_root,
                format!("depth/{id}.{}", extension_of(&depth_path, "png")).into(),
            )?);
            if let Some(masks) = &entry.masks {
                out.masks = Some(copy_into(&in_root.join(masks), out_root, format!("masks/{id}.png").into())?);
            }

            let image_rel = PathBuf::from(format!("images/{id}.png"));
            match options.fog.filter(|f| f.beta() > 0.0) {
                Some(fog) => {
                    let image = read_rgb_png(&bundle.image)?;
                    let depth = read_depth(&depth_path)?;
                    write_rgb_png(&out_root.join(&image_rel), &apply_fog(&image, &depth, &fog)?)?;
                }
                // Zero extinction leaves every pixel unchanged.
                None => {
                    copy_into(&bundle.image, out_root, image_rel.clone())?;
                }
            }
            out.image = image_rel;

            match options.stride {
                Some(stride) => {
                    let depth = read_depth(&depth_path)?;
                    let cloud = depth_to_pseudocloud(&depth, bundle.camera(), stride)?;
                    let rel = PathBuf::from(format!("pseudo_lidar/{id}.bin"));
                    write_lidar_bin(&out_root.join(&rel), &cloud)?;
                    out.lidar = Some(rel);
                    out.lidar_frame = LidarFrame::Camera;
                }
                None => {
                    if let Some(lidar) = &entry.lidar {
                        out.lidar = Some(copy_into(&in_root.join(lidar), out_root, format!("lidar/{id}.bin").into())?);
                    }
                }
            }
            Ok(Some(out))
        })
        .collect::<Result<_>>()?;

    let mut summary = PseudoSummary::default();
    let mut frames = Vec::new();
    for (entry, result) in entries.iter().zip(results) {
        match result {
            Some(out) => {
                summary.frames_written.push(entry.frame_id.clone());
                frames.push(out);
            }
            None => summary.frames_skipped.push(entry.frame_id.clone()),
        }
    }
    write_file(
        &out_root.join(MANIFEST_NAME),
        to_json_string(&Manifest { frames }).as_bytes(),
    )?;
    Ok(summary)
}
