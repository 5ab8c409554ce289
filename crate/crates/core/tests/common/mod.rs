//! Synthetic dataset builder shared by the integration tests.
//!
//! Each frame sees the same three boxes placed in the ego frame, with a
//! forward-looking camera and a roof LiDAR. Outliers are spread uniformly
//! through the scene volume, so some fall inside every detection's frustum.

#![allow(dead_code)]

pub mod fixture;
pub mod oracles;

use std::fs;
use std::path::Path;

use lift3d::boxes::Box3D;
use lift3d::eval::EvalBox;
use lift3d::geom::{CameraModel, Frame, PointCloud, Se3Pose};
use lift3d::io::{
    encode_depth_raw, to_json_string, write_boxes, write_file, write_lidar_bin, write_rgb_png, InstanceDetection,
    MaskRef, Rle, MANIFEST_NAME,
};
use lift3d::lift::{DepthMap, InstanceMask};
use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WIDTH: u32 = 1600;
pub const HEIGHT: u32 = 900;
pub const FOCAL: f64 = 1000.0;

/// Camera axes (x right, y down, z forward) expressed in the ego frame
/// (x forward, y left, z up).
pub const CAMERA_ROTATION: [f64; 4] = [0.5, -0.5, 0.5, -0.5];
pub const CAMERA_TRANSLATION: [f64; 3] = [1.5, 0.0, 1.5];
pub const LIDAR_TRANSLATION: [f64; 3] = [0.9, 0.0, 1.8];

#[derive(Debug, Clone)]
pub struct Planted {
    pub label: &'static str,
    pub score: f64,
    /// Ego frame.
    pub center: [f64; 3],
    pub size: [f64; 3],
    pub yaw: f64,
}

pub fn planted_boxes() -> Vec<Planted> {
    vec![
        Planted {
            label: "car",
            score: 0.9,
            center: [14.0, 4.0, 0.8],
            size: [4.5, 1.9, 1.6],
            yaw: 0.3,
        },
        Planted {
            label: "pedestrian",
            score: 0.7,
            center: [9.0, -2.5, 0.9],
            size: [0.8, 0.7, 1.8],
            yaw: 0.0,
        },
        Planted {
            label: "truck",
            score: 0.8,
            center: [30.0, -3.0, 1.5],
            size: [8.0, 2.5, 3.0],
            yaw: -0.2,
        },
    ]
}

#[derive(Debug, Clone)]
pub struct SceneOptions {
    pub seed: u64,
    pub frames: usize,
    pub points_per_box: usize,
    pub noise_points: usize,
    pub with_lidar: bool,
    pub with_depth: bool,
}

impl Default for SceneOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            frames: 1,
            points_per_box: 600,
            noise_points: 3000,
            with_lidar: true,
            with_depth: true,
        }
    }
}

pub fn camera_pose() -> Se3Pose {
    Se3Pose::from_wxyz(CAMERA_ROTATION, CAMERA_TRANSLATION).unwrap()
}

pub fn camera_model() -> CameraModel {
    CameraModel::new(
        FOCAL,
        FOCAL,
        WIDTH as f64 / 2.0,
        HEIGHT as f64 / 2.0,
        WIDTH,
        HEIGHT,
        camera_pose().inverse(),
    )
    .unwrap()
}

pub fn ego_pose(frame: usize) -> Se3Pose {
    Se3Pose::from_yaw(0.4 + 0.25 * frame as f64, [300.0 + 20.0 * frame as f64, 1200.0, 0.0])
}

pub fn frame_id(frame: usize) -> String {
    format!("f{frame:03}")
}

fn box_point(p: &Planted, local: [f64; 3]) -> Point3<f64> {
    let (s, c) = p.yaw.sin_cos();
    Point3::new(
        p.center[0] + c * local[0] - s * local[1],
        p.center[1] + s * local[0] + c * local[1],
        p.center[2] + local[2],
    )
}

/// Corners plus uniform interior samples, ego frame.
fn box_points(p: &Planted, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point3<f64>> {
    let h = p.size.map(|s| s / 2.0);
    let mut out = Vec::with_capacity(n + 8);
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for sz in [-1.0, 1.0] {
                out.push(box_point(p, [sx * h[0], sy * h[1], sz * h[2]]));
            }
        }
    }
    for _ in 0..n {
        out.push(box_point(p, std::array::from_fn(|k| rng.gen_range(-h[k]..=h[k]))));
    }
    out
}

fn pixel_rect(cam: &CameraModel, ego_points: &[Point3<f64>]) -> Option<([f64; 4], [u32; 4])> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in ego_points {
        let [u, v] = cam.project(&cam.sensor_from_reference.apply(p))?;
        lo = [lo[0].min(u), lo[1].min(v)];
        hi = [hi[0].max(u), hi[1].max(v)];
    }
    let rect = [lo[0].floor() as u32, lo[1].floor() as u32, hi[0].floor() as u32 + 1, hi[1].floor() as u32 + 1];
    Some(([lo[0], lo[1], hi[0], hi[1]], rect))
}

/// Camera-frame depth of the nearest planted box along pixel `(x, y)`, or 0.
fn render_depth(cam: &CameraModel, planted: &[Planted]) -> DepthMap {
    let ego_from_camera = cam.sensor_from_reference.inverse();
    let origin = ego_from_camera.apply(&Point3::origin());
    let rot = ego_from_camera.rotation_matrix();
    let mut values = vec![0f32; (WIDTH * HEIGHT) as usize];
    for y in 0..HEIGHT {
        for x in 0..WIDTH {
            let d_cam = Vector3::new((x as f64 - cam.cx) / cam.fx, (y as f64 - cam.cy) / cam.fy, 1.0);
            let d = rot * d_cam;
            let mut best = f64::INFINITY;
            for p in planted {
                let (s, c) = p.yaw.sin_cos();
                let rel = origin - Point3::from(p.center);
                let o = [c * rel.x + s * rel.y, -s * rel.x + c * rel.y, rel.z];
                let dir = [c * d.x + s * d.y, -s * d.x + c * d.y, d.z];
                let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
                for k in 0..3 {
                    let h = p.size[k] / 2.0;
                    if dir[k].abs() < 1e-15 {
                        if o[k].abs() > h {
                            t0 = f64::INFINITY;
                        }
                        continue;
                    }
                    let (a, b) = ((-h - o[k]) / dir[k], (h - o[k]) / dir[k]);
                    t0 = t0.max(a.min(b));
                    t1 = t1.min(a.max(b));
                }
                if t0 <= t1 && t0 < best {
                    best = t0;
                }
            }
            if best.is_finite() {
                // d_cam has unit z, so the ray parameter is the camera depth.
                values[(y * WIDTH + x) as usize] = best as f32;
            }
        }
    }
    DepthMap::new(WIDTH, HEIGHT, values).unwrap()
}

pub struct Scene {
    /// Global-frame ground truth.
    pub gt: Vec<EvalBox>,
    pub frame_ids: Vec<String>,
}

/// Writes a dataset root with `frames.json` plus `gt.json`.
pub fn write_scene(root: &Path, options: &SceneOptions) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let cam = camera_model();
    let ego_from_lidar = Se3Pose::from_wxyz([1.0, 0.0, 0.0, 0.0], LIDAR_TRANSLATION).unwrap();
    let lidar_from_ego = ego_from_lidar.inverse();
    let planted = planted_boxes();
    let mut gt = Vec::new();
    let mut frames = Vec::new();
    let mut frame_ids = Vec::new();

    for f in 0..options.frames {
        let id = frame_id(f);
        let global_from_ego = ego_pose(f);
        let mut cloud = Vec::new();
        let mut detections = Vec::new();
        for (k, p) in planted.iter().enumerate() {
            let pts = box_points(p, options.points_per_box, &mut rng);
            let (box2d, rect) = pixel_rect(&cam, &pts).expect("planted boxes are in view");
            let mask = InstanceMask::from_rect(WIDTH, HEIGHT, k as u32 + 1, rect).unwrap();
            detections.push(InstanceDetection {
                label: p.label.to_string(),
                score: p.score,
                box2d: [box2d[0].max(0.0), box2d[1].max(0.0), box2d[2].min(WIDTH as f64), box2d[3].min(HEIGHT as f64)],
                mask: MaskRef::Rle(Rle::encode(&mask)),
                heading_hint: None,
            });
            cloud.extend(pts);

            let c = global_from_ego.apply(&Point3::from(p.center));
            let mut b = Box3D::new([c.x, c.y, c.z], p.size, p.yaw + global_from_ego.yaw(), p.label, 1.0);
            b.yaw = lift3d::boxes::normalize_yaw(b.yaw);
            gt.push(EvalBox::new(id.clone(), b));
        }
        for _ in 0..options.noise_points {
            cloud.push(Point3::new(rng.gen_range(3.0..60.0), rng.gen_range(-20.0..20.0), rng.gen_range(0.0..4.0)));
        }

        let dir = |sub: &str, ext: &str| format!("{sub}/{id}.{ext}");
        let calib = serde_json::json!({
            "camera_intrinsic": [[FOCAL, 0.0, cam.cx], [0.0, FOCAL, cam.cy], [0.0, 0.0, 1.0]],
            "image_size": [WIDTH, HEIGHT],
            "camera_to_ego": {"rotation": CAMERA_ROTATION, "translation": CAMERA_TRANSLATION},
            "lidar_to_ego": {"rotation": [1.0, 0.0, 0.0, 0.0], "translation": LIDAR_TRANSLATION},
            "ego_to_global": {"rotation": global_from_ego.wxyz(), "translation": global_from_ego.translation().as_slice()},
        });
        write_file(&root.join(dir("calib", "json")), to_json_string(&calib).as_bytes()).unwrap();
        let image = image::RgbImage::from_fn(WIDTH, HEIGHT, |x, y| {
            image::Rgb([(x % 256) as u8, (y % 256) as u8, ((x + y) % 97) as u8 + 100])
        });
        write_rgb_png(&root.join(dir("images", "png")), &image).unwrap();
        let mut entry = serde_json::json!({
            "frame_id": id,
            "camera": "CAM_FRONT",
            "calibration": dir("calib", "json"),
            "image": dir("images", "png"),
            "detections": detections,
        });
        if options.with_lidar {
            let lidar_points: Vec<_> = cloud.iter().map(|p| lidar_from_ego.apply(p)).collect();
            let cloud = PointCloud::new(lidar_points, Frame::Lidar).unwrap();
            write_lidar_bin(&root.join(dir("lidar", "bin")), &cloud).unwrap();
            entry["lidar"] = dir("lidar", "bin").into();
        }
        if options.with_depth {
            let depth = render_depth(&cam, &planted);
            write_file(&root.join(dir("depth", "df32")), &encode_depth_raw(&depth)).unwrap();
            entry["depth"] = dir("depth", "df32").into();
        }
        frames.push(entry);
        frame_ids.push(id);
    }
    let manifest = serde_json::json!({ "frames": frames });
    write_file(&root.join(MANIFEST_NAME), to_json_string(&manifest).as_bytes()).unwrap();
    write_boxes(&root.join("gt.json"), &gt).unwrap();
    Scene { gt, frame_ids }
}

/// Reads every file under `dir` as `(relative path, bytes)`, sorted.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
