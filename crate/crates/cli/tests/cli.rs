//! Runs the `lift3d` binary over a tiny single-frame dataset.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lift3d::geom::{Frame, PointCloud};
use lift3d::io::{encode_depth_raw, encode_id_map, encode_lidar_bin, write_file, write_rgb_png, IdMap};
use lift3d::lift::DepthMap;
use nalgebra::Point3;

const W: u32 = 64;
const H: u32 = 48;
const MASK: [u32; 4] = [26, 19, 39, 34];

fn lift3d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lift3d")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// One car-sized block of LiDAR points 10 m ahead of a forward camera 1.5 m
/// above the ground; LiDAR, ego and global frames coincide.
fn write_dataset(root: &Path) -> PathBuf {
    let calib = r#"{
        "camera_intrinsic": [[40, 0, 32], [0, 40, 24], [0, 0, 1]],
        "image_size": [64, 48],
        "camera_to_ego": {"rotation": [0.5, -0.5, 0.5, -0.5], "translation": [0, 0, 1.5]},
        "lidar_to_ego": {"rotation": [1, 0, 0, 0], "translation": [0, 0, 0]},
        "ego_to_global": {"rotation": [1, 0, 0, 0], "translation": [0, 0, 0]}
    }"#;
    write_file(&root.join("calib/f0.json"), calib.as_bytes()).unwrap();
    let image = image::RgbImage::from_fn(W, H, |x, y| image::Rgb([(4 * x) as u8, (5 * y) as u8, 90]));
    write_rgb_png(&root.join("images/f0.png"), &image).unwrap();

    let mut points = Vec::new();
    for i in 0..=16 {
        for j in 0..=8 {
            for k in 0..=8 {
                points.push(Point3::new(8.0 + 0.25 * f64::from(i), -1.0 + 0.25 * f64::from(j), 0.25 * f64::from(k)));
            }
        }
    }
    let cloud = PointCloud::new(points, Frame::Lidar).unwrap();
    write_file(&root.join("lidar/f0.bin"), &encode_lidar_bin(&cloud)).unwrap();

    let inside = |x: u32, y: u32| (MASK[0]..MASK[2]).contains(&x) && (MASK[1]..MASK[3]).contains(&y);
    let depth: Vec<f32> = (0..W * H).map(|i| if inside(i % W, i / W) { 10.0 } else { 0.0 }).collect();
    write_file(&root.join("depth/f0.df32"), &encode_depth_raw(&DepthMap::new(W, H, depth).unwrap())).unwrap();
    let ids = (0..W * H).map(|i| u16::from(inside(i % W, i / W))).collect();
    write_file(&root.join("masks/f0.png"), &encode_id_map(&IdMap { width: W, height: H, ids })).unwrap();

    let manifest = r#"{"frames": [{
        "frame_id": "f0",
        "camera": "CAM_FRONT",
        "calibration": "calib/f0.json",
        "image": "images/f0.png",
        "depth": "depth/f0.df32",
        "lidar": "lidar/f0.bin",
        "masks": "masks/f0.png",
        "detections": [{"label": "car", "score": 0.8, "box2d": [26, 19, 39, 34], "mask": {"png_id": 1}}]
    }]}"#;
    write_file(&root.join("frames.json"), manifest.as_bytes()).unwrap();
    let gt = r#"[{"frame_id": "f0", "label": "car", "center": [10, 0, 1], "size": [4, 2, 2], "yaw": 0}]"#;
    let gt_path = root.join("gt.json");
    write_file(&gt_path, gt.as_bytes()).unwrap();
    gt_path
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(code(&lift3d(&["--help"])), 0);
    assert_eq!(code(&lift3d(&["--version"])), 0);
    assert_eq!(code(&lift3d(&[])), 1);
    assert_eq!(code(&lift3d(&["teleport"])), 1);
    let out = lift3d(&["inflate", "--out", "x.json"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--root"), "{}", stderr(&out));
    assert_eq!(code(&lift3d(&["fog", "--beta", "thick", "--in", "a", "--out", "b"])), 1);
}

#[test]
fn unreadable_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere");
    let out = lift3d(&["inflate", "--root", s(&missing), "--out", s(&dir.path().join("p.json"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("nowhere"), "{}", stderr(&out));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"[{"frame_id": "f0", "label": "car", "center": [0, 0], "size": [1, 1, 1], "yaw": 0}]"#).unwrap();
    let out = lift3d(&["eval", "--pred", s(&bad), "--gt", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("record 0"), "{}", stderr(&out));

    let root = dir.path().join("data");
    write_dataset(&root);
    let out = lift3d(&["fog", "--beta=-1", "--in", s(&root), "--out", s(&dir.path().join("fog"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn inflate_eval_and_bev() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    let gt = write_dataset(&root);
    let pred = dir.path().join("out/pred.json");
    let drops = dir.path().join("out/drops.json");
    let out = lift3d(&["inflate", "--root", s(&root), "--out", s(&pred), "--drops", s(&drops)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let boxes: serde_json::Value = serde_json::from_slice(&fs::read(&pred).unwrap()).unwrap();
    let b = &boxes[0];
    assert_eq!(boxes.as_array().unwrap().len(), 1);
    assert_eq!(b["label"], "car");
    assert_eq!(b["score"], 0.8);
    let center: Vec<f64> = b["center"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((center[0] - 10.0).abs() < 0.5 && center[1].abs() < 0.5, "{center:?}");
    assert_eq!(fs::read_to_string(&drops).unwrap().trim(), "[]");

    let report = dir.path().join("out/report.json");
    let out = lift3d(&["eval", "--pred", s(&pred), "--gt", s(&gt), "--out", s(&report)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.starts_with("class"), "{table}");
    assert!(table.lines().any(|l| l.starts_with("car")));
    assert!(table.lines().any(|l| l.starts_with("all")));
    assert_eq!(fs::read_to_string(report.with_extension("txt")).unwrap(), table);
    let metrics: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert!(metrics["mean_ap"].as_f64().unwrap() > 0.9, "{table}");

    let svg_path = dir.path().join("out/f0.svg");
    let out = lift3d(&["bev", "--frame", "f0", "--pred", s(&pred), "--gt", s(&gt), "--root", s(&root), "--out", s(&svg_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polygon").count(), 2, "{svg}");

    let out = lift3d(&["bev", "--frame", "f9", "--root", s(&root), "--out", s(&svg_path)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn repeated_runs_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    let gt = write_dataset(&root);
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let pred = dir.path().join(run).join("pred.json");
        let report = dir.path().join(run).join("report.json");
        assert_eq!(code(&lift3d(&["inflate", "--root", s(&root), "--out", s(&pred)])), 0);
        assert_eq!(code(&lift3d(&["eval", "--pred", s(&pred), "--gt", s(&gt), "--out", s(&report)])), 0);
        outputs.push((fs::read(&pred).unwrap(), fs::read(&report).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn fog_and_pseudo_depth_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    write_dataset(&root);

    let fogged = dir.path().join("fog");
    let out = lift3d(&["fog", "--beta", "0.05", "--in", s(&root), "--out", s(&fogged)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let before = image::open(root.join("images/f0.png")).unwrap().to_rgb8();
    let after = image::open(fogged.join("images/f0.png")).unwrap().to_rgb8();
    // Masked pixels sit 10 m away; everything else has no depth and turns white.
    assert_eq!(after.get_pixel(0, 0).0, [255; 3]);
    let (p, q) = (before.get_pixel(30, 25).0, after.get_pixel(30, 25).0);
    let t = (-0.5f64).exp();
    for c in 0..3 {
        assert_eq!(q[c], (f64::from(p[c]) * t + 255.0 * (1.0 - t)).round() as u8);
    }

    let pseudo = dir.path().join("pseudo");
    let out = lift3d(&["pseudo-depth", "--stride", "1", "--in", s(&root), "--out", s(&pseudo)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let bin = fs::read(pseudo.join("pseudo_lidar/f0.bin")).unwrap();
    let masked = ((MASK[2] - MASK[0]) * (MASK[3] - MASK[1])) as usize;
    assert_eq!(bin.len(), 20 * masked);
    let pred = dir.path().join("pseudo_pred.json");
    let out = lift3d(&["inflate", "--root", s(&pseudo), "--out", s(&pred)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let boxes: serde_json::Value = serde_json::from_slice(&fs::read(&pred).unwrap()).unwrap();
    assert_eq!(boxes.as_array().unwrap().len(), 1);
}
