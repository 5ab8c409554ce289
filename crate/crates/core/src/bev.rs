//! Bird's-eye-view SVG plots: ground truth in green, predictions in blue.
//!
//! The canvas spans `[-range_m, range_m]` in x and y around the ego vehicle,
//! which sits at the center. A point `(x, y)` maps to pixel
//! `((x + range_m) / meters_per_px, (range_m - y) / meters_per_px)`, so +x
//! points right and +y points up. Output depends only on the inputs.

use std::fmt::Write as _;

use nalgebra::Point3;

use crate::boxes::Box3D;
use crate::eval::EvalBox;
use crate::geom::Se3Pose;

pub const GT_COLOR: &str = "#2ca02c";
pub const PRED_COLOR: &str = "#1f77b4";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BevOptions {
    pub meters_per_px: f64,
    pub range_m: f64,
    /// Moves global-frame boxes into the ego frame before drawing.
    pub ego_from_global: Option<Se3Pose>,
}

impl Default for BevOptions {
    fn default() -> Self {
        Self {
            meters_per_px: 0.1,
            range_m: 50.0,
            ego_from_global: None,
        }
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

struct Viewport {
    mpp: f64,
    range: f64,
}

impl Viewport {
    fn px(&self, x: f64, y: f64) -> (String, String) {
        (num((x + self.range) / self.mpp), num((self.range - y) / self.mpp))
    }
}

fn to_view(b: &Box3D, pose: Option<&Se3Pose>) -> Box3D {
    let Some(pose) = pose else {
        return b.clone();
    };
    let c = pose.apply(&Point3::from(b.center));
    Box3D {
        center: [c.x, c.y, c.z],
        yaw: crate::boxes::normalize_yaw(b.yaw + pose.yaw()),
        ..b.clone()
    }
}

fn draw_box(out: &mut String, view: &Viewport, b: &Box3D, color: &str, kind: &str) {
    let points: Vec<String> = b
        .ground_corners()
        .iter()
        .map(|[x, y]| {
            let (px, py) = view.px(*x, *y);
            format!("{px},{py}")
        })
        .collect();
    let _ = writeln!(
        out,
        r#"  <polygon class="{kind}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
        points.join(" ")
    );
    let (s, c) = b.yaw.sin_cos();
    let half = b.size[0] / 2.0;
    let (x1, y1) = view.px(b.center[0], b.center[1]);
    let (x2, y2) = view.px(b.center[0] + c * half, b.center[1] + s * half);
    let _ = writeln!(
        out,
        r#"  <line class="{kind}-heading" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{color}" stroke-width="1.5"/>"#
    );
}

/// Renders the boxes of `frame_id` from both sets.
pub fn emit_bev(preds: &[EvalBox], gts: &[EvalBox], frame_id: &str, options: &BevOptions) -> String {
    let view = Viewport {
        mpp: options.meters_per_px,
        range: options.range_m,
    };
    let size = num(2.0 * options.range_m / options.meters_per_px);
    let (cx, cy) = view.px(0.0, 0.0);
    let (left, _) = view.px(-options.range_m, 0.0);
    let (right, _) = view.px(options.range_m, 0.0);
    let (_, top) = view.px(0.0, options.range_m);
    let (_, bottom) = view.px(0.0, -options.range_m);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(out, r#"  <title>{}</title>"#, escape(frame_id));
    let _ = writeln!(out, r#"  <rect x="0" y="0" width="{size}" height="{size}" fill="white"/>"#);
    let _ = writeln!(out, r##"  <line class="axis" x1="{left}" y1="{cy}" x2="{right}" y2="{cy}" stroke="#999999" stroke-width="1"/>"##);
    let _ = writeln!(out, r##"  <line class="axis" x1="{cx}" y1="{top}" x2="{cx}" y2="{bottom}" stroke="#999999" stroke-width="1"/>"##);
    let _ = writeln!(out, r#"  <circle class="ego" cx="{cx}" cy="{cy}" r="3" fill="black"/>"#);
    let pose = options.ego_from_global.as_ref();
    for g in gts.iter().filter(|b| b.frame_id == frame_id) {
        draw_box(&mut out, &view, &to_view(&g.bbox, pose), GT_COLOR, "gt");
    }
    for p in preds.iter().filter(|b| b.frame_id == frame_id) {
        draw_box(&mut out, &view, &to_view(&p.bbox, pose), PRED_COLOR, "pred");
    }
    out.push_str("</svg>\n");
    out
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
