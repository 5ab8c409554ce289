use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use super::EvalBox;
use crate::boxes::Box3D;

/// One prediction's outcome at a given distance threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionMatch {
    pub pred_index: usize,
    pub gt_index: Option<usize>,
    /// Distance to the nearest unmatched same-class GT in the frame
    /// (infinite when none is left).
    pub distance: f64,
    pub is_tp: bool,
}

/// Ground-plane distance between box centers.
pub fn center_distance(a: &Box3D, b: &Box3D) -> f64 {
    (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1])
}

pub fn velocity_l2(a: &Box3D, b: &Box3D) -> f64 {
    (a.velocity[0] - b.velocity[0]).hypot(a.velocity[1] - b.velocity[1])
}

/// Volume IoU of two boxes after aligning their centers and headings.
pub fn scale_iou(a: &Box3D, b: &Box3D) -> f64 {
    let inter: f64 = a.size.iter().zip(&b.size).map(|(x, y)| x.min(*y)).product();
    let va: f64 = a.size.iter().product();
    let vb: f64 = b.size.iter().product();
    inter / (va + vb - inter)
}

/// Absolute heading difference with the given period, in `[0, π]`.
pub fn yaw_diff(gt_yaw: f64, pred_yaw: f64, period: f64) -> f64 {
    let mut diff = (gt_yaw - pred_yaw + period / 2.0).rem_euclid(period) - period / 2.0;
    if diff > PI {
        diff -= TAU;
    }
    diff.abs()
}

/// `1 − [attributes equal]`; `None` when the GT carries no attribute.
pub fn attribute_error(gt: &EvalBox, pred: &EvalBox) -> Option<f64> {
    let gt_attr = gt.attribute.as_deref()?;
    Some(if pred.attribute.as_deref() == Some(gt_attr) { 0.0 } else { 1.0 })
}

/// Indices of `boxes` with the given label, stably sorted by descending score.
pub(crate) fn ranked_predictions(preds: &[EvalBox], class: &str) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).filter(|&i| preds[i].bbox.label == class).collect();
    order.sort_by(|&a, &b| preds[b].bbox.score.total_cmp(&preds[a].bbox.score));
    order
}

/// Greedy center-distance matching of one class.
///
/// Predictions are visited by descending score (ties keep input order); each
/// takes the nearest unmatched GT of its frame and class when that GT lies
/// within `threshold`. Equidistant GTs resolve to the lower index.
pub fn match_greedy(preds: &[EvalBox], gts: &[EvalBox], class: &str, threshold: f64) -> Vec<DetectionMatch> {
    let mut by_frame: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, g) in gts.iter().enumerate().filter(|(_, g)| g.bbox.label == class) {
        by_frame.entry(g.frame_id.as_str()).or_default().push(i);
    }
    let mut taken = vec![false; gts.len()];
    ranked_predictions(preds, class)
        .into_iter()
        .map(|pi| {
            let pred = &preds[pi];
            let mut nearest: Option<(f64, usize)> = None;
            for &gi in by_frame.get(pred.frame_id.as_str()).into_iter().flatten() {
                if taken[gi] {
                    continue;
                }
                let d = center_distance(&gts[gi].bbox, &pred.bbox);
                if nearest.is_none_or(|(best, _)| d < best) {
                    nearest = Some((d, gi));
                }
            }
            match nearest {
                Some((d, gi)) if d <= threshold => {
                    taken[gi] = true;
                    DetectionMatch {
                        pred_index: pi,
                        gt_index: Some(gi),
                        distance: d,
                        is_tp: true,
                    }
                }
                other => DetectionMatch {
                    pred_index: pi,
                    gt_index: None,
                    distance: other.map_or(f64::INFINITY, |(d, _)| d),
                    is_tp: false,
                },
            }
        })
        .collect()
}
