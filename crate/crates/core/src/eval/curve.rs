//! Precision/recall curves sampled on a 101-point recall grid, AP, and
//! recall-averaged TP errors, following the nuScenes detection devkit.

use super::matching::{attribute_error, center_distance, scale_iou, velocity_l2, yaw_diff, DetectionMatch};
use super::EvalBox;

pub const RECALL_SAMPLES: usize = 101;

/// Which TP error a curve carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpMetric {
    Translation,
    Scale,
    Orientation,
    Velocity,
    Attribute,
}

impl TpMetric {
    pub const ALL: [TpMetric; 5] = [
        TpMetric::Translation,
        TpMetric::Scale,
        TpMetric::Orientation,
        TpMetric::Velocity,
        TpMetric::Attribute,
    ];
}

/// Curves of one class at one distance threshold, each `RECALL_SAMPLES` long.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCurves {
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    pub confidence: Vec<f64>,
    pub errors: [Vec<f64>; 5],
}

impl MetricCurves {
    /// Curves of a class without any true positive.
    pub fn no_predictions() -> Self {
        Self {
            recall: recall_grid(),
            precision: vec![0.0; RECALL_SAMPLES],
            confidence: vec![0.0; RECALL_SAMPLES],
            errors: std::array::from_fn(|_| vec![1.0; RECALL_SAMPLES]),
        }
    }

    pub fn error(&self, metric: TpMetric) -> &[f64] {
        &self.errors[metric as usize]
    }

    /// Last grid index with non-zero confidence, or 0.
    pub fn max_recall_index(&self) -> usize {
        self.confidence.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }
}

/// `0, 0.01, …, 1`, computed as `i · 0.01` with an exact final endpoint.
pub fn recall_grid() -> Vec<f64> {
    let step = 1.0 / (RECALL_SAMPLES - 1) as f64;
    let mut grid: Vec<f64> = (0..RECALL_SAMPLES).map(|i| i as f64 * step).collect();
    grid[RECALL_SAMPLES - 1] = 1.0;
    grid
}

/// Piecewise-linear interpolation over non-decreasing `xp`. Queries equal to
/// a repeated abscissa take the last of the repeats; queries outside the
/// range return `left`/`right`.
pub fn interp(x: f64, xp: &[f64], fp: &[f64], left: f64, right: f64) -> f64 {
    let n = xp.len();
    debug_assert!(n > 0 && n == fp.len());
    if x < xp[0] {
        return left;
    }
    if x > xp[n - 1] {
        return right;
    }
    if x == xp[n - 1] {
        return fp[n - 1];
    }
    // largest j with xp[j] <= x
    let j = xp.partition_point(|&v| v <= x) - 1;
    if xp[j] == x {
        return fp[j];
    }
    let slope = (fp[j + 1] - fp[j]) / (xp[j + 1] - xp[j]);
    slope * (x - xp[j]) + fp[j]
}

/// Running mean ignoring missing values; all-missing input yields ones.
pub fn cummean(values: &[Option<f64>]) -> Vec<f64> {
    if values.iter().all(Option::is_none) {
        return vec![1.0; values.len()];
    }
    let (mut sum, mut count) = (0.0, 0usize);
    values
        .iter()
        .map(|v| {
            if let Some(v) = v {
                sum += v;
                count += 1;
            }
            if count == 0 {
                0.0
            } else {
                sum / count as f64
            }
        })
        .collect()
}

/// Builds the sampled curves from score-ordered matches. Orientation errors
/// wrap with `orientation_period` (2π, or π for symmetric classes).
pub fn accumulate(
    matches: &[DetectionMatch],
    preds: &[EvalBox],
    gts: &[EvalBox],
    num_gt: usize,
    orientation_period: f64,
) -> MetricCurves {
    if num_gt == 0 || !matches.iter().any(|m| m.is_tp) {
        return MetricCurves::no_predictions();
    }
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut precision = Vec::with_capacity(matches.len());
    let mut recall = Vec::with_capacity(matches.len());
    let mut confidence = Vec::with_capacity(matches.len());
    let mut tp_conf = Vec::new();
    let mut tp_errs: [Vec<Option<f64>>; 5] = Default::default();
    for m in matches {
        let pred = &preds[m.pred_index];
        if let (true, Some(gi)) = (m.is_tp, m.gt_index) {
            tp += 1.0;
            let gt = &gts[gi];
            tp_conf.push(pred.bbox.score);
            tp_errs[TpMetric::Translation as usize].push(Some(center_distance(&gt.bbox, &pred.bbox)));
            tp_errs[TpMetric::Scale as usize].push(Some(1.0 - scale_iou(&gt.bbox, &pred.bbox)));
            tp_errs[TpMetric::Orientation as usize].push(Some(yaw_diff(gt.bbox.yaw, pred.bbox.yaw, orientation_period)));
            tp_errs[TpMetric::Velocity as usize].push(Some(velocity_l2(&gt.bbox, &pred.bbox)));
            tp_errs[TpMetric::Attribute as usize].push(attribute_error(gt, pred));
        } else {
            fp += 1.0;
        }
        precision.push(tp / (fp + tp));
        recall.push(tp / num_gt as f64);
        confidence.push(pred.bbox.score);
    }

    let grid = recall_grid();
    let sample = |values: &[f64]| -> Vec<f64> {
        grid.iter()
            .map(|&r| interp(r, &recall, values, values[0], 0.0))
            .collect()
    };
    let precision = sample(&precision);
    let confidence = sample(&confidence);

    // Errors are indexed by confidence: ascending TP confidences as abscissae.
    let conf_asc: Vec<f64> = tp_conf.iter().rev().copied().collect();
    let errors = tp_errs.map(|errs| {
        let mean_asc: Vec<f64> = cummean(&errs).into_iter().rev().collect();
        let (first, last) = (mean_asc[0], mean_asc[mean_asc.len() - 1]);
        confidence
            .iter()
            .map(|&c| interp(c, &conf_asc, &mean_asc, first, last))
            .collect()
    });

    MetricCurves {
        recall: grid,
        precision,
        confidence,
        errors,
    }
}

fn first_recall_index(min_recall: f64) -> usize {
    (100.0 * min_recall).round() as usize + 1
}

/// Mean of `max(p − min_precision, 0)` over grid recalls above `min_recall`,
/// normalized by `1 − min_precision`.
pub fn average_precision(curves: &MetricCurves, min_recall: f64, min_precision: f64) -> f64 {
    let tail = &curves.precision[first_recall_index(min_recall).min(RECALL_SAMPLES)..];
    if tail.is_empty() {
        return 0.0;
    }
    let total: f64 = tail.iter().map(|p| (p - min_precision).max(0.0)).sum();
    (total / tail.len() as f64) / (1.0 - min_precision)
}

/// Mean of a TP error over the achieved recall range above `min_recall`; 1
/// when that range is empty.
pub fn tp_error(curves: &MetricCurves, metric: TpMetric, min_recall: f64) -> f64 {
    let first = first_recall_index(min_recall);
    let last = curves.max_recall_index();
    if last < first {
        return 1.0;
    }
    let values = &curves.error(metric)[first..=last];
    values.iter().sum::<f64>() / values.len() as f64
}
