//! nuScenes-protocol detection metrics: center-distance matching, per-class
//! AP, TP errors, mean recall and NDS.

mod curve;
mod matching;

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::Box3D;

pub use curve::{accumulate, average_precision, cummean, interp, recall_grid, tp_error, MetricCurves, TpMetric, RECALL_SAMPLES};
pub use matching::{attribute_error, center_distance, match_greedy, scale_iou, velocity_l2, yaw_diff, DetectionMatch};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("invalid match configuration: {0}")]
    InvalidConfig(String),
}

/// A prediction or ground-truth box of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalBox {
    pub frame_id: String,
    pub bbox: Box3D,
    pub attribute: Option<String>,
    pub num_pts: Option<u32>,
}

impl EvalBox {
    pub fn new(frame_id: impl Into<String>, bbox: Box3D) -> Self {
        Self {
            frame_id: frame_id.into(),
            bbox,
            attribute: None,
            num_pts: None,
        }
    }
}

pub type GtBox = EvalBox;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchConfig {
    pub dist_thresholds: Vec<f64>,
    pub tp_threshold: f64,
    pub min_recall: f64,
    pub min_precision: f64,
    /// Drop GT boxes known to hold fewer LiDAR points. Off by default.
    pub min_gt_points: Option<u32>,
    /// Classes whose orientation error wraps at π instead of 2π (the
    /// devkit uses this for barriers). Empty by default.
    pub half_turn_classes: Vec<String>,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            dist_thresholds: vec![0.5, 1.0, 2.0, 4.0],
            tp_threshold: 2.0,
            min_recall: 0.1,
            min_precision: 0.1,
            min_gt_points: None,
            half_turn_classes: Vec::new(),
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let t = &self.dist_thresholds;
        if t.is_empty() || t.iter().any(|&d| !(d.is_finite() && d > 0.0)) {
            return Err(EvalError::InvalidConfig(format!("thresholds {t:?} must be positive")));
        }
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EvalError::InvalidConfig(format!("thresholds {t:?} must be ascending")));
        }
        if !t.contains(&self.tp_threshold) {
            return Err(EvalError::InvalidConfig(format!(
                "tp_threshold {} is not one of {t:?}",
                self.tp_threshold
            )));
        }
        for (name, v) in [("min_recall", self.min_recall), ("min_precision", self.min_precision)] {
            if !(0.0..1.0).contains(&v) {
                return Err(EvalError::InvalidConfig(format!("{name} {v} must lie in [0, 1)")));
            }
        }
        Ok(())
    }
}

/// Mean TP errors in `(ATE, ASE, AOE, AVE, AAE)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpErrors {
    pub trans_err: f64,
    pub scale_err: f64,
    pub orient_err: f64,
    pub vel_err: f64,
    pub attr_err: f64,
}

impl TpErrors {
    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            trans_err: a[0],
            scale_err: a[1],
            orient_err: a[2],
            vel_err: a[3],
            attr_err: a[4],
        }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.trans_err, self.scale_err, self.orient_err, self.vel_err, self.attr_err]
    }

    fn worst() -> Self {
        Self::from_array([1.0; 5])
    }
}

/// `(5·mAP + Σ (1 − min(1, err))) / 10`.
pub fn nds(mean_ap: f64, errors: &TpErrors) -> f64 {
    let tp_score: f64 = errors.to_array().iter().map(|e| 1.0 - e.min(1.0)).sum();
    (5.0 * mean_ap + tp_score) / 10.0
}

/// Recall reached with every prediction: matched GT fraction.
pub fn max_recall(matches: &[DetectionMatch], num_gt: usize) -> f64 {
    if num_gt == 0 {
        return 0.0;
    }
    matches.iter().filter(|m| m.is_tp).count() as f64 / num_gt as f64
}

/// Average of per-class, per-threshold maximum recalls.
pub fn mean_recall(recalls: &[Vec<f64>]) -> f64 {
    let all: Vec<f64> = recalls.iter().flatten().copied().collect();
    if all.is_empty() {
        0.0
    } else {
        all.iter().sum::<f64>() / all.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub num_gt: usize,
    pub num_pred: usize,
    /// AP at each distance threshold.
    pub ap: Vec<f64>,
    pub mean_ap: f64,
    /// Maximum recall at each distance threshold.
    pub recall: Vec<f64>,
    pub tp_errors: TpErrors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dist_thresholds: Vec<f64>,
    pub tp_threshold: f64,
    pub per_class: BTreeMap<String, ClassMetrics>,
    /// Requested classes without any GT; excluded from the means.
    pub skipped_classes: Vec<String>,
    pub mean_ap: f64,
    /// Meters.
    pub mate: f64,
    pub mase: f64,
    /// Radians.
    pub maoe: f64,
    /// m/s.
    pub mave: f64,
    pub maae: f64,
    pub mar: f64,
    pub nds: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Evaluates predictions against GT for `classes` (defaults to the sorted GT
/// labels).
pub fn evaluate(
    preds: &[EvalBox],
    gts: &[EvalBox],
    classes: Option<&[String]>,
    config: &MatchConfig,
) -> Result<MetricsReport, EvalError> {
    config.validate()?;
    let gts: Vec<EvalBox> = match config.min_gt_points {
        Some(min) => gts.iter().filter(|g| g.num_pts.is_none_or(|n| n >= min)).cloned().collect(),
        None => gts.to_vec(),
    };
    let classes: Vec<String> = match classes {
        Some(c) => c.to_vec(),
        None => {
            let mut labels: Vec<String> = gts.iter().map(|g| g.bbox.label.clone()).collect();
            labels.sort();
            labels.dedup();
            labels
        }
    };

    let mut per_class = BTreeMap::new();
    let mut skipped_classes = Vec::new();
    for class in &classes {
        let num_gt = gts.iter().filter(|g| &g.bbox.label == class).count();
        if num_gt == 0 {
            skipped_classes.push(class.clone());
            continue;
        }
        let num_pred = preds.iter().filter(|p| &p.bbox.label == class).count();
        let mut ap = Vec::new();
        let mut recall = Vec::new();
        let mut tp_errors = TpErrors::worst();
        let period = if config.half_turn_classes.contains(class) { PI } else { TAU };
        for &threshold in &config.dist_thresholds {
            let matches = match_greedy(preds, &gts, class, threshold);
            let curves = accumulate(&matches, preds, &gts, num_gt, period);
            ap.push(average_precision(&curves, config.min_recall, config.min_precision));
            recall.push(max_recall(&matches, num_gt));
            if threshold == config.tp_threshold {
                tp_errors = TpErrors::from_array(TpMetric::ALL.map(|m| tp_error(&curves, m, config.min_recall)));
            }
        }
        let mean_ap = mean(ap.iter().copied()).unwrap_or(0.0);
        per_class.insert(
            class.clone(),
            ClassMetrics {
                num_gt,
                num_pred,
                ap,
                mean_ap,
                recall,
                tp_errors,
            },
        );
    }

    let mean_ap = mean(per_class.values().map(|c| c.mean_ap)).unwrap_or(0.0);
    let tp = TpErrors::from_array(std::array::from_fn(|k| {
        mean(per_class.values().map(|c| c.tp_errors.to_array()[k])).unwrap_or(1.0)
    }));
    let recalls: Vec<Vec<f64>> = per_class.values().map(|c| c.recall.clone()).collect();
    Ok(MetricsReport {
        dist_thresholds: config.dist_thresholds.clone(),
        tp_threshold: config.tp_threshold,
        skipped_classes,
        mean_ap,
        mate: tp.trans_err,
        mase: tp.scale_err,
        maoe: tp.orient_err,
        mave: tp.vel_err,
        maae: tp.attr_err,
        mar: mean_recall(&recalls),
        nds: nds(mean_ap, &tp),
        per_class,
    })
}

impl MetricsReport {
    /// Fixed-width table: one row per class plus the aggregate row, columns
    /// mAP, mATE, mASE, mAOE, mAVE, mAAE, mAR, NDS.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:>8} {:>7} {:>7} {:>7} {:>7} {:>7} {:>8} {:>8}",
            "class", "mAP", "mATE", "mASE", "mAOE", "mAVE", "mAAE", "mAR", "NDS"
        );
        let mut row = |name: &str, ap: f64, e: [f64; 5], recall: f64, nds: Option<f64>| {
            let nds = nds.map_or_else(|| "-".to_string(), |v| format!("{:.2}%", 100.0 * v));
            let _ = writeln!(
                out,
                "{:<24} {:>7.2}% {:>7.3} {:>7.3} {:>7.3} {:>7.3} {:>7.3} {:>7.2}% {:>8}",
                name,
                100.0 * ap,
                e[0],
                e[1],
                e[2],
                e[3],
                e[4],
                100.0 * recall,
                nds
            );
        };
        for (name, c) in &self.per_class {
            let recall = mean(c.recall.iter().copied()).unwrap_or(0.0);
            row(name, c.mean_ap, c.tp_errors.to_array(), recall, None);
        }
        row(
            "all",
            self.mean_ap,
            [self.mate, self.mase, self.maoe, self.mave, self.maae],
            self.mar,
            Some(self.nds),
        );
        out
    }
}
