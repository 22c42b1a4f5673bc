//! Manifest-level evaluation.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::{angular_error, angular_error_unit, bin_metrics, match_detections, BinReport, BinScheme, MatchResult, MetricsError};
use crate::dataset::{head_forward, BBox, HeadPose, PersonAnnotation, SampleRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub iou_threshold: f64,
    pub conf_threshold: f64,
    pub bins: Vec<BinScheme>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { iou_threshold: 0.5, conf_threshold: 0.5, bins: Vec::new() }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), MetricsError> {
        for (name, value) in [("iou threshold", self.iou_threshold), ("confidence threshold", self.conf_threshold)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(MetricsError::InvalidThreshold { name, value });
            }
        }
        Ok(())
    }
}

/// One detected face, read from a prediction manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub bbox: BBox,
    pub confidence: f64,
    /// Unit gaze in the camera frame, as given.
    pub gaze_cam: [f64; 3],
    pub distance_cm: f64,
    pub head_pose: HeadPose,
}

impl Prediction {
    /// A missing confidence counts as 1.
    pub fn from_annotation(p: &PersonAnnotation, image: &str) -> Result<Self, MetricsError> {
        let confidence = p.confidence.unwrap_or(1.0);
        if !(0.0..=1.0).contains(&confidence) {
            return Err(MetricsError::InvalidConfidence { image: image.to_string(), value: confidence });
        }
        Ok(Self {
            bbox: p.bbox,
            confidence,
            gaze_cam: unit(p.gaze)?,
            distance_cm: p.distance_cm,
            head_pose: p.head_pose(),
        })
    }
}

fn unit(v: [f64; 3]) -> Result<[f64; 3], MetricsError> {
    angular_error(v, v)?;
    Ok(v)
}

/// Errors of one matched pair plus the ground-truth attributes used for binning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairErrors {
    pub image: String,
    pub gt_id: u32,
    pub pred_index: usize,
    pub iou: f64,
    pub gaze_error_deg: f64,
    pub head_pose_error_deg: f64,
    pub distance_error_cm: f64,
    pub gt_face_width_px: f64,
    pub gt_yaw_deg: f64,
    pub gt_distance_cm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub images: usize,
    pub gt_faces: usize,
    pub retained_predictions: usize,
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
    /// Precision was reported as 1 because no prediction passed the confidence threshold.
    pub no_predictions: bool,
    /// Recall was reported as 1 because there is no ground truth.
    pub no_ground_truth: bool,
    /// Means over matched pairs; `None` when nothing matched.
    pub gaze_error_deg: Option<f64>,
    pub head_pose_error_deg: Option<f64>,
    /// Mean absolute error.
    pub distance_error_cm: Option<f64>,
    /// Filled in when methods are compared; see [`adjusted_gaze_error`].
    pub adjusted_gaze_error_deg: Option<f64>,
    pub bins: Vec<BinReport>,
    pub pairs: Vec<PairErrors>,
}

fn index_images(records: &[SampleRecord]) -> Result<BTreeMap<&str, &SampleRecord>, MetricsError> {
    let mut map = BTreeMap::new();
    for r in records {
        if map.insert(r.image.as_str(), r).is_some() {
            return Err(MetricsError::DuplicateImage(r.image.clone()));
        }
    }
    Ok(map)
}

fn evaluate_image(
    gt: &SampleRecord,
    pred: &SampleRecord,
    config: &EvalConfig,
) -> Result<(MatchResult, Vec<PairErrors>), MetricsError> {
    let preds = pred.persons.iter().map(|p| Prediction::from_annotation(p, &pred.image)).collect::<Result<Vec<_>, _>>()?;
    let boxes: Vec<(u32, BBox)> = gt.persons.iter().map(|p| (p.id, p.bbox)).collect();
    let scored: Vec<(BBox, f64)> = preds.iter().map(|p| (p.bbox, p.confidence)).collect();
    let m = match_detections(&boxes, &scored, config.iou_threshold, config.conf_threshold);
    let pairs = m
        .pairs
        .iter()
        .map(|pair| {
            let g = gt.persons.iter().find(|p| p.id == pair.gt_id).expect("matched id exists");
            let p = &preds[pair.pred_index];
            let gaze = angular_error(g.gaze, p.gaze_cam)?;
            let head = angular_error_unit(&head_forward(&g.head_pose()), &head_forward(&p.head_pose));
            Ok(PairErrors {
                image: gt.image.clone(),
                gt_id: g.id,
                pred_index: pair.pred_index,
                iou: pair.iou,
                gaze_error_deg: gaze,
                head_pose_error_deg: head,
                distance_error_cm: (g.distance_cm - p.distance_cm).abs(),
                gt_face_width_px: g.bbox.w,
                gt_yaw_deg: g.head_pose.yaw,
                gt_distance_cm: g.distance_cm,
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    Ok((m, pairs))
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Matches every image and averages errors over matched pairs.
///
/// Images are processed in parallel and reduced in name order, so the result
/// does not depend on the thread count.
pub fn evaluate(gt: &[SampleRecord], pred: &[SampleRecord], config: &EvalConfig) -> Result<EvalReport, MetricsError> {
    config.validate()?;
    let gt_map = index_images(gt)?;
    let pred_map = index_images(pred)?;
    let only_gt: Vec<String> = gt_map.keys().filter(|k| !pred_map.contains_key(*k)).map(|k| k.to_string()).collect();
    let only_pred: Vec<String> = pred_map.keys().filter(|k| !gt_map.contains_key(*k)).map(|k| k.to_string()).collect();
    if !only_gt.is_empty() || !only_pred.is_empty() {
        return Err(MetricsError::ManifestMismatch { only_gt, only_pred });
    }
    let per_image: Vec<(MatchResult, Vec<PairErrors>)> = gt_map
        .par_iter()
        .map(|(name, g)| evaluate_image(g, pred_map[name], config))
        .collect::<Result<_, _>>()?;

    let (mut gt_faces, mut retained, mut matched) = (0, 0, 0);
    let mut pairs = Vec::new();
    for (m, p) in per_image {
        gt_faces += m.gt_count();
        retained += m.retained();
        matched += m.pairs.len();
        pairs.extend(p);
    }
    let ratio = |num: usize, den: usize| if den == 0 { (1.0, true) } else { (num as f64 / den as f64, false) };
    let (precision, no_predictions) = ratio(matched, retained);
    let (recall, no_ground_truth) = ratio(matched, gt_faces);
    let bins = config.bins.iter().map(|&s| bin_metrics(&pairs, s)).collect();
    Ok(EvalReport {
        images: gt_map.len(),
        gt_faces,
        retained_predictions: retained,
        matched,
        precision,
        recall,
        no_predictions,
        no_ground_truth,
        gaze_error_deg: mean(pairs.iter().map(|p| p.gaze_error_deg)),
        head_pose_error_deg: mean(pairs.iter().map(|p| p.head_pose_error_deg)),
        distance_error_cm: mean(pairs.iter().map(|p| p.distance_error_cm)),
        adjusted_gaze_error_deg: None,
        bins,
        pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjustedGaze {
    pub mean_gaze_error_deg: f64,
    pub faces: usize,
}

/// Mean gaze error of each method over the ground-truth faces that every
/// method matched, keyed by image and person id.
pub fn adjusted_gaze_error(methods: &[&[PairErrors]]) -> Result<Vec<AdjustedGaze>, MetricsError> {
    let key = |p: &PairErrors| (p.image.clone(), p.gt_id);
    let mut common: Option<HashSet<(String, u32)>> = None;
    for m in methods {
        let keys: HashSet<_> = m.iter().map(key).collect();
        common = Some(match common {
            None => keys,
            Some(c) => c.intersection(&keys).cloned().collect(),
        });
    }
    let common = common.unwrap_or_default();
    if common.is_empty() {
        return Err(MetricsError::EmptyIntersection);
    }
    Ok(methods
        .iter()
        .map(|m| {
            let errs = m.iter().filter(|p| common.contains(&key(p))).map(|p| p.gaze_error_deg);
            AdjustedGaze { mean_gaze_error_deg: mean(errs).expect("intersection is nonempty"), faces: common.len() }
        })
        .collect())
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

/// Plain-text table: the headline row, then one block per bin scheme.
pub fn format_table(report: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>7} {:>7} {:>10} {:>14} {:>9}", "Prc.", "Rec.", "Dist (cm)", "Head pose (°)", "Gaze (°)");
    let _ = writeln!(
        s,
        "{:>7.3} {:>7.3} {:>10} {:>14} {:>9}",
        report.precision,
        report.recall,
        cell(report.distance_error_cm),
        cell(report.head_pose_error_deg),
        cell(report.gaze_error_deg)
    );
    if let Some(a) = report.adjusted_gaze_error_deg {
        let _ = writeln!(s, "Adjusted gaze error (°): {a:.3}");
    }
    for b in &report.bins {
        let _ = writeln!(s, "\n{:>12} {:>7} {:>9}", format!("{} ({})", b.scheme, b.scheme.unit()), "Count", "Gaze (°)");
        for bin in &b.bins {
            let _ = writeln!(s, "{:>12} {:>7} {:>9}", bin.label, bin.count, cell(bin.mean_gaze_error_deg));
        }
        if b.overflow_count > 0 {
            let _ = writeln!(s, "{:>12} {:>7} {:>9}", "other", b.overflow_count, cell(b.overflow_mean_gaze_error_deg));
        }
    }
    s
}
