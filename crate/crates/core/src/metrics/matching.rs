//! Greedy IoU matching of detections to ground truth.

use serde::Serialize;

use crate::dataset::BBox;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub gt_id: u32,
    pub pred_index: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_gt: Vec<u32>,
    /// Retained predictions left without a partner.
    pub unmatched_pred: Vec<usize>,
    /// Predictions dropped by the confidence threshold.
    pub discarded: Vec<usize>,
}

impl MatchResult {
    pub fn retained(&self) -> usize {
        self.pairs.len() + self.unmatched_pred.len()
    }

    pub fn gt_count(&self) -> usize {
        self.pairs.len() + self.unmatched_gt.len()
    }

    /// Matched over retained predictions; 1 with the flag set when nothing was retained.
    pub fn precision(&self) -> (f64, bool) {
        match self.retained() {
            0 => (1.0, true),
            n => (self.pairs.len() as f64 / n as f64, false),
        }
    }

    /// Matched over ground truth; 1 with the flag set when there is none.
    pub fn recall(&self) -> (f64, bool) {
        match self.gt_count() {
            0 => (1.0, true),
            n => (self.pairs.len() as f64 / n as f64, false),
        }
    }
}

/// Drops predictions below `conf_threshold`, then visits the rest by
/// descending confidence (ties by lower index). Each takes the unmatched
/// ground-truth box of highest IoU, if that IoU is at least `iou_threshold`;
/// IoU ties go to the earlier ground-truth entry.
pub fn match_detections(
    gt: &[(u32, BBox)],
    preds: &[(BBox, f64)],
    iou_threshold: f64,
    conf_threshold: f64,
) -> MatchResult {
    let mut result = MatchResult::default();
    let mut order: Vec<usize> = Vec::with_capacity(preds.len());
    for (i, (_, conf)) in preds.iter().enumerate() {
        if *conf >= conf_threshold {
            order.push(i);
        } else {
            result.discarded.push(i);
        }
    }
    order.sort_by(|&a, &b| preds[b].1.total_cmp(&preds[a].1).then(a.cmp(&b)));
    let mut taken = vec![false; gt.len()];
    for p in order {
        let mut best: Option<(usize, f64)> = None;
        for (g, (_, gbox)) in gt.iter().enumerate() {
            if taken[g] {
                continue;
            }
            let iou = preds[p].0.iou(gbox);
            if iou >= iou_threshold && best.is_none_or(|(_, b)| iou > b) {
                best = Some((g, iou));
            }
        }
        match best {
            Some((g, iou)) => {
                taken[g] = true;
                result.pairs.push(MatchedPair { gt_id: gt[g].0, pred_index: p, iou });
            }
            None => result.unmatched_pred.push(p),
        }
    }
    result.unmatched_gt = gt.iter().zip(&taken).filter(|(_, t)| !**t).map(|((id, _), _)| *id).collect();
    result.unmatched_pred.sort_unstable();
    result
}
