//! Multi-task detection loss.

use serde::Serialize;

use super::{KernelError, Tensor};

pub const DEFAULT_SMOOTH_L1_BETA: f64 = 1.0;

/// Mean smooth-L1 over all elements: `0.5 d^2 / beta` below `beta`, `|d| - 0.5 beta` above.
/// Empty input gives 0.
pub fn smooth_l1(pred: &[f64], target: &[f64], beta: f64) -> Result<f64, KernelError> {
    if pred.len() != target.len() {
        return Err(KernelError::ShapeMismatch {
            op: "smooth_l1",
            detail: format!("{} predictions vs {} targets", pred.len(), target.len()),
        });
    }
    if !(beta > 0.0) {
        return Err(KernelError::InvalidParameter { op: "smooth_l1", detail: format!("beta must be positive, got {beta}") });
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let d = (p - t).abs();
            if d < beta {
                0.5 * d * d / beta
            } else {
                d - 0.5 * beta
            }
        })
        .sum();
    Ok(sum / pred.len() as f64)
}

fn bce_with_logit(x: f64, y: f64) -> f64 {
    x.max(0.0) - x * y + (-x.abs()).exp().ln_1p()
}

/// `0.5 * mean(BCE | positives) + 0.5 * mean(BCE | negatives)` on logits.
/// With only one class present that class's mean is returned; no labels gives 0.
pub fn balanced_bce(logits: &[f64], labels: &[f64]) -> Result<f64, KernelError> {
    if logits.len() != labels.len() {
        return Err(KernelError::ShapeMismatch {
            op: "balanced_bce",
            detail: format!("{} logits vs {} labels", logits.len(), labels.len()),
        });
    }
    let (mut pos, mut n_pos, mut neg, mut n_neg) = (0.0, 0usize, 0.0, 0usize);
    for (i, (&x, &y)) in logits.iter().zip(labels).enumerate() {
        if y == 1.0 {
            pos += bce_with_logit(x, 1.0);
            n_pos += 1;
        } else if y == 0.0 {
            neg += bce_with_logit(x, 0.0);
            n_neg += 1;
        } else {
            return Err(KernelError::InvalidLabel { index: i, value: y });
        }
    }
    Ok(match (n_pos, n_neg) {
        (0, 0) => 0.0,
        (0, _) => neg / n_neg as f64,
        (_, 0) => pos / n_pos as f64,
        _ => 0.5 * (pos / n_pos as f64) + 0.5 * (neg / n_neg as f64),
    })
}

/// The seven loss terms, in weight order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LossTerm {
    Confidence,
    BBox,
    Distance,
    HeadPose,
    Gaze,
    FaceLandmarks,
    EyeLandmarks,
}

impl LossTerm {
    pub const ALL: [LossTerm; 7] = [
        LossTerm::Confidence,
        LossTerm::BBox,
        LossTerm::Distance,
        LossTerm::HeadPose,
        LossTerm::Gaze,
        LossTerm::FaceLandmarks,
        LossTerm::EyeLandmarks,
    ];
}

/// Per-anchor head outputs. `y_c` holds confidence logits of shape `[A]`;
/// every regression head is `[A, D]` for its own width `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTaskOutput {
    pub y_c: Tensor,
    pub y_b: Tensor,
    pub y_d: Tensor,
    pub y_h: Tensor,
    pub y_g: Tensor,
    pub y_fl: Tensor,
    pub y_el: Tensor,
}

impl MultiTaskOutput {
    pub fn anchors(&self) -> usize {
        self.y_c.shape().first().copied().unwrap_or(0)
    }

    fn regression(&self) -> [&Tensor; 6] {
        [&self.y_b, &self.y_d, &self.y_h, &self.y_g, &self.y_fl, &self.y_el]
    }

    fn check(&self, what: &'static str) -> Result<usize, KernelError> {
        let &[a] = self.y_c.expect_rank(what, 1)? else { unreachable!() };
        for t in self.regression() {
            let &[rows, _] = t.expect_rank(what, 2)? else { unreachable!() };
            if rows != a {
                return Err(KernelError::ShapeMismatch {
                    op: what,
                    detail: format!("{a} anchors but a head has shape {:?}", t.shape()),
                });
            }
        }
        Ok(a)
    }
}

/// Same layout as [`MultiTaskOutput`]; `y_c` holds 0/1 labels.
pub type MultiTaskTargets = MultiTaskOutput;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossBreakdown {
    /// Unweighted terms in [`LossTerm::ALL`] order.
    pub terms: [f64; 7],
    pub weighted: [f64; 7],
    pub total: f64,
    /// Set when no anchor is positive; the six regression terms are then 0.
    pub no_positives: bool,
}

impl LossBreakdown {
    pub fn term(&self, t: LossTerm) -> f64 {
        self.terms[t as usize]
    }
}

fn positive_rows(t: &Tensor, positives: &[usize]) -> Vec<f64> {
    let d = t.shape()[1];
    positives.iter().flat_map(|&i| t.data()[i * d..(i + 1) * d].iter().copied()).collect()
}

/// `sum_i lambda_i L_i`: balanced BCE on confidences plus smooth-L1 on the
/// positive anchors of each regression head.
pub fn total_loss(
    outputs: &MultiTaskOutput,
    targets: &MultiTaskTargets,
    lambdas: [f64; 7],
    beta: f64,
) -> Result<LossBreakdown, KernelError> {
    if let Some((index, &value)) = lambdas.iter().enumerate().find(|(_, l)| !(**l >= 0.0)) {
        return Err(KernelError::NegativeLambda { index, value });
    }
    let a = outputs.check("total_loss")?;
    if targets.check("total_loss")? != a {
        return Err(KernelError::ShapeMismatch { op: "total_loss", detail: "anchor counts differ".into() });
    }
    for (o, t) in outputs.regression().iter().zip(targets.regression()) {
        if o.shape() != t.shape() {
            return Err(KernelError::ShapeMismatch {
                op: "total_loss",
                detail: format!("output {:?} vs target {:?}", o.shape(), t.shape()),
            });
        }
    }
    let labels = targets.y_c.data();
    let mut terms = [0.0; 7];
    terms[0] = balanced_bce(outputs.y_c.data(), labels)?;
    let positives: Vec<usize> = (0..a).filter(|&i| labels[i] == 1.0).collect();
    if !positives.is_empty() {
        for (k, (o, t)) in outputs.regression().iter().zip(targets.regression()).enumerate() {
            terms[k + 1] = smooth_l1(&positive_rows(o, &positives), &positive_rows(t, &positives), beta)?;
        }
    }
    let weighted: [f64; 7] = std::array::from_fn(|i| lambdas[i] * terms[i]);
    let total = weighted.iter().sum();
    Ok(LossBreakdown { terms, weighted, total, no_positives: positives.is_empty() })
}
