//! Detection matching and the gaze, head-pose and distance error protocol.

mod bins;
mod evaluate;
mod matching;

pub use bins::{bin_metrics, bin_values, Bin, BinReport, BinScheme};
pub use evaluate::{
    adjusted_gaze_error, evaluate, format_table, AdjustedGaze, EvalConfig, EvalReport, PairErrors, Prediction,
};
pub use matching::{match_detections, MatchResult, MatchedPair};

use crate::camera::UnitVector3;

/// Allowed deviation of an input gaze norm from 1.
pub const UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("vector norm {norm} is not unit")]
    NonUnitInput { norm: f64 },
    #[error("image sets differ: {} only in ground truth, {} only in predictions", only_gt.len(), only_pred.len())]
    ManifestMismatch { only_gt: Vec<String>, only_pred: Vec<String> },
    #[error("image {0:?} appears more than once")]
    DuplicateImage(String),
    #[error("no ground-truth face is matched by every method")]
    EmptyIntersection,
    #[error("unknown bin scheme {0:?}, expected face_width, yaw or distance")]
    UnknownScheme(String),
    #[error("{name} must lie in (0, 1), got {value}")]
    InvalidThreshold { name: &'static str, value: f64 },
    #[error("confidence {value} outside [0, 1] in {image}")]
    InvalidConfidence { image: String, value: f64 },
}

fn angle_deg(a: [f64; 3], b: [f64; 3]) -> f64 {
    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    sin.atan2(cos).to_degrees()
}

/// Angle between two unit vectors in degrees.
///
/// Equal to `acos(clamp(a . b, -1, 1))`, evaluated as `atan2(|a x b|, a . b)`
/// so that nearly parallel vectors keep full precision and identical ones give
/// exactly 0.
pub fn angular_error(a: [f64; 3], b: [f64; 3]) -> Result<f64, MetricsError> {
    for v in [a, b] {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !((norm - 1.0).abs() <= UNIT_TOLERANCE) {
            return Err(MetricsError::NonUnitInput { norm });
        }
    }
    Ok(angle_deg(a, b))
}

pub fn angular_error_unit(a: &UnitVector3, b: &UnitVector3) -> f64 {
    angle_deg(a.to_array(), b.to_array())
}
