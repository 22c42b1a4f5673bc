//! Gaze error broken down by face width, head yaw or distance.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BinScheme {
    /// Ground-truth bbox width in pixels.
    FaceWidth,
    /// Absolute ground-truth head yaw in degrees.
    Yaw,
    /// Ground-truth head distance in cm.
    Distance,
}

impl BinScheme {
    pub const ALL: [BinScheme; 3] = [BinScheme::FaceWidth, BinScheme::Yaw, BinScheme::Distance];

    /// Bin edges; an infinite last edge makes the top bin open.
    pub fn edges(self) -> &'static [f64] {
        match self {
            BinScheme::FaceWidth => &[30.0, 60.0, 90.0, 120.0, 150.0, f64::INFINITY],
            BinScheme::Yaw => &[0.0, 10.0, 20.0, 30.0, 45.0, 60.0, 90.0],
            BinScheme::Distance => &[30.0, 50.0, 70.0, 90.0, f64::INFINITY],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BinScheme::FaceWidth => "face_width",
            BinScheme::Yaw => "yaw",
            BinScheme::Distance => "distance",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            BinScheme::FaceWidth => "px",
            BinScheme::Yaw => "deg",
            BinScheme::Distance => "cm",
        }
    }
}

impl FromStr for BinScheme {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BinScheme::ALL.into_iter().find(|b| b.name() == s).ok_or_else(|| MetricsError::UnknownScheme(s.to_string()))
    }
}

impl fmt::Display for BinScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub label: String,
    pub lo: f64,
    /// `None` for an open top bin.
    pub hi: Option<f64>,
    pub count: usize,
    /// `None` for an empty bin.
    pub mean_gaze_error_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinReport {
    pub scheme: BinScheme,
    pub bins: Vec<Bin>,
    /// Samples below the first edge or at or above the last finite one.
    pub overflow_count: usize,
    pub overflow_mean_gaze_error_deg: Option<f64>,
}

fn fmt_edge(v: f64) -> String {
    format!("{v}")
}

/// Bins `(key, error)` samples on `[lo, hi)` intervals and averages the errors.
pub fn bin_values(samples: &[(f64, f64)], scheme: BinScheme) -> BinReport {
    let edges = scheme.edges();
    let n = edges.len() - 1;
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    let (mut over_sum, mut over_count) = (0.0, 0usize);
    for &(key, err) in samples {
        match (0..n).find(|&i| key >= edges[i] && key < edges[i + 1]) {
            Some(i) => {
                sums[i] += err;
                counts[i] += 1;
            }
            None => {
                over_sum += err;
                over_count += 1;
            }
        }
    }
    let mean = |s: f64, c: usize| (c > 0).then(|| s / c as f64);
    let bins = (0..n)
        .map(|i| {
            let (lo, hi) = (edges[i], edges[i + 1]);
            let label = if hi.is_finite() { format!("{}-{}", fmt_edge(lo), fmt_edge(hi)) } else { format!(">{}", fmt_edge(lo)) };
            Bin { label, lo, hi: hi.is_finite().then_some(hi), count: counts[i], mean_gaze_error_deg: mean(sums[i], counts[i]) }
        })
        .collect();
    BinReport { scheme, bins, overflow_count: over_count, overflow_mean_gaze_error_deg: mean(over_sum, over_count) }
}

/// Bins matched pairs by the ground-truth attribute the scheme names.
pub fn bin_metrics(pairs: &[super::PairErrors], scheme: BinScheme) -> BinReport {
    let samples: Vec<(f64, f64)> = pairs
        .iter()
        .map(|p| {
            let key = match scheme {
                BinScheme::FaceWidth => p.gt_face_width_px,
                BinScheme::Yaw => p.gt_yaw_deg.abs(),
                BinScheme::Distance => p.gt_distance_cm,
            };
            (key, p.gaze_error_deg)
        })
        .collect();
    bin_values(&samples, scheme)
}
