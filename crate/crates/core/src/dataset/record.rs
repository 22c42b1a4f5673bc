//! Manifest schema: one [`SampleRecord`] per JSONL line.
//!
//! Fields this crate does not know about are kept in `extra` maps and
//! written back out unchanged.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::pose::{HeadPose, LocalGaze};
use super::DatasetError;
use crate::camera::{CameraModel, PixelCoord};

/// Axis-aligned box `(x, y, w, h)` in pixels, `(x, y)` the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Tight box around `points` (empty input gives `None`).
    pub fn hull<'a>(points: impl IntoIterator<Item = &'a PixelCoord>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let (mut x0, mut y0, mut x1, mut y1) = (first.u, first.v, first.u, first.v);
        for p in it {
            x0 = x0.min(p.u);
            y0 = y0.min(p.v);
            x1 = x1.max(p.u);
            y1 = y1.max(p.v);
        }
        Some(Self::new(x0, y0, x1 - x0, y1 - y0))
    }

    /// Grows each side by `ratio` times the box's own width/height.
    pub fn expanded(&self, ratio: f64) -> Self {
        Self::new(self.x - ratio * self.w, self.y - ratio * self.h, self.w * (1.0 + 2.0 * ratio), self.h * (1.0 + 2.0 * ratio))
    }

    pub fn center(&self) -> PixelCoord {
        PixelCoord::new(self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    pub fn contains(&self, p: &PixelCoord) -> bool {
        p.u >= self.x && p.u <= self.x + self.w && p.v >= self.y && p.v <= self.y + self.h
    }

    /// Point of the box nearest to `p`.
    pub fn clamp_point(&self, p: &PixelCoord) -> PixelCoord {
        PixelCoord::new(p.u.clamp(self.x, self.x + self.w), p.v.clamp(self.y, self.y + self.h))
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let ix = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let iy = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        if ix <= 0.0 || iy <= 0.0 {
            return 0.0;
        }
        let inter = ix * iy;
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

impl From<[f64; 4]> for BBox {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        Self { x, y, w, h }
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

/// Eye centers and pupils, generic over 2D pixels or 3D points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyeLandmarks<P> {
    pub left_center: P,
    pub right_center: P,
    pub left_pupil: P,
    pub right_pupil: P,
}

impl<P> EyeLandmarks<P> {
    pub fn as_array(&self) -> [&P; 4] {
        [&self.left_center, &self.right_center, &self.left_pupil, &self.right_pupil]
    }

    pub fn map<Q>(&self, mut f: impl FnMut(&P) -> Q) -> EyeLandmarks<Q> {
        EyeLandmarks {
            left_center: f(&self.left_center),
            right_center: f(&self.right_center),
            left_pupil: f(&self.left_pupil),
            right_pupil: f(&self.right_pupil),
        }
    }

    pub const NAMES: [&'static str; 4] = ["left_center", "right_center", "left_pupil", "right_pupil"];
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HeadAngles {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

/// Per-person ground truth (or prediction, when `confidence` is set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonAnnotation {
    pub id: u32,
    /// Unit gaze vector in the camera frame.
    pub gaze: [f64; 3],
    pub head_pose: HeadAngles,
    #[serde(default)]
    pub translation_cm: [f64; 3],
    pub distance_cm: f64,
    pub bbox: BBox,
    #[serde(default)]
    pub face_landmarks: Vec<PixelCoord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eye_landmarks: Option<EyeLandmarks<PixelCoord>>,
    #[serde(default)]
    pub eyelid_closure: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaze_local: Option<LocalGaze>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_landmarks_3d: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eye_landmarks_3d: Option<EyeLandmarks<[f64; 3]>>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl PersonAnnotation {
    pub fn head_pose(&self) -> HeadPose {
        HeadPose {
            yaw_deg: self.head_pose.yaw,
            pitch_deg: self.head_pose.pitch,
            roll_deg: self.head_pose.roll,
            translation_cm: self.translation_cm,
        }
    }
}

/// One manifest line: an image, its camera and everyone in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub image: String,
    pub camera: CameraModel,
    pub persons: Vec<PersonAnnotation>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl SampleRecord {
    pub fn from_json_line(line: &str) -> Result<Self, DatasetError> {
        serde_json::from_str(line).map_err(|e| DatasetError::Parse { line: None, message: e.to_string() })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Reads a JSONL manifest, skipping blank lines. Line numbers in errors are 1-based.
pub fn read_manifest(reader: impl BufRead) -> Result<Vec<SampleRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| DatasetError::Parse { line: Some(i + 1), message: e.to_string() })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_manifest<'a>(
    mut writer: impl Write,
    records: impl IntoIterator<Item = &'a SampleRecord>,
) -> Result<(), DatasetError> {
    for record in records {
        writeln!(writer, "{}", record.to_json_line())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"image":"a.png","camera":{"model":"equidistant","width":1024,"height":1024,"f":325.94932345220167,"cx":512,"cy":512,"fov_deg":180},"persons":[{"id":3,"gaze":[0,0,1],"head_pose":{"yaw":1,"pitch":2,"roll":3},"translation_cm":[0,0,60],"distance_cm":60,"bbox":[500,500,24,24],"face_landmarks":[[510,510]],"eye_landmarks":{"left_center":[505,505],"right_center":[515,505],"left_pupil":[505,506],"right_pupil":[515,506]},"eyelid_closure":0.2,"subject":"mh_07"}],"scene":{"light":"warm"}}"#;

    #[test]
    fn parses_documented_schema() {
        let rec = SampleRecord::from_json_line(LINE).unwrap();
        assert_eq!(rec.persons[0].id, 3);
        assert_eq!(rec.persons[0].bbox, BBox::new(500.0, 500.0, 24.0, 24.0));
        assert_eq!(rec.persons[0].head_pose().pitch_deg, 2.0);
        assert_eq!(rec.persons[0].eye_landmarks.unwrap().right_pupil, PixelCoord::new(515.0, 506.0));
    }

    #[test]
    fn unknown_fields_survive_round_trip() {
        let rec = SampleRecord::from_json_line(LINE).unwrap();
        let back = SampleRecord::from_json_line(&rec.to_json_line()).unwrap();
        assert_eq!(back, rec);
        let v: Value = serde_json::from_str(&rec.to_json_line()).unwrap();
        assert_eq!(v["scene"]["light"], "warm");
        assert_eq!(v["persons"][0]["subject"], "mh_07");
    }

    #[test]
    fn manifest_errors_carry_line_numbers() {
        let text = format!("{LINE}\n\n{{\"image\": 3}}\n");
        match read_manifest(text.as_bytes()) {
            Err(DatasetError::Parse { line, .. }) => assert_eq!(line, Some(3)),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn iou_basics() {
        let a = BBox::new(0.0, 0.0, 10.0, 10.0);
        assert_eq!(a.iou(&a), 1.0);
        assert_eq!(a.iou(&BBox::new(20.0, 0.0, 5.0, 5.0)), 0.0);
        let b = BBox::new(5.0, 0.0, 10.0, 10.0);
        assert!((a.iou(&b) - 50.0 / 150.0).abs() < 1e-15);
    }

    #[test]
    fn hull_and_margin() {
        let pts = [PixelCoord::new(10.0, 20.0), PixelCoord::new(30.0, 60.0), PixelCoord::new(15.0, 40.0)];
        let hull = BBox::hull(&pts).unwrap();
        assert_eq!(hull, BBox::new(10.0, 20.0, 20.0, 40.0));
        assert_eq!(hull.expanded(0.1), BBox::new(8.0, 16.0, 24.0, 48.0));
        assert!(BBox::hull(&[]).is_none());
    }
}
