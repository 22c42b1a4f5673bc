//! Compliance checks for manifest records.

use serde::Serialize;

use super::record::SampleRecord;
use super::scene::{SceneConfig, MAX_PERSONS, MIN_PERSONS};
use super::DatasetError;
use crate::camera::FisheyeProjection;

const GAZE_NORM_TOLERANCE: f64 = 1e-6;
const DISTANCE_TOLERANCE_CM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    PersonCount,
    HeadYaw,
    HeadPitch,
    HeadRoll,
    GazeYaw,
    GazePitch,
    NonUnitGaze,
    EyelidClosure,
    Distance,
    DegenerateBbox,
    BboxOutsideImageCircle,
    MissingEyeLandmarks,
    LandmarkOutsideBbox,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub person_id: Option<u32>,
    pub message: String,
}

impl Violation {
    fn new(kind: ViolationKind, person_id: Option<u32>, message: String) -> Self {
        Self { kind, person_id, message }
    }
}

fn check_range(
    out: &mut Vec<Violation>,
    kind: ViolationKind,
    id: u32,
    name: &str,
    value: f64,
    (lo, hi): (f64, f64),
) {
    if !(lo..=hi).contains(&value) {
        out.push(Violation::new(kind, Some(id), format!("{name} {value} outside [{lo}, {hi}]")));
    }
}

/// Checks `record` against the sampling ranges in `ranges` and the
/// structural invariants of the schema. An empty result means compliant.
pub fn validate_record_with(record: &SampleRecord, ranges: &SceneConfig) -> Vec<Violation> {
    use ViolationKind::*;
    let mut out = Vec::new();
    let n = record.persons.len();
    if !(MIN_PERSONS..=MAX_PERSONS).contains(&n) {
        out.push(Violation::new(PersonCount, None, format!("{n} persons, expected {MIN_PERSONS}-{MAX_PERSONS}")));
    }
    let camera = &record.camera;
    for p in &record.persons {
        let id = p.id;
        let finite = p.gaze.iter().chain(&p.translation_cm).chain([&p.distance_cm, &p.eyelid_closure]).all(|v| v.is_finite())
            && [p.head_pose.yaw, p.head_pose.pitch, p.head_pose.roll].iter().all(|v| v.is_finite())
            && [p.bbox.x, p.bbox.y, p.bbox.w, p.bbox.h].iter().all(|v| v.is_finite())
            && p.face_landmarks.iter().all(|l| l.is_finite());
        if !finite {
            out.push(Violation::new(NonFinite, Some(id), "non-finite value".into()));
            continue;
        }
        check_range(&mut out, HeadYaw, id, "head yaw", p.head_pose.yaw, ranges.head_yaw);
        check_range(&mut out, HeadPitch, id, "head pitch", p.head_pose.pitch, ranges.head_pitch);
        check_range(&mut out, HeadRoll, id, "head roll", p.head_pose.roll, ranges.head_roll);
        if let Some(g) = &p.gaze_local {
            check_range(&mut out, GazeYaw, id, "gaze yaw", g.yaw_deg, ranges.gaze_yaw);
            check_range(&mut out, GazePitch, id, "gaze pitch", g.pitch_deg, ranges.gaze_pitch);
        }
        let norm = p.gaze.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > GAZE_NORM_TOLERANCE {
            out.push(Violation::new(NonUnitGaze, Some(id), format!("gaze norm {norm}")));
        }
        check_range(&mut out, EyelidClosure, id, "eyelid closure", p.eyelid_closure, (0.0, 1.0));

        let t_norm = p.translation_cm.iter().map(|v| v * v).sum::<f64>().sqrt();
        if p.distance_cm <= 0.0 {
            out.push(Violation::new(Distance, Some(id), format!("distance {} cm is not positive", p.distance_cm)));
        } else if t_norm > 0.0 && (t_norm - p.distance_cm).abs() > DISTANCE_TOLERANCE_CM * p.distance_cm.max(1.0) {
            out.push(Violation::new(
                Distance,
                Some(id),
                format!("distance {} cm disagrees with |translation| {t_norm} cm", p.distance_cm),
            ));
        }

        let bbox = &p.bbox;
        if !(bbox.w > 0.0 && bbox.h > 0.0) {
            out.push(Violation::new(DegenerateBbox, Some(id), format!("bbox size {}x{}", bbox.w, bbox.h)));
        } else if camera.unproject(bbox.clamp_point(&camera.principal_point())).is_none() {
            // clamping is per axis, so this is the nearest box point for elliptical circles too
            out.push(Violation::new(BboxOutsideImageCircle, Some(id), "bbox does not reach the image circle".into()));
        }

        match &p.eye_landmarks {
            None => out.push(Violation::new(MissingEyeLandmarks, Some(id), "eye landmarks missing".into())),
            Some(eyes) => {
                for (name, pt) in super::record::EyeLandmarks::<()>::NAMES.iter().zip(eyes.as_array()) {
                    if !pt.is_finite() {
                        out.push(Violation::new(NonFinite, Some(id), format!("eye landmark {name} non-finite")));
                    } else if bbox.w > 0.0 && !bbox.contains(pt) {
                        out.push(Violation::new(LandmarkOutsideBbox, Some(id), format!("eye landmark {name} at {pt} outside bbox")));
                    }
                }
            }
        }
        if bbox.w > 0.0 {
            if let Some((i, pt)) = p.face_landmarks.iter().enumerate().find(|(_, pt)| !bbox.contains(pt)) {
                out.push(Violation::new(LandmarkOutsideBbox, Some(id), format!("face landmark {i} at {pt} outside bbox")));
            }
        }
    }
    out
}

/// [`validate_record_with`] against the default sampling ranges.
pub fn validate_record(record: &SampleRecord) -> Vec<Violation> {
    validate_record_with(record, &SceneConfig::default())
}

/// Parses one manifest line and validates it.
pub fn validate_line(line: &str) -> Result<Vec<Violation>, DatasetError> {
    Ok(validate_record(&SampleRecord::from_json_line(line)?))
}
