//! Re-deriving 2D labels under a different camera without re-rendering.

use nalgebra::Vector3;
use serde::Serialize;

use super::record::{BBox, SampleRecord};
use super::rig::project_point;
use crate::camera::{CameraModel, FisheyeProjection, PixelCoord, UnitVector3};

/// Samples per bbox side when a person has no face landmarks to rebuild from.
const BBOX_EDGE_SAMPLES: usize = 8;

/// A landmark that could not be mapped into the destination camera.
/// Its previous pixel value is left in place.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlaggedLandmark {
    pub person_id: u32,
    pub landmark: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemapOutcome {
    pub record: SampleRecord,
    pub flagged: Vec<FlaggedLandmark>,
}

/// Recomputes every 2D label of `record` for `dst`.
///
/// Landmarks with stored 3D positions are projected directly; otherwise the
/// 2D label is unprojected through the record's own camera. Bboxes are
/// rebuilt from the remapped face landmarks grown by `margin`, and gaze,
/// pose and distance are copied unchanged.
pub fn remap_annotations(record: &SampleRecord, dst: &CameraModel, margin: f64) -> RemapOutcome {
    let src = &record.camera;
    let mut flagged = Vec::new();
    let mut out = record.clone();
    out.camera = dst.clone();

    for person in &mut out.persons {
        let id = person.id;
        let mut map = |name: String, px: &mut PixelCoord, p3: Option<&[f64; 3]>| {
            let dir = match p3 {
                Some(p) => UnitVector3::normalize(Vector3::from(*p)).ok(),
                None => src.unproject(*px),
            };
            match dir.and_then(|d| dst.project(&d)) {
                Some(mapped) => *px = mapped,
                None => flagged.push(FlaggedLandmark { person_id: id, landmark: name }),
            }
        };

        let face3d = person.face_landmarks_3d.clone();
        for (i, px) in person.face_landmarks.iter_mut().enumerate() {
            let p3 = face3d.as_ref().and_then(|v| v.get(i));
            map(format!("face_landmarks[{i}]"), px, p3);
        }
        if let Some(eyes) = person.eye_landmarks.as_mut() {
            let eyes3d = person.eye_landmarks_3d;
            let targets = [
                (&mut eyes.left_center, eyes3d.map(|e| e.left_center)),
                (&mut eyes.right_center, eyes3d.map(|e| e.right_center)),
                (&mut eyes.left_pupil, eyes3d.map(|e| e.left_pupil)),
                (&mut eyes.right_pupil, eyes3d.map(|e| e.right_pupil)),
            ];
            for ((px, p3), name) in targets.into_iter().zip(super::record::EyeLandmarks::<()>::NAMES) {
                map(format!("eye_landmarks.{name}"), px, p3.as_ref());
            }
        }

        person.bbox = match BBox::hull(&person.face_landmarks) {
            Some(hull) => hull.expanded(margin),
            None => remap_bbox(&person.bbox, src, dst),
        };
    }
    RemapOutcome { record: out, flagged }
}

/// Hull of the bbox outline pushed through `src -> dst`.
fn remap_bbox(bbox: &BBox, src: &CameraModel, dst: &CameraModel) -> BBox {
    let mut pts = Vec::with_capacity(4 * BBOX_EDGE_SAMPLES);
    for i in 0..BBOX_EDGE_SAMPLES {
        let t = i as f64 / BBOX_EDGE_SAMPLES as f64;
        let (x0, y0, x1, y1) = (bbox.x, bbox.y, bbox.x + bbox.w, bbox.y + bbox.h);
        for p in [
            PixelCoord::new(x0 + t * bbox.w, y0),
            PixelCoord::new(x1, y0 + t * bbox.h),
            PixelCoord::new(x1 - t * bbox.w, y1),
            PixelCoord::new(x0, y1 - t * bbox.h),
        ] {
            if let Some(dir) = src.unproject(p) {
                pts.push(project_point(dst, dir.as_vector()).0);
            }
        }
    }
    BBox::hull(&pts).unwrap_or(*bbox)
}
