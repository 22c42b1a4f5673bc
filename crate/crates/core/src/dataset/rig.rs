//! 3D face geometry and its projection into fisheye annotations.

use nalgebra::{Matrix3, Vector3};
use serde_json::Map;

use super::pose::{head_rotation_matrix, local_gaze_direction, HeadPose, LocalGaze, HEAD_FORWARD};
use super::record::{BBox, EyeLandmarks, HeadAngles, PersonAnnotation};
use super::DatasetError;
use crate::camera::{FisheyeProjection, PixelCoord, UnitVector3};

/// Default bbox margin, as a fraction of the landmark hull size per side.
pub const DEFAULT_BBOX_MARGIN: f64 = 0.1;

/// Canonical face landmarks in the head frame (cm; `+x` left, `+y` chin, `+z` back).
#[derive(Debug, Clone, PartialEq)]
pub struct FaceRig {
    pub face_landmarks: Vec<Vector3<f64>>,
    pub left_eyeball: Vector3<f64>,
    pub right_eyeball: Vector3<f64>,
    pub eyeball_radius_cm: f64,
}

impl Default for FaceRig {
    fn default() -> Self {
        let v = Vector3::new;
        let mut face_landmarks = vec![
            v(0.0, -7.0, -9.0), // forehead
            v(7.0, -3.5, -5.5), // temples
            v(-7.0, -3.5, -5.5),
        ];
        // eye contours: outer corner, top lid, inner corner, bottom lid
        for side in [1.0, -1.0] {
            face_landmarks.extend([
                v(4.6 * side, -3.0, -8.0),
                v(3.2 * side, -3.7, -8.7),
                v(1.8 * side, -3.0, -8.6),
                v(3.2 * side, -2.3, -8.6),
            ]);
        }
        face_landmarks.extend([
            v(0.0, 1.0, -11.0), // nose tip
            v(2.5, 4.5, -8.8),  // mouth corners
            v(-2.5, 4.5, -8.8),
            v(0.0, 8.5, -8.0), // chin
            v(6.5, 2.5, -6.0), // cheeks
            v(-6.5, 2.5, -6.0),
        ]);
        Self {
            face_landmarks,
            left_eyeball: v(3.2, -3.0, -7.2),
            right_eyeball: v(-3.2, -3.0, -7.2),
            eyeball_radius_cm: 1.2,
        }
    }
}

/// Camera-frame 3D description of one person, before projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonGeometry {
    pub id: u32,
    pub head_pose: HeadPose,
    pub gaze_cam: UnitVector3,
    pub gaze_local: Option<LocalGaze>,
    pub face_landmarks: Vec<Vector3<f64>>,
    pub eye_landmarks: EyeLandmarks<Vector3<f64>>,
    pub eyelid_closure: f64,
}

impl FaceRig {
    /// Places the rig at `pose.translation_cm`, oriented by
    /// `head_to_camera * R_head(pose)`, with eyes rotated to `gaze`.
    ///
    /// Eye centers sit on the eyeball surface along head-forward; pupils sit
    /// on the surface along the gaze.
    pub fn place(
        &self,
        id: u32,
        pose: &HeadPose,
        gaze: &LocalGaze,
        head_to_camera: &Matrix3<f64>,
        eyelid_closure: f64,
    ) -> PersonGeometry {
        let rot = head_to_camera * head_rotation_matrix(pose);
        let t = Vector3::from(pose.translation_cm);
        let to_cam = |p: &Vector3<f64>| t + rot * p;
        let gaze_head = local_gaze_direction(gaze);
        let r = self.eyeball_radius_cm;
        let eyes = EyeLandmarks {
            left_center: to_cam(&(self.left_eyeball + HEAD_FORWARD * r)),
            right_center: to_cam(&(self.right_eyeball + HEAD_FORWARD * r)),
            left_pupil: to_cam(&(self.left_eyeball + gaze_head * r)),
            right_pupil: to_cam(&(self.right_eyeball + gaze_head * r)),
        };
        PersonGeometry {
            id,
            head_pose: *pose,
            gaze_cam: UnitVector3::normalize(rot * gaze_head).expect("unit gaze"),
            gaze_local: Some(*gaze),
            face_landmarks: self.face_landmarks.iter().map(to_cam).collect(),
            eye_landmarks: eyes,
            eyelid_closure,
        }
    }
}

/// Annotation plus the indices of face landmarks that fell outside the FOV
/// and were pinned to the image-circle rim.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPerson {
    pub annotation: PersonAnnotation,
    pub clamped_landmarks: Vec<usize>,
}

/// Projects a 3D point; out-of-FOV points are pinned to the rim at their azimuth.
pub(crate) fn project_point<C: FisheyeProjection + ?Sized>(camera: &C, p: &Vector3<f64>) -> (PixelCoord, bool) {
    let dir = UnitVector3::normalize(*p).unwrap_or(UnitVector3::OPTICAL_AXIS);
    match camera.project(&dir) {
        Some(px) => (px, false),
        None => {
            let rim = UnitVector3::from_spherical(camera.fov() / 2.0, dir.y().atan2(dir.x()));
            (camera.project(&rim).expect("rim direction is inside the FOV"), true)
        }
    }
}

/// Derives 2D labels for `person` under `camera`.
///
/// The bbox is the hull of the projected facial landmarks grown by `margin`
/// per side; distance is the norm of the head translation.
pub fn project_annotation<C: FisheyeProjection + ?Sized>(
    person: &PersonGeometry,
    camera: &C,
    margin: f64,
) -> Result<ProjectedPerson, DatasetError> {
    let mut clamped = Vec::new();
    let face: Vec<PixelCoord> = person
        .face_landmarks
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (px, out) = project_point(camera, p);
            if out {
                clamped.push(i);
            }
            px
        })
        .collect();
    if face.is_empty() || clamped.len() == face.len() {
        return Err(DatasetError::FaceOutOfFov { person_id: person.id });
    }
    let eyes = person.eye_landmarks.map(|p| project_point(camera, p).0);
    let bbox = BBox::hull(&face).expect("nonempty").expanded(margin);
    let pose = &person.head_pose;
    let annotation = PersonAnnotation {
        id: person.id,
        gaze: person.gaze_cam.to_array(),
        head_pose: HeadAngles { yaw: pose.yaw_deg, pitch: pose.pitch_deg, roll: pose.roll_deg },
        translation_cm: pose.translation_cm,
        distance_cm: pose.distance_cm(),
        bbox,
        face_landmarks: face,
        eye_landmarks: Some(eyes),
        eyelid_closure: person.eyelid_closure,
        confidence: None,
        gaze_local: person.gaze_local,
        face_landmarks_3d: Some(person.face_landmarks.iter().map(|p| [p.x, p.y, p.z]).collect()),
        eye_landmarks_3d: Some(person.eye_landmarks.map(|p| [p.x, p.y, p.z])),
        extra: Map::new(),
    };
    Ok(ProjectedPerson { annotation, clamped_landmarks: clamped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::EquidistantCamera;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn cam() -> EquidistantCamera {
        EquidistantCamera::derive(1024, 1024, PI).unwrap()
    }

    fn person_with(points: Vec<Vector3<f64>>, translation: [f64; 3]) -> PersonGeometry {
        let c = Vector3::from(translation);
        PersonGeometry {
            id: 1,
            head_pose: HeadPose { translation_cm: translation, ..Default::default() },
            gaze_cam: UnitVector3::OPTICAL_AXIS,
            gaze_local: None,
            face_landmarks: points,
            eye_landmarks: EyeLandmarks { left_center: c, right_center: c, left_pupil: c, right_pupil: c },
            eyelid_closure: 0.0,
        }
    }

    #[test]
    fn symmetric_rig_on_axis_centers_bbox() {
        let pts = [(-5.0, -5.0), (5.0, -5.0), (5.0, 5.0), (-5.0, 5.0), (0.0, 3.0), (0.0, -3.0)]
            .iter()
            .map(|&(x, y)| Vector3::new(x, y, 60.0))
            .collect();
        let out = project_annotation(&person_with(pts, [0.0, 0.0, 60.0]), &cam(), DEFAULT_BBOX_MARGIN).unwrap();
        let c = out.annotation.bbox.center();
        assert!((c.u - 512.0).abs() < 1e-9 && (c.v - 512.0).abs() < 1e-9);
        assert_eq!(out.annotation.distance_cm, 60.0);
    }

    #[test]
    fn forty_five_degree_landmark() {
        let p = Vector3::new(FRAC_PI_4.sin(), 0.0, FRAC_PI_4.cos()) * 50.0;
        let out = project_annotation(&person_with(vec![p], [0.0, 0.0, 60.0]), &cam(), 0.0).unwrap();
        let px = out.annotation.face_landmarks[0];
        assert!((px.u - 768.0).abs() < 1e-9 && (px.v - 512.0).abs() < 1e-9);
    }

    #[test]
    fn fully_hidden_face_is_rejected() {
        let pts = vec![Vector3::new(1.0, 0.0, -5.0), Vector3::new(0.0, 1.0, -5.0)];
        let err = project_annotation(&person_with(pts, [0.0, 0.0, -5.0]), &cam(), 0.1).unwrap_err();
        assert!(matches!(err, DatasetError::FaceOutOfFov { person_id: 1 }));
    }

    #[test]
    fn partially_hidden_face_is_pinned_and_reported() {
        let pts = vec![Vector3::new(10.0, 0.0, 5.0), Vector3::new(10.0, 0.0, -1.0)];
        let out = project_annotation(&person_with(pts, [10.0, 0.0, 2.0]), &cam(), 0.1).unwrap();
        assert_eq!(out.clamped_landmarks, vec![1]);
        assert!((out.annotation.face_landmarks[1].u - 1024.0).abs() < 1e-9);
    }

    #[test]
    fn bbox_contains_all_landmarks() {
        let rig = FaceRig::default();
        let pose = HeadPose { yaw_deg: 40.0, pitch_deg: -20.0, roll_deg: 3.0, translation_cm: [50.0, 10.0, 30.0] };
        let geo = rig.place(4, &pose, &LocalGaze { yaw_deg: 20.0, pitch_deg: -10.0 }, &super::super::pose::facing_axis_rotation(11.3), 0.5);
        let out = project_annotation(&geo, &cam(), DEFAULT_BBOX_MARGIN).unwrap().annotation;
        assert!(out.face_landmarks.iter().all(|p| out.bbox.contains(p)));
        assert!(out.eye_landmarks.unwrap().as_array().iter().all(|p| out.bbox.contains(p)));
    }
}
