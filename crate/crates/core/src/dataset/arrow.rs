//! Gaze arrows drawn as projected 3D rays.
//!
//! Under fisheye distortion a straight 3D ray images to a curve, so the arrow
//! is a polyline through the projections of points sampled along the ray.

use nalgebra::Vector3;

use super::record::PersonAnnotation;
use crate::camera::{FisheyeProjection, PixelCoord, UnitVector3};

pub const DEFAULT_ARROW_LENGTH_CM: f64 = 20.0;
pub const ARROW_SAMPLES: usize = 16;

/// Where an arrow starts and how that point was recovered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrowAnchor {
    pub origin_cm: Vector3<f64>,
    /// True when no eye landmarks were available and the bbox center was used.
    pub from_bbox: bool,
}

/// Projections of `samples` evenly spaced points on `origin + t * gaze`,
/// `t` in `[0, length_cm]`. Points outside the FOV are `None`.
pub fn arrow_polyline<C: FisheyeProjection + ?Sized>(
    camera: &C,
    origin_cm: &Vector3<f64>,
    gaze: &UnitVector3,
    length_cm: f64,
    samples: usize,
) -> Vec<Option<PixelCoord>> {
    let step = if samples > 1 { length_cm / (samples - 1) as f64 } else { 0.0 };
    (0..samples)
        .map(|i| {
            let p = origin_cm + gaze.as_vector() * (step * i as f64);
            UnitVector3::normalize(p).ok().and_then(|d| camera.project(&d))
        })
        .collect()
}

/// Midpoint of the eye centers in 3D; falls back to unprojecting 2D labels
/// at the annotated distance, then to the bbox center.
pub fn arrow_anchor<C: FisheyeProjection + ?Sized>(camera: &C, person: &PersonAnnotation) -> Option<ArrowAnchor> {
    if let Some(e) = &person.eye_landmarks_3d {
        let mid = (Vector3::from(e.left_center) + Vector3::from(e.right_center)) * 0.5;
        return Some(ArrowAnchor { origin_cm: mid, from_bbox: false });
    }
    let (px, from_bbox) = match &person.eye_landmarks {
        Some(e) => (
            PixelCoord::new(0.5 * (e.left_center.u + e.right_center.u), 0.5 * (e.left_center.v + e.right_center.v)),
            false,
        ),
        None => (person.bbox.center(), true),
    };
    let dir = camera.unproject(px)?;
    Some(ArrowAnchor { origin_cm: dir.as_vector() * person.distance_cm, from_bbox })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::EquidistantCamera;
    use std::f64::consts::PI;

    #[test]
    fn axial_gaze_collapses_to_a_point() {
        let cam = EquidistantCamera::derive(1024, 1024, PI).unwrap();
        let pts = arrow_polyline(&cam, &Vector3::new(0.0, 0.0, 60.0), &UnitVector3::OPTICAL_AXIS, 20.0, ARROW_SAMPLES);
        assert_eq!(pts.len(), 16);
        for p in pts {
            assert_eq!(p, Some(PixelCoord::new(512.0, 512.0)));
        }
    }

    #[test]
    fn vertices_are_per_point_projections() {
        let cam = EquidistantCamera::derive(1024, 1024, PI).unwrap();
        let origin = Vector3::new(40.0, -10.0, 30.0);
        let gaze = UnitVector3::normalize(Vector3::new(-1.0, 0.3, 0.2)).unwrap();
        let pts = arrow_polyline(&cam, &origin, &gaze, 20.0, ARROW_SAMPLES);
        for (i, p) in pts.iter().enumerate() {
            let q = origin + gaze.as_vector() * (20.0 / 15.0 * i as f64);
            assert_eq!(*p, cam.project(&UnitVector3::normalize(q).unwrap()));
        }
        assert!(pts[0].unwrap().distance(&pts[15].unwrap()) > 10.0);
    }
}
