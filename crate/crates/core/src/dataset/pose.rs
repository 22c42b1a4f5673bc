//! Head and gaze angle conventions.
//!
//! The head frame has `+x` toward the head's left ear, `+y` toward the chin
//! and `+z` toward the back of the head, so the face looks along `-z`. With
//! standard right-hand elementary rotations this makes positive yaw turn the
//! face toward its right, positive pitch tilt it down, and positive roll drop
//! the left ear. Head orientation is `Rz(roll) * Rx(pitch) * Ry(yaw)`.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::UnitVector3;

/// Face direction in the head frame.
pub const HEAD_FORWARD: Vector3<f64> = Vector3::new(0.0, 0.0, -1.0);

/// Head orientation in degrees plus head-center translation in the camera frame (cm).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HeadPose {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub translation_cm: [f64; 3],
}

impl HeadPose {
    pub fn from_angles(yaw_deg: f64, pitch_deg: f64, roll_deg: f64) -> Self {
        Self { yaw_deg, pitch_deg, roll_deg, translation_cm: [0.0; 3] }
    }

    pub fn distance_cm(&self) -> f64 {
        Vector3::from(self.translation_cm).norm()
    }
}

/// Eye-in-head gaze angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocalGaze {
    #[serde(rename = "yaw")]
    pub yaw_deg: f64,
    #[serde(rename = "pitch")]
    pub pitch_deg: f64,
}

fn rx(deg: f64) -> Matrix3<f64> {
    *Rotation3::from_axis_angle(&Vector3::x_axis(), deg.to_radians()).matrix()
}

fn ry(deg: f64) -> Matrix3<f64> {
    *Rotation3::from_axis_angle(&Vector3::y_axis(), deg.to_radians()).matrix()
}

fn rz(deg: f64) -> Matrix3<f64> {
    *Rotation3::from_axis_angle(&Vector3::z_axis(), deg.to_radians()).matrix()
}

/// `Rz(roll) * Rx(pitch) * Ry(yaw)`.
pub fn head_rotation_matrix(pose: &HeadPose) -> Matrix3<f64> {
    rz(pose.roll_deg) * rx(pose.pitch_deg) * ry(pose.yaw_deg)
}

/// Gaze direction in the head frame: `Rx(pitch) * Ry(yaw) * HEAD_FORWARD`.
pub fn local_gaze_direction(local: &LocalGaze) -> Vector3<f64> {
    let (sa, ca) = local.yaw_deg.to_radians().sin_cos();
    let (sb, cb) = local.pitch_deg.to_radians().sin_cos();
    Vector3::new(-sa, sb * ca, -cb * ca)
}

/// Camera-frame gaze: `head_to_camera * R_head(pose) * dir(local)`, normalized.
pub fn gaze_local_to_camera(local: &LocalGaze, pose: &HeadPose, head_to_camera: &Matrix3<f64>) -> UnitVector3 {
    let g = head_to_camera * head_rotation_matrix(pose) * local_gaze_direction(local);
    UnitVector3::normalize(g).expect("rotated unit vector is nonzero")
}

/// Head-forward axis after applying `pose`, expressed in the head's neutral frame.
pub fn head_forward(pose: &HeadPose) -> UnitVector3 {
    UnitVector3::normalize(head_rotation_matrix(pose) * HEAD_FORWARD).expect("rotated unit vector is nonzero")
}

/// Neutral head frame for a person at camera azimuth `azimuth_deg` who
/// faces the camera's vertical axis horizontally, upright (chin toward `-z`).
pub fn facing_axis_rotation(azimuth_deg: f64) -> Matrix3<f64> {
    let (s, c) = azimuth_deg.to_radians().sin_cos();
    let left = Vector3::new(s, -c, 0.0);
    let down = Vector3::new(0.0, 0.0, -1.0);
    let back = Vector3::new(c, s, 0.0);
    Matrix3::from_columns(&[left, down, back])
}
