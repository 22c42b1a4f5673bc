//! Analytic fisheye camera models.
//!
//! Both models share one frame convention: the optical axis is camera `+z`
//! (pointing up, away from the table), `+x` runs toward image-right and `+y`
//! toward image-down. Pixel centers sit at integer + 0.5, so the center of a
//! 1024 x 1024 image is the pixel corner `(512, 512)`.
//!
//! Projection results outside the field of view are values (`None`), not
//! errors: hemisphere boundaries are routine inside reprojection loops.

mod equidistant;
mod kannala_brandt;

use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub use equidistant::EquidistantCamera;
pub use kannala_brandt::KannalaBrandtCamera;

/// Tolerance on `| |v| - 1 |` accepted when constructing a [`UnitVector3`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CameraError {
    #[error("direction is not unit length (norm {norm})")]
    NonUnitDirection { norm: f64 },
    #[error("cannot normalize a zero or non-finite vector")]
    Degenerate,
    #[error("focal length must be positive and finite, got {0}")]
    InvalidFocalLength(f64),
    #[error("field of view must lie in (0, pi], got {0} rad")]
    InvalidFov(f64),
    #[error("image size must be positive, got {width}x{height}")]
    InvalidSize { width: u32, height: u32 },
    #[error("equidistant derivation needs a square image, got {width}x{height}")]
    NonSquare { width: u32, height: u32 },
    #[error("principal point ({u}, {v}) lies outside the image")]
    PrincipalPointOutside { u: f64, v: f64 },
    #[error("distortion polynomial is not strictly increasing near theta = {theta} rad")]
    NonMonotonicDistortion { theta: f64 },
    #[error("non-finite camera parameter")]
    NonFinite,
}

/// A direction in the camera frame with norm 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3(Vector3<f64>);

impl UnitVector3 {
    pub const OPTICAL_AXIS: UnitVector3 = UnitVector3(Vector3::new(0.0, 0.0, 1.0));

    /// Accepts components whose norm is within [`UNIT_NORM_TOLERANCE`] of 1
    /// and renormalizes them.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, CameraError> {
        let v = Vector3::new(x, y, z);
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(CameraError::NonUnitDirection { norm });
        }
        Ok(Self(v / norm))
    }

    pub fn normalize(v: Vector3<f64>) -> Result<Self, CameraError> {
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(CameraError::Degenerate);
        }
        Ok(Self(v / norm))
    }

    /// Direction at incident angle `theta` from `+z` and azimuth `phi`
    /// measured from `+x` toward `+y`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self(Vector3::new(st * cp, st * sp, ct))
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn dot(&self, other: &UnitVector3) -> f64 {
        self.0.dot(&other.0)
    }

    /// Angle between this direction and the optical axis.
    pub fn incident_angle(&self) -> f64 {
        self.0.x.hypot(self.0.y).atan2(self.0.z)
    }
}

impl From<UnitVector3> for Vector3<f64> {
    fn from(v: UnitVector3) -> Self {
        v.0
    }
}

/// Continuous image coordinate in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct PixelCoord {
    pub u: f64,
    pub v: f64,
}

impl PixelCoord {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    /// Center of the pixel at column `col`, row `row`.
    pub fn pixel_center(col: u32, row: u32) -> Self {
        Self::new(col as f64 + 0.5, row as f64 + 0.5)
    }

    pub fn distance(&self, other: &PixelCoord) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

impl From<[f64; 2]> for PixelCoord {
    fn from([u, v]: [f64; 2]) -> Self {
        Self { u, v }
    }
}

impl From<PixelCoord> for [f64; 2] {
    fn from(p: PixelCoord) -> Self {
        [p.u, p.v]
    }
}

impl fmt::Display for PixelCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3}, {:.3})", self.u, self.v)
    }
}

/// Mapping between viewing directions and fisheye pixels.
pub trait FisheyeProjection {
    /// Pixel of `dir`, or `None` when the incident angle exceeds half the FOV.
    fn project(&self, dir: &UnitVector3) -> Option<PixelCoord>;

    /// Viewing direction of `px`, or `None` outside the image circle.
    fn unproject(&self, px: PixelCoord) -> Option<UnitVector3>;

    fn width(&self) -> u32;
    fn height(&self) -> u32;
    fn fov(&self) -> f64;
    fn principal_point(&self) -> PixelCoord;
}

/// Either supported camera model; this is what manifests and CLI flags carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraJson", into = "CameraJson")]
pub enum CameraModel {
    Equidistant(EquidistantCamera),
    KannalaBrandt(KannalaBrandtCamera),
}

impl CameraModel {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("camera intrinsics serialize")
    }
}

impl From<EquidistantCamera> for CameraModel {
    fn from(c: EquidistantCamera) -> Self {
        Self::Equidistant(c)
    }
}

impl From<KannalaBrandtCamera> for CameraModel {
    fn from(c: KannalaBrandtCamera) -> Self {
        Self::KannalaBrandt(c)
    }
}

impl FisheyeProjection for CameraModel {
    fn project(&self, dir: &UnitVector3) -> Option<PixelCoord> {
        match self {
            Self::Equidistant(c) => c.project(dir),
            Self::KannalaBrandt(c) => c.project(dir),
        }
    }

    fn unproject(&self, px: PixelCoord) -> Option<UnitVector3> {
        match self {
            Self::Equidistant(c) => c.unproject(px),
            Self::KannalaBrandt(c) => c.unproject(px),
        }
    }

    fn width(&self) -> u32 {
        match self {
            Self::Equidistant(c) => c.width(),
            Self::KannalaBrandt(c) => c.width(),
        }
    }

    fn height(&self) -> u32 {
        match self {
            Self::Equidistant(c) => c.height(),
            Self::KannalaBrandt(c) => c.height(),
        }
    }

    fn fov(&self) -> f64 {
        match self {
            Self::Equidistant(c) => c.fov(),
            Self::KannalaBrandt(c) => c.fov(),
        }
    }

    fn principal_point(&self) -> PixelCoord {
        match self {
            Self::Equidistant(c) => c.principal_point(),
            Self::KannalaBrandt(c) => c.principal_point(),
        }
    }
}

/// On-disk form of [`CameraModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum CameraJson {
    Equidistant {
        width: u32,
        height: u32,
        f: f64,
        cx: f64,
        cy: f64,
        fov_deg: f64,
    },
    KannalaBrandt {
        width: u32,
        height: u32,
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        fov_deg: f64,
        #[serde(default)]
        k: [f64; 4],
    },
}

impl TryFrom<CameraJson> for CameraModel {
    type Error = CameraError;

    fn try_from(json: CameraJson) -> Result<Self, Self::Error> {
        match json {
            CameraJson::Equidistant { width, height, f, cx, cy, fov_deg } => {
                EquidistantCamera::new(f, width, height, PixelCoord::new(cx, cy), fov_deg.to_radians())
                    .map(Self::Equidistant)
            }
            CameraJson::KannalaBrandt { width, height, fx, fy, cx, cy, fov_deg, k } => {
                KannalaBrandtCamera::new(
                    fx,
                    fy,
                    PixelCoord::new(cx, cy),
                    k,
                    width,
                    height,
                    fov_deg.to_radians(),
                )
                .map(Self::KannalaBrandt)
            }
        }
    }
}

impl From<CameraModel> for CameraJson {
    fn from(model: CameraModel) -> Self {
        match model {
            CameraModel::Equidistant(c) => {
                let pp = c.principal_point();
                CameraJson::Equidistant {
                    width: c.width(),
                    height: c.height(),
                    f: c.focal_length(),
                    cx: pp.u,
                    cy: pp.v,
                    fov_deg: c.fov().to_degrees(),
                }
            }
            CameraModel::KannalaBrandt(c) => {
                let pp = c.principal_point();
                CameraJson::KannalaBrandt {
                    width: c.width(),
                    height: c.height(),
                    fx: c.fx(),
                    fy: c.fy(),
                    cx: pp.u,
                    cy: pp.v,
                    fov_deg: c.fov().to_degrees(),
                    k: c.coefficients(),
                }
            }
        }
    }
}

pub(crate) fn check_common(
    width: u32,
    height: u32,
    principal_point: PixelCoord,
    fov: f64,
) -> Result<(), CameraError> {
    if width == 0 || height == 0 {
        return Err(CameraError::InvalidSize { width, height });
    }
    if !fov.is_finite() || fov <= 0.0 || fov > std::f64::consts::PI * (1.0 + 1e-12) {
        return Err(CameraError::InvalidFov(fov));
    }
    let PixelCoord { u, v } = principal_point;
    if !principal_point.is_finite() || u < 0.0 || v < 0.0 || u > width as f64 || v > height as f64 {
        return Err(CameraError::PrincipalPointOutside { u, v });
    }
    Ok(())
}
