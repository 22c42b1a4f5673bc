use nalgebra::Vector3;

use super::{check_common, CameraError, FisheyeProjection, PixelCoord, UnitVector3};

/// Relative slack on the image-circle radius so that points projected exactly
/// onto the rim unproject again.
const RIM_SLACK: f64 = 1e-12;

/// Equidistant fisheye: image radius grows linearly with incident angle,
/// `r = f * theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquidistantCamera {
    focal_length: f64,
    width: u32,
    height: u32,
    principal_point: PixelCoord,
    fov: f64,
}

impl EquidistantCamera {
    /// `focal_length` is in pixels per radian, `fov` the full field of view in radians.
    pub fn new(
        focal_length: f64,
        width: u32,
        height: u32,
        principal_point: PixelCoord,
        fov: f64,
    ) -> Result<Self, CameraError> {
        if !focal_length.is_finite() || focal_length <= 0.0 {
            return Err(CameraError::InvalidFocalLength(focal_length));
        }
        check_common(width, height, principal_point, fov)?;
        Ok(Self { focal_length, width, height, principal_point, fov: fov.min(std::f64::consts::PI) })
    }

    /// Camera whose image circle is inscribed in a square frame:
    /// `f = (width / 2) / (fov / 2)`, principal point at the image center.
    pub fn derive(width: u32, height: u32, fov: f64) -> Result<Self, CameraError> {
        if width == 0 || height == 0 {
            return Err(CameraError::InvalidSize { width, height });
        }
        if width != height {
            return Err(CameraError::NonSquare { width, height });
        }
        if !fov.is_finite() || fov <= 0.0 {
            return Err(CameraError::InvalidFov(fov));
        }
        let f = (width as f64 / 2.0) / (fov / 2.0);
        let pp = PixelCoord::new(width as f64 / 2.0, height as f64 / 2.0);
        Self::new(f, width, height, pp, fov)
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    /// Radius of the image circle in pixels.
    pub fn max_radius(&self) -> f64 {
        self.focal_length * self.fov / 2.0
    }
}

impl FisheyeProjection for EquidistantCamera {
    fn project(&self, dir: &UnitVector3) -> Option<PixelCoord> {
        let theta = dir.incident_angle();
        if theta > self.fov / 2.0 {
            return None;
        }
        let rho = dir.x().hypot(dir.y());
        if rho == 0.0 {
            return Some(self.principal_point);
        }
        let r = self.focal_length * theta;
        Some(PixelCoord::new(
            self.principal_point.u + r * dir.x() / rho,
            self.principal_point.v + r * dir.y() / rho,
        ))
    }

    fn unproject(&self, px: PixelCoord) -> Option<UnitVector3> {
        let dx = px.u - self.principal_point.u;
        let dy = px.v - self.principal_point.v;
        let r = dx.hypot(dy);
        let theta = r / self.focal_length;
        if !theta.is_finite() || theta > self.fov / 2.0 * (1.0 + RIM_SLACK) {
            return None;
        }
        if r == 0.0 {
            return Some(UnitVector3::OPTICAL_AXIS);
        }
        let (st, ct) = theta.sin_cos();
        UnitVector3::normalize(Vector3::new(st * dx / r, st * dy / r, ct)).ok()
    }

    fn width(&self) -> u32 {
        self.width
    }

    fn height(&self) -> u32 {
        self.height
    }

    fn fov(&self) -> f64 {
        self.fov
    }

    fn principal_point(&self) -> PixelCoord {
        self.principal_point
    }
}
