use nalgebra::Vector3;

use super::{check_common, CameraError, FisheyeProjection, PixelCoord, UnitVector3};

const MONOTONIC_SAMPLES: usize = 1024;
const NEWTON_MAX_ITERS: usize = 50;
const NEWTON_TOLERANCE: f64 = 1e-10;
const RIM_SLACK: f64 = 1e-12;

/// Kannala-Brandt fisheye with the odd polynomial
/// `d(theta) = theta + k1 theta^3 + k2 theta^5 + k3 theta^7 + k4 theta^9`.
///
/// With all `k = 0` and `fx = fy = f` this is the equidistant model.
#[derive(Debug, Clone, PartialEq)]
pub struct KannalaBrandtCamera {
    fx: f64,
    fy: f64,
    principal_point: PixelCoord,
    k: [f64; 4],
    width: u32,
    height: u32,
    fov: f64,
}

impl KannalaBrandtCamera {
    pub fn new(
        fx: f64,
        fy: f64,
        principal_point: PixelCoord,
        k: [f64; 4],
        width: u32,
        height: u32,
        fov: f64,
    ) -> Result<Self, CameraError> {
        for f in [fx, fy] {
            if !f.is_finite() || f <= 0.0 {
                return Err(CameraError::InvalidFocalLength(f));
            }
        }
        if k.iter().any(|c| !c.is_finite()) {
            return Err(CameraError::NonFinite);
        }
        check_common(width, height, principal_point, fov)?;
        let cam = Self { fx, fy, principal_point, k, width, height, fov: fov.min(std::f64::consts::PI) };
        cam.check_monotonic()?;
        Ok(cam)
    }

    /// Square-image camera whose distorted image circle is inscribed in the
    /// frame: `fx = fy = (width / 2) / d(fov / 2)`.
    pub fn fit_to_image(width: u32, height: u32, fov: f64, k: [f64; 4]) -> Result<Self, CameraError> {
        if width == 0 || height == 0 {
            return Err(CameraError::InvalidSize { width, height });
        }
        if width != height {
            return Err(CameraError::NonSquare { width, height });
        }
        if !fov.is_finite() || fov <= 0.0 {
            return Err(CameraError::InvalidFov(fov));
        }
        let d_max = distort(&k, fov / 2.0);
        if !(d_max > 0.0) {
            return Err(CameraError::NonMonotonicDistortion { theta: fov / 2.0 });
        }
        let f = (width as f64 / 2.0) / d_max;
        let pp = PixelCoord::new(width as f64 / 2.0, height as f64 / 2.0);
        Self::new(f, f, pp, k, width, height, fov)
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }

    pub fn fy(&self) -> f64 {
        self.fy
    }

    pub fn coefficients(&self) -> [f64; 4] {
        self.k
    }

    /// Distorted normalized radius `d(theta)`.
    pub fn distort(&self, theta: f64) -> f64 {
        distort(&self.k, theta)
    }

    fn check_monotonic(&self) -> Result<(), CameraError> {
        let half = self.fov / 2.0;
        let mut prev = 0.0;
        for i in 1..=MONOTONIC_SAMPLES {
            let theta = half * i as f64 / MONOTONIC_SAMPLES as f64;
            let d = self.distort(theta);
            if distort_derivative(&self.k, theta) <= 0.0 || d <= prev {
                return Err(CameraError::NonMonotonicDistortion { theta });
            }
            prev = d;
        }
        Ok(())
    }

    /// Solves `d(theta) = target` on `[0, fov/2]`: Newton seeded at `target`,
    /// falling back to bisection whenever a step leaves the bracket.
    fn undistort(&self, target: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, self.fov / 2.0);
        let mut theta = target.clamp(lo, hi);
        for _ in 0..NEWTON_MAX_ITERS {
            let residual = self.distort(theta) - target;
            if residual == 0.0 {
                return theta;
            }
            if residual > 0.0 {
                hi = theta;
            } else {
                lo = theta;
            }
            let slope = distort_derivative(&self.k, theta);
            let mut next = theta - residual / slope;
            if !(slope > 0.0) || !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - theta).abs();
            theta = next;
            if step < NEWTON_TOLERANCE {
                break;
            }
        }
        theta
    }
}

fn distort(k: &[f64; 4], theta: f64) -> f64 {
    let t2 = theta * theta;
    theta * (1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3]))))
}

fn distort_derivative(k: &[f64; 4], theta: f64) -> f64 {
    let t2 = theta * theta;
    1.0 + t2 * (3.0 * k[0] + t2 * (5.0 * k[1] + t2 * (7.0 * k[2] + t2 * 9.0 * k[3])))
}

impl FisheyeProjection for KannalaBrandtCamera {
    fn project(&self, dir: &UnitVector3) -> Option<PixelCoord> {
        let theta = dir.incident_angle();
        if theta > self.fov / 2.0 {
            return None;
        }
        let rho = dir.x().hypot(dir.y());
        if rho == 0.0 {
            return Some(self.principal_point);
        }
        let d = self.distort(theta);
        Some(PixelCoord::new(
            self.principal_point.u + self.fx * d * dir.x() / rho,
            self.principal_point.v + self.fy * d * dir.y() / rho,
        ))
    }

    fn unproject(&self, px: PixelCoord) -> Option<UnitVector3> {
        let mx = (px.u - self.principal_point.u) / self.fx;
        let my = (px.v - self.principal_point.v) / self.fy;
        let rd = mx.hypot(my);
        if !rd.is_finite() || rd > self.distort(self.fov / 2.0) * (1.0 + RIM_SLACK) {
            return None;
        }
        if rd == 0.0 {
            return Some(UnitVector3::OPTICAL_AXIS);
        }
        let theta = self.undistort(rd);
        let (st, ct) = theta.sin_cos();
        UnitVector3::normalize(Vector3::new(st * mx / rd, st * my / rd, ct)).ok()
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::EquidistantCamera;
    use std::f64::consts::PI;

    #[test]
    fn zero_coefficients_match_equidistant() {
        let eq = EquidistantCamera::derive(1024, 1024, PI).unwrap();
        let f = eq.focal_length();
        let kb = KannalaBrandtCamera::new(f, f, eq.principal_point(), [0.0; 4], 1024, 1024, PI).unwrap();
        for i in 0..200 {
            let theta = (i as f64 / 199.0) * PI / 2.0;
            let dir = UnitVector3::from_spherical(theta, i as f64 * 0.37);
            let a = eq.project(&dir).unwrap();
            let b = kb.project(&dir).unwrap();
            assert!(a.distance(&b) < 1e-9);
        }
    }

    #[test]
    fn rejects_folding_polynomial() {
        // d'(theta) = 1 - 1.5 theta^2 crosses zero at 0.816 rad
        let err = KannalaBrandtCamera::new(300.0, 300.0, PixelCoord::new(512.0, 512.0), [-0.5, 0.0, 0.0, 0.0], 1024, 1024, PI);
        assert!(matches!(err, Err(CameraError::NonMonotonicDistortion { .. })));
    }

    #[test]
    fn fit_to_image_puts_rim_on_frame_edge() {
        let kb = KannalaBrandtCamera::fit_to_image(1024, 1024, PI, [0.05, 0.0, 0.0, 0.0]).unwrap();
        let rim = kb.project(&UnitVector3::from_spherical(PI / 2.0, 0.0)).unwrap();
        assert!((rim.u - 1024.0).abs() < 1e-9);
    }

    #[test]
    fn undistort_inverts_distort() {
        let kb = KannalaBrandtCamera::new(300.0, 300.0, PixelCoord::new(512.0, 512.0), [0.05, -0.01, 0.002, -0.0001], 1024, 1024, PI).unwrap();
        for i in 0..=100 {
            let theta = PI / 2.0 * i as f64 / 100.0;
            let back = kb.undistort(kb.distort(theta));
            assert!((back - theta).abs() < 1e-12, "theta {theta} back {back}");
        }
    }

    #[test]
    fn anisotropic_focal_lengths_scale_per_axis() {
        let kb = KannalaBrandtCamera::new(200.0, 400.0, PixelCoord::new(512.0, 512.0), [0.0; 4], 1024, 1024, PI).unwrap();
        let d = UnitVector3::from_spherical(0.5, PI / 2.0);
        let p = kb.project(&d).unwrap();
        assert!((p.v - (512.0 + 400.0 * 0.5)).abs() < 1e-9);
        let back = kb.unproject(p).unwrap();
        assert!((back.dot(&d) - 1.0).abs() < 1e-14);
    }
}
