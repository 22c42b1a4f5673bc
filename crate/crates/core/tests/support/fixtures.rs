//! Shared scene fixtures for integration and acceptance tests.

#![allow(dead_code)]

use image::RgbImage;
use omnigaze::camera::{CameraModel, EquidistantCamera, KannalaBrandtCamera, UnitVector3};
use omnigaze::reproject::{CubemapSet, Face};
use std::f64::consts::PI;

pub fn equidistant(size: u32) -> CameraModel {
    EquidistantCamera::derive(size, size, PI).unwrap().into()
}

pub fn kannala_brandt(size: u32, k1: f64) -> CameraModel {
    KannalaBrandtCamera::fit_to_image(size, size, PI, [k1, 0.0, 0.0, 0.0]).unwrap().into()
}

/// Smooth color keyed to direction: red and green follow `x` and `y`, blue follows `z`.
pub fn direction_color(d: [f64; 3]) -> [f64; 3] {
    [127.5 * (1.0 + d[0]), 127.5 * (1.0 + d[1]), 255.0 * d[2].max(0.0)]
}

pub fn direction_color_u8(d: &UnitVector3) -> [u8; 3] {
    direction_color(d.to_array()).map(|c| c.round_ties_even().clamp(0.0, 255.0) as u8)
}

pub fn direction_cubemap(face_size: u32) -> CubemapSet {
    CubemapSet::from_fn(face_size, direction_color_u8)
}

/// True when `d` falls within `margin` (in face-plane units) of a face edge,
/// judged by its own largest axis component rather than the library's face choice.
pub fn near_seam(d: [f64; 3], margin: f64) -> bool {
    let ax = [d[0].abs(), d[1].abs(), d[2].max(0.0)];
    let major = ax.iter().cloned().fold(0.0, f64::max);
    let limit = 1.0 - margin;
    let mut minors = ax.iter().filter(|v| **v < major);
    let dominant_count = ax.iter().filter(|v| **v == major).count();
    dominant_count > 1 || minors.any(|v| v / major > limit) || d[2] < margin
}

/// Low-frequency color pattern with no edges sharper than a few hundred pixels.
pub fn band_limited_gradient(w: u32, h: u32) -> RgbImage {
    RgbImage::from_fn(w, h, |x, y| {
        let u = x as f64 / w as f64;
        let v = y as f64 / h as f64;
        let r = 127.5 + 100.0 * (2.0 * PI * 1.5 * u).sin();
        let g = 127.5 + 100.0 * (2.0 * PI * 1.0 * v + 0.3).cos();
        let b = 40.0 + 170.0 * (u + v) / 2.0;
        image::Rgb([r, g, b].map(|c| c.round() as u8))
    })
}

pub fn all_faces() -> [Face; 5] {
    Face::ALL
}
