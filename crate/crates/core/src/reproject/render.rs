use image::{GrayImage, Luma, RgbImage};
use rayon::prelude::*;

use super::cubemap::{face_for_direction, CubemapSet};
use super::sample::{round_channel, sample_bilinear_f64};
use crate::camera::{CameraModel, FisheyeProjection, PixelCoord};

/// A fisheye raster together with the camera that produced it.
///
/// `validity_mask[row * width + col]` is true exactly where the pixel center
/// lies inside the image circle; invalid pixels are black.
#[derive(Debug, Clone)]
pub struct FisheyeImage {
    pub pixels: RgbImage,
    pub validity_mask: Vec<bool>,
    pub camera: CameraModel,
}

impl FisheyeImage {
    /// Wraps an existing raster, deriving the mask from `camera` and
    /// blacking out everything outside the image circle.
    pub fn from_pixels(mut pixels: RgbImage, camera: CameraModel) -> Self {
        let (w, h) = pixels.dimensions();
        let mut validity_mask = vec![false; (w * h) as usize];
        for (col, row, p) in pixels.enumerate_pixels_mut() {
            let valid = camera.unproject(PixelCoord::pixel_center(col, row)).is_some();
            validity_mask[(row * w + col) as usize] = valid;
            if !valid {
                p.0 = [0; 3];
            }
        }
        Self { pixels, validity_mask, camera }
    }

    pub fn is_valid(&self, col: u32, row: u32) -> bool {
        self.validity_mask[(row * self.pixels.width() + col) as usize]
    }

    pub fn valid_count(&self) -> usize {
        self.validity_mask.iter().filter(|v| **v).count()
    }

    /// Mask as an 8-bit image, 255 inside the circle.
    pub fn mask_image(&self) -> GrayImage {
        let (w, h) = self.pixels.dimensions();
        GrayImage::from_fn(w, h, |c, r| Luma([if self.is_valid(c, r) { 255 } else { 0 }]))
    }
}

/// Pull-renders the fisheye view of `cubemap` through `camera`.
///
/// Rows are processed in parallel on the current rayon pool.
pub fn render_fisheye(cubemap: &CubemapSet, camera: &CameraModel) -> FisheyeImage {
    pull(camera, |px| {
        let dir = camera.unproject(px)?;
        // fov <= pi keeps every unprojected ray in the upper hemisphere
        let hit = face_for_direction(&dir).ok()?;
        let view = cubemap.view(hit.face);
        let (u, v) = view.pixel_for_local(hit.local);
        Some(sample_bilinear_f64(&view.image, u, v))
    })
}

/// Resamples `src` into `dst_camera` without going back to the cubemap.
///
/// A destination pixel is valid when its ray lies inside both cameras' fields of view.
pub fn remap_fisheye(src: &FisheyeImage, dst_camera: &CameraModel) -> FisheyeImage {
    pull(dst_camera, |px| {
        let dir = dst_camera.unproject(px)?;
        let at = src.camera.project(&dir)?;
        Some(sample_bilinear_f64(&src.pixels, at.u, at.v))
    })
}

fn pull<F>(camera: &CameraModel, shade: F) -> FisheyeImage
where
    F: Fn(PixelCoord) -> Option<[f64; 3]> + Sync,
{
    let (w, h) = (camera.width(), camera.height());
    let mut raw = vec![0u8; (w * h * 3) as usize];
    let mut mask = vec![false; (w * h) as usize];
    raw.par_chunks_mut((w * 3) as usize)
        .zip(mask.par_chunks_mut(w as usize))
        .enumerate()
        .for_each(|(row, (rgb_row, mask_row))| {
            for col in 0..w as usize {
                if let Some(rgb) = shade(PixelCoord::pixel_center(col as u32, row as u32)) {
                    mask_row[col] = true;
                    for (dst, value) in rgb_row[col * 3..col * 3 + 3].iter_mut().zip(rgb) {
                        *dst = round_channel(value);
                    }
                }
            }
        });
    let pixels = RgbImage::from_raw(w, h, raw).expect("buffer sized to the camera");
    FisheyeImage { pixels, validity_mask: mask, camera: camera.clone() }
}
