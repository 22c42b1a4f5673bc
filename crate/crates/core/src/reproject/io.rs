//! PNG and cubemap-manifest I/O.
//!
//! A cubemap manifest names one PNG per face, relative paths resolved
//! against the manifest's directory:
//!
//! ```json
//! {"faces": {"up": "up.png", "north": "n.png", "east": "e.png", "south": "s.png", "west": "w.png"}, "fov_deg": 90}
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder, RgbImage};
use serde::{Deserialize, Serialize};

use super::{CubemapSet, Face, PerspectiveView, ReprojectError, CUBE_FACE_FOV_DEG};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubemapManifest {
    pub faces: BTreeMap<String, PathBuf>,
    #[serde(default = "default_fov")]
    pub fov_deg: f64,
}

fn default_fov() -> f64 {
    CUBE_FACE_FOV_DEG
}

impl CubemapManifest {
    pub fn read(path: &Path) -> Result<Self, ReprojectError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| ReprojectError::Manifest(e.to_string()))
    }

    /// Face name to absolute-or-manifest-relative image path, in face priority order.
    pub fn resolved_paths(&self, base: &Path) -> Result<Vec<(Face, PathBuf)>, ReprojectError> {
        for name in self.faces.keys() {
            name.parse::<Face>()?;
        }
        Face::ALL
            .iter()
            .map(|&face| {
                let rel = self.faces.get(face.name()).ok_or(ReprojectError::MissingFace(face))?;
                Ok((face, base.join(rel)))
            })
            .collect()
    }
}

/// Loads the five face PNGs a manifest points at.
pub fn load_cubemap(manifest_path: &Path) -> Result<CubemapSet, ReprojectError> {
    let manifest = CubemapManifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut views = Vec::with_capacity(5);
    for (face, path) in manifest.resolved_paths(base)? {
        let image = image::open(&path)
            .map_err(|source| ReprojectError::FaceImage { face, path: path.clone(), source })?
            .to_rgb8();
        views.push(PerspectiveView { face, image, fov_deg: manifest.fov_deg });
    }
    CubemapSet::new(views)
}

/// PNG bytes with fixed encoder settings so identical rasters give identical files.
pub fn encode_png(pixels: &[u8], width: u32, height: u32, color: ExtendedColorType) -> Result<Vec<u8>, ReprojectError> {
    let mut out = Vec::new();
    PngEncoder::new_with_quality(&mut out, CompressionType::Default, FilterType::Adaptive)
        .write_image(pixels, width, height, color)?;
    Ok(out)
}

pub fn encode_rgb_png(image: &RgbImage) -> Result<Vec<u8>, ReprojectError> {
    encode_png(image.as_raw(), image.width(), image.height(), ExtendedColorType::Rgb8)
}

pub fn encode_gray_png(image: &image::GrayImage) -> Result<Vec<u8>, ReprojectError> {
    encode_png(image.as_raw(), image.width(), image.height(), ExtendedColorType::L8)
}

pub fn read_rgb(path: &Path) -> Result<RgbImage, ReprojectError> {
    Ok(image::open(path)?.to_rgb8())
}
