//! Fisheye synthesis from five perspective views and fisheye-to-fisheye remapping.
//!
//! Both operations pull: every output pixel center is unprojected to a
//! direction and the source is sampled there, so there are no holes and rows
//! can be processed independently.

mod cubemap;
pub mod io;
mod render;
mod sample;

use std::path::PathBuf;

pub use cubemap::{face_for_direction, CubemapSet, Face, FaceHit, PerspectiveView, CUBE_FACE_FOV_DEG};
pub use render::{remap_fisheye, render_fisheye, FisheyeImage};
pub use sample::{round_channel, sample_bilinear, sample_bilinear_f64};

#[derive(Debug, thiserror::Error)]
pub enum ReprojectError {
    #[error("direction lies in the lower hemisphere (z = {z})")]
    LowerHemisphere { z: f64 },
    #[error("unknown cube face '{0}'")]
    UnknownFace(String),
    #[error("cubemap is missing the {0} face")]
    MissingFace(Face),
    #[error("cubemap has more than one {0} face")]
    DuplicateFace(Face),
    #[error("{0} face image is empty")]
    EmptyFace(Face),
    #[error("{face} face has fov {fov_deg} deg, expected 90")]
    FaceFov { face: Face, fov_deg: f64 },
    #[error("cannot read {face} face image {path}: {source}")]
    FaceImage {
        face: Face,
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("invalid cubemap manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
