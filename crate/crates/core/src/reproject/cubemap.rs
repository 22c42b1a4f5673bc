use std::fmt;
use std::str::FromStr;

use image::RgbImage;
use nalgebra::{Matrix3, Vector3};

use super::ReprojectError;
use crate::camera::UnitVector3;

/// Field of view of every view in the canonical five-view rig.
pub const CUBE_FACE_FOV_DEG: f64 = 90.0;

/// Directions with `z` below this are rejected as lower-hemisphere.
const HEMISPHERE_SLACK: f64 = 1e-9;

/// One of the five upper-hemisphere cube faces.
///
/// The order of the variants is the tie-break priority used by
/// [`face_for_direction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Face {
    Up,
    North,
    East,
    South,
    West,
}

impl Face {
    pub const ALL: [Face; 5] = [Face::Up, Face::North, Face::East, Face::South, Face::West];

    pub fn name(self) -> &'static str {
        match self {
            Face::Up => "up",
            Face::North => "north",
            Face::East => "east",
            Face::South => "south",
            Face::West => "west",
        }
    }

    /// View basis `[right, down, forward]` in the camera frame.
    ///
    /// Up looks along `+z` with `+y` as its up-vector; the side faces look
    /// horizontally (North `-y`, East `+x`, South `+y`, West `-x`) with `+z` up.
    pub fn basis(self) -> [Vector3<f64>; 3] {
        let v = Vector3::new;
        match self {
            Face::Up => [v(-1.0, 0.0, 0.0), v(0.0, -1.0, 0.0), v(0.0, 0.0, 1.0)],
            Face::North => [v(-1.0, 0.0, 0.0), v(0.0, 0.0, -1.0), v(0.0, -1.0, 0.0)],
            Face::East => [v(0.0, -1.0, 0.0), v(0.0, 0.0, -1.0), v(1.0, 0.0, 0.0)],
            Face::South => [v(1.0, 0.0, 0.0), v(0.0, 0.0, -1.0), v(0.0, 1.0, 0.0)],
            Face::West => [v(0.0, 1.0, 0.0), v(0.0, 0.0, -1.0), v(-1.0, 0.0, 0.0)],
        }
    }

    pub fn forward(self) -> Vector3<f64> {
        self.basis()[2]
    }

    /// Rotation taking view-local coordinates (`+x` right, `+y` down,
    /// `+z` forward) to the camera frame.
    pub fn orientation(self) -> Matrix3<f64> {
        let [r, d, f] = self.basis();
        Matrix3::from_columns(&[r, d, f])
    }

    /// View-plane coordinates of `dir` on this face, `(right, down) / forward`.
    /// Only meaningful when `dir` has positive forward component.
    pub fn local_coords(self, dir: &Vector3<f64>) -> [f64; 2] {
        let [r, d, f] = self.basis();
        let depth = dir.dot(&f);
        [dir.dot(&r) / depth, dir.dot(&d) / depth]
    }

    /// Camera-frame direction through view-plane point `(a, b)`.
    pub fn direction_at(self, a: f64, b: f64) -> UnitVector3 {
        let [r, d, f] = self.basis();
        UnitVector3::normalize(r * a + d * b + f).expect("face rays are finite and nonzero")
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Face {
    type Err = ReprojectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Face::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| ReprojectError::UnknownFace(s.to_string()))
    }
}

/// Face that sees `dir` plus normalized view-plane coordinates in `[-1, 1]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceHit {
    pub face: Face,
    pub local: [f64; 2],
}

/// Picks the face whose forward axis has the largest dot product with `dir`;
/// exact ties go to the earlier face in `Up, North, East, South, West`.
pub fn face_for_direction(dir: &UnitVector3) -> Result<FaceHit, ReprojectError> {
    if dir.z() < -HEMISPHERE_SLACK {
        return Err(ReprojectError::LowerHemisphere { z: dir.z() });
    }
    let v = dir.as_vector();
    let mut best = Face::Up;
    let mut best_dot = v.dot(&Face::Up.forward());
    for face in &Face::ALL[1..] {
        let dot = v.dot(&face.forward());
        if dot > best_dot {
            best = *face;
            best_dot = dot;
        }
    }
    let [a, b] = best.local_coords(v);
    Ok(FaceHit { face: best, local: [a.clamp(-1.0, 1.0), b.clamp(-1.0, 1.0)] })
}

/// A 90 degree perspective render looking along one cube face.
#[derive(Debug, Clone)]
pub struct PerspectiveView {
    pub face: Face,
    pub image: RgbImage,
    pub fov_deg: f64,
}

impl PerspectiveView {
    pub fn new(face: Face, image: RgbImage) -> Self {
        Self { face, image, fov_deg: CUBE_FACE_FOV_DEG }
    }

    pub fn orientation(&self) -> Matrix3<f64> {
        self.face.orientation()
    }

    /// Continuous pixel coordinate for view-plane point `(a, b)`.
    pub fn pixel_for_local(&self, [a, b]: [f64; 2]) -> (f64, f64) {
        let (w, h) = self.image.dimensions();
        ((a + 1.0) * 0.5 * w as f64, (b + 1.0) * 0.5 * h as f64)
    }
}

/// Five views covering the upper hemisphere, one per [`Face`].
#[derive(Debug, Clone)]
pub struct CubemapSet {
    views: [PerspectiveView; 5],
}

impl CubemapSet {
    /// Accepts the views in any order; every face must appear exactly once.
    pub fn new(views: Vec<PerspectiveView>) -> Result<Self, ReprojectError> {
        let mut slots: [Option<PerspectiveView>; 5] = Default::default();
        for view in views {
            if (view.fov_deg - CUBE_FACE_FOV_DEG).abs() > 1e-9 {
                return Err(ReprojectError::FaceFov { face: view.face, fov_deg: view.fov_deg });
            }
            let (w, h) = view.image.dimensions();
            if w == 0 || h == 0 {
                return Err(ReprojectError::EmptyFace(view.face));
            }
            let slot = &mut slots[view.face as usize];
            if slot.is_some() {
                return Err(ReprojectError::DuplicateFace(view.face));
            }
            *slot = Some(view);
        }
        let mut missing = Face::ALL.iter().zip(&slots).filter(|(_, s)| s.is_none());
        if let Some((face, _)) = missing.next() {
            return Err(ReprojectError::MissingFace(*face));
        }
        Ok(Self { views: slots.map(|s| s.expect("checked above")) })
    }

    /// Builds each face by evaluating `color` at its pixel-center directions.
    pub fn from_fn(size: u32, color: impl Fn(&UnitVector3) -> [u8; 3]) -> Self {
        let views = Face::ALL
            .iter()
            .map(|&face| {
                let image = RgbImage::from_fn(size, size, |col, row| {
                    let a = (col as f64 + 0.5) / size as f64 * 2.0 - 1.0;
                    let b = (row as f64 + 0.5) / size as f64 * 2.0 - 1.0;
                    image::Rgb(color(&face.direction_at(a, b)))
                });
                PerspectiveView::new(face, image)
            })
            .collect();
        Self::new(views).expect("all five faces constructed")
    }

    pub fn view(&self, face: Face) -> &PerspectiveView {
        &self.views[face as usize]
    }

    pub fn views(&self) -> &[PerspectiveView; 5] {
        &self.views
    }
}
