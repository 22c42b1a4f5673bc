//! Helpers for driving the `omnigaze` binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use image::RgbImage;
use nalgebra::{Unit, UnitQuaternion, Vector3};
use omnigaze::camera::{CameraModel, EquidistantCamera, UnitVector3};
use omnigaze::dataset::{read_manifest, write_manifest, SampleRecord};
use omnigaze::reproject::CubemapSet;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_omnigaze")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    pub fn stdout_json(&self) -> serde_json::Value {
        serde_json::from_str(self.stdout.trim()).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", self.stdout))
    }

    /// The last stderr line parsed as the error object.
    pub fn error_json(&self) -> serde_json::Value {
        let line = self.stderr.lines().last().unwrap_or_else(|| panic!("empty stderr"));
        serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {line}"))
    }
}

pub fn run<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out: Output = Command::new(bin()).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes the five faces as PNGs plus a manifest; returns the manifest path.
pub fn write_cubemap(dir: &Path, set: &CubemapSet) -> PathBuf {
    let mut faces = serde_json::Map::new();
    for view in set.views() {
        let name = format!("{}.png", view.face.name());
        view.image.save(dir.join(&name)).unwrap();
        faces.insert(view.face.name().to_string(), name.into());
    }
    let manifest = dir.join("cubemap.json");
    std::fs::write(&manifest, serde_json::json!({ "faces": faces }).to_string()).unwrap();
    manifest
}

pub fn uniform_cubemap(size: u32, color: [u8; 3]) -> CubemapSet {
    CubemapSet::from_fn(size, |_| color)
}

pub fn write_camera(path: &Path, camera: &CameraModel) -> PathBuf {
    std::fs::write(path, camera.to_json()).unwrap();
    path.to_path_buf()
}

pub fn small_camera(size: u32) -> CameraModel {
    EquidistantCamera::derive(size, size, std::f64::consts::PI).unwrap().into()
}

pub fn read_records(path: &Path) -> Vec<SampleRecord> {
    read_manifest(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap()
}

pub fn write_records(path: &Path, records: &[SampleRecord]) {
    let mut f = std::fs::File::create(path).unwrap();
    write_manifest(&mut f, records).unwrap();
}

/// `g` rotated by `deg` about an axis perpendicular to it.
pub fn rotate_away(g: [f64; 3], deg: f64) -> [f64; 3] {
    let v = Vector3::from(g);
    let helper = if v.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let axis = Unit::new_normalize(v.cross(&helper));
    let r = UnitQuaternion::from_axis_angle(&axis, deg.to_radians()) * v;
    UnitVector3::normalize(r).unwrap().to_array()
}

pub fn blank_images(dir: &Path, records: &[SampleRecord], size: u32) {
    for r in records {
        RgbImage::new(size, size).save(dir.join(&r.image)).unwrap();
    }
}
