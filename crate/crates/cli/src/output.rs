use std::fs;
use std::io::{BufReader, Write};
use std::path::Path;

use omnigaze::camera::{CameraModel, EquidistantCamera};
use omnigaze::dataset::{read_manifest, SampleRecord};
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;

pub const DEFAULT_IMAGE_SIZE: u32 = 1024;

/// Writes via a temporary file in the destination directory and a rename,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn require_file(path: &Path) -> Result<(), CliError> {
    match fs::metadata(path) {
        Ok(m) if m.is_file() => Ok(()),
        Ok(_) => Err(CliError::io(path, std::io::Error::other("not a regular file"))),
        Err(e) => Err(CliError::io(path, e)),
    }
}

pub fn require_dir(path: &Path) -> Result<(), CliError> {
    match fs::metadata(path) {
        Ok(m) if m.is_dir() => Ok(()),
        Ok(_) => Err(CliError::io(path, std::io::Error::other("not a directory"))),
        Err(e) => Err(CliError::io(path, e)),
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn load_manifest(path: &Path) -> Result<Vec<SampleRecord>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_manifest(BufReader::new(file))
        .map_err(|e| CliError::from(e).with_detail(json!({ "path": path.display().to_string() })))
}

/// Camera from `--camera`, else a 180 degree equidistant camera at 1024 x 1024.
pub fn load_camera(path: Option<&Path>) -> Result<CameraModel, CliError> {
    match path {
        Some(p) => CameraModel::from_json(&read_text(p)?)
            .map_err(|e| CliError::data(format!("{}: {e}", p.display())).with_detail(json!({ "path": p.display().to_string() }))),
        None => Ok(EquidistantCamera::derive(DEFAULT_IMAGE_SIZE, DEFAULT_IMAGE_SIZE, std::f64::consts::PI)
            .expect("default camera is valid")
            .into()),
    }
}

pub fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string(value).expect("output serializes"));
}

pub fn warn(message: &str, detail: serde_json::Value) {
    let mut v = json!({ "warning": message });
    if let serde_json::Value::Object(extra) = detail {
        v.as_object_mut().unwrap().extend(extra);
    }
    eprintln!("{v}");
}
