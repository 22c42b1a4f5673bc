use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use omnigaze::camera::FisheyeProjection;
use omnigaze::dataset::{remap_annotations, write_manifest, DEFAULT_BBOX_MARGIN};
use omnigaze::reproject::io::{encode_gray_png, encode_rgb_png, read_rgb};
use omnigaze::reproject::{remap_fisheye, FisheyeImage};
use serde_json::json;

use super::sibling;
use crate::error::CliError;
use crate::output::{load_camera, load_manifest, print_json, require_file, warn, write_atomic};
use crate::GlobalArgs;

#[derive(Debug, Args)]
pub struct RemapArgs {
    /// A fisheye PNG, or a `.jsonl` annotation manifest
    pub input: PathBuf,
    pub output: PathBuf,
    /// Destination camera JSON
    #[arg(long, value_name = "JSON")]
    pub to: PathBuf,
    /// Bbox growth ratio when rebuilding boxes from landmarks
    #[arg(long, default_value_t = DEFAULT_BBOX_MARGIN)]
    pub margin: f64,
}

pub fn run(g: &GlobalArgs, a: RemapArgs) -> Result<(), CliError> {
    require_file(&a.input)?;
    require_file(&a.to)?;
    let dst = load_camera(Some(&a.to))?;
    if a.input.extension().is_some_and(|e| e == "jsonl") {
        let records = load_manifest(&a.input)?;
        let mut out = Vec::with_capacity(records.len());
        let mut flagged = 0usize;
        for r in &records {
            let o = remap_annotations(r, &dst, a.margin);
            for f in &o.flagged {
                warn(
                    "landmark outside destination field of view",
                    json!({ "image": r.image, "person_id": f.person_id, "landmark": f.landmark }),
                );
            }
            flagged += o.flagged.len();
            out.push(o.record);
        }
        let mut buf = Vec::new();
        write_manifest(&mut buf, &out)?;
        write_atomic(&a.output, &buf)?;
        print_json(&json!({ "manifest": a.output.display().to_string(), "records": out.len(), "flagged_landmarks": flagged }));
        return Ok(());
    }

    let src_camera = load_camera(g.camera.as_deref())?;
    let pixels = read_rgb(&a.input)?;
    if pixels.dimensions() != (src_camera.width(), src_camera.height()) {
        return Err(CliError::data(format!(
            "{} is {}x{} but the source camera expects {}x{}",
            a.input.display(),
            pixels.width(),
            pixels.height(),
            src_camera.width(),
            src_camera.height()
        )));
    }
    let src = FisheyeImage::from_pixels(pixels, src_camera);
    let t = Instant::now();
    let out = remap_fisheye(&src, &dst);
    let elapsed = t.elapsed();
    let mask_path = sibling(&a.output, "_mask.png");
    write_atomic(&a.output, &encode_rgb_png(&out.pixels)?)?;
    write_atomic(&mask_path, &encode_gray_png(&out.mask_image())?)?;
    print_json(&json!({
        "image": a.output.display().to_string(),
        "mask": mask_path.display().to_string(),
        "valid_pixels": out.valid_count(),
        "remap_ms": elapsed.as_secs_f64() * 1e3,
    }));
    Ok(())
}
