use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use omnigaze::camera::FisheyeProjection;
use omnigaze::reproject::io::{encode_gray_png, encode_rgb_png, load_cubemap};
use omnigaze::reproject::render_fisheye;
use serde_json::json;

use super::sibling;
use crate::error::CliError;
use crate::output::{load_camera, print_json, require_file, write_atomic};
use crate::GlobalArgs;

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Cubemap manifest naming the five face PNGs
    pub manifest: PathBuf,
    pub output: PathBuf,
    /// Validity mask path (default: `<output stem>_mask.png`)
    #[arg(long)]
    pub mask: Option<PathBuf>,
}

pub fn run(g: &GlobalArgs, a: RenderArgs) -> Result<(), CliError> {
    require_file(&a.manifest)?;
    let camera = load_camera(g.camera.as_deref())?;
    let mask_path = a.mask.unwrap_or_else(|| sibling(&a.output, "_mask.png"));

    let t0 = Instant::now();
    let cubemap = load_cubemap(&a.manifest)?;
    let t_load = t0.elapsed();
    let t1 = Instant::now();
    let image = render_fisheye(&cubemap, &camera);
    let t_render = t1.elapsed();

    write_atomic(&a.output, &encode_rgb_png(&image.pixels)?)?;
    write_atomic(&mask_path, &encode_gray_png(&image.mask_image())?)?;
    print_json(&json!({
        "image": a.output.display().to_string(),
        "mask": mask_path.display().to_string(),
        "width": camera.width(),
        "height": camera.height(),
        "valid_pixels": image.valid_count(),
        "threads": rayon::current_num_threads(),
        "load_ms": t_load.as_secs_f64() * 1e3,
        "render_ms": t_render.as_secs_f64() * 1e3,
    }));
    Ok(())
}
