use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::Args;
use image::{Rgb, RgbImage};
use omnigaze::camera::UnitVector3;
use omnigaze::dataset::{arrow_anchor, arrow_polyline, PersonAnnotation, SampleRecord, ARROW_SAMPLES, DEFAULT_ARROW_LENGTH_CM};
use omnigaze::reproject::io::{encode_rgb_png, read_rgb};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::draw;
use crate::error::{CliError, Exit};
use crate::output::{load_manifest, print_json, require_dir, warn, write_atomic};
use crate::GlobalArgs;

pub const GT_COLOR: Rgb<u8> = Rgb([255, 0, 0]);
pub const PRED_COLOR: Rgb<u8> = Rgb([255, 255, 0]);
const LINE_WIDTH: u32 = 2;

#[derive(Debug, Args)]
pub struct VisualizeArgs {
    pub manifest: PathBuf,
    pub images_dir: PathBuf,
    pub out_dir: PathBuf,
    /// Prediction manifest drawn in yellow over the ground truth
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// 3D length of the gaze ray
    #[arg(long, default_value_t = DEFAULT_ARROW_LENGTH_CM)]
    pub arrow_length_cm: f64,
}

fn draw_person(img: &mut RgbImage, record: &SampleRecord, p: &PersonAnnotation, color: Rgb<u8>, length_cm: f64, warnings: &mut Vec<Value>) {
    let b = &p.bbox;
    draw::rect(img, b.x, b.y, b.w, b.h, color, LINE_WIDTH);
    let gaze = match UnitVector3::new(p.gaze[0], p.gaze[1], p.gaze[2]) {
        Ok(g) => g,
        Err(_) => {
            warnings.push(json!({ "warning": "gaze is not a unit vector, arrow skipped", "image": record.image, "person_id": p.id }));
            return;
        }
    };
    let Some(anchor) = arrow_anchor(&record.camera, p) else {
        warnings.push(json!({ "warning": "arrow anchor outside the field of view", "image": record.image, "person_id": p.id }));
        return;
    };
    if anchor.from_bbox {
        warnings.push(json!({ "warning": "no eye landmarks, arrow anchored at bbox center", "image": record.image, "person_id": p.id }));
    }
    let pts: Vec<Option<(f64, f64)>> = arrow_polyline(&record.camera, &anchor.origin_cm, &gaze, length_cm, ARROW_SAMPLES)
        .into_iter()
        .map(|px| px.map(|px| (px.u, px.v)))
        .collect();
    draw::polyline(img, &pts, color, LINE_WIDTH);
    if let Some(Some(end)) = pts.iter().rev().find(|p| p.is_some()) {
        draw::line(img, *end, *end, color, LINE_WIDTH + 2);
    }
}

fn render_one(
    record: &SampleRecord,
    pred: Option<&SampleRecord>,
    images_dir: &Path,
    out_dir: &Path,
    length_cm: f64,
) -> (Result<PathBuf, CliError>, Vec<Value>) {
    let mut warnings = Vec::new();
    let result = (|| {
        let src = images_dir.join(&record.image);
        let mut img = read_rgb(&src).map_err(|e| CliError::from(e).with_detail(json!({ "path": src.display().to_string() })))?;
        for p in &record.persons {
            draw_person(&mut img, record, p, GT_COLOR, length_cm, &mut warnings);
        }
        if let Some(pred) = pred {
            for p in &pred.persons {
                draw_person(&mut img, pred, p, PRED_COLOR, length_cm, &mut warnings);
            }
        }
        let dst = out_dir.join(&record.image);
        write_atomic(&dst, &encode_rgb_png(&img)?)?;
        Ok(dst)
    })();
    (result, warnings)
}

pub fn run(_: &GlobalArgs, a: VisualizeArgs) -> Result<(), CliError> {
    require_dir(&a.images_dir)?;
    if !(a.arrow_length_cm > 0.0 && a.arrow_length_cm.is_finite()) {
        return Err(CliError::usage("--arrow-length-cm must be positive"));
    }
    let records = load_manifest(&a.manifest)?;
    let preds = a.pred.as_deref().map(load_manifest).transpose()?.unwrap_or_default();
    let by_image: HashMap<&str, &SampleRecord> = preds.iter().map(|r| (r.image.as_str(), r)).collect();

    let results: Vec<_> = records
        .par_iter()
        .map(|r| render_one(r, by_image.get(r.image.as_str()).copied(), &a.images_dir, &a.out_dir, a.arrow_length_cm))
        .collect();
    let mut written = Vec::new();
    let mut skipped = 0usize;
    for (r, (result, warnings)) in records.iter().zip(results) {
        for w in warnings {
            eprintln!("{w}");
        }
        match result {
            Ok(path) => written.push(path.display().to_string()),
            Err(e) => {
                skipped += 1;
                warn("image skipped", json!({ "image": r.image, "reason": e.message }));
            }
        }
    }
    print_json(&json!({ "written": written, "skipped": skipped }));
    if !records.is_empty() && written.is_empty() {
        return Err(CliError::new(Exit::MissingInput, "missing_input", format!("none of the {} images could be drawn", records.len())));
    }
    Ok(())
}
