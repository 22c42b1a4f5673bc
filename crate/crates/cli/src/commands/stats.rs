use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{load_manifest, print_json};
use crate::GlobalArgs;

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub manifest: PathBuf,
}

#[derive(Debug, Serialize)]
struct Summary {
    count: usize,
    min: Option<f64>,
    max: Option<f64>,
    mean: Option<f64>,
}

fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    Summary {
        count: n,
        min: values.iter().copied().reduce(f64::min),
        max: values.iter().copied().reduce(f64::max),
        mean: (n > 0).then(|| values.iter().sum::<f64>() / n as f64),
    }
}

pub fn run(_: &GlobalArgs, a: StatsArgs) -> Result<(), CliError> {
    let records = load_manifest(&a.manifest)?;
    let persons: Vec<_> = records.iter().flat_map(|r| &r.persons).collect();
    let mut per_image: BTreeMap<usize, usize> = BTreeMap::new();
    for r in &records {
        *per_image.entry(r.persons.len()).or_default() += 1;
    }
    let col = |f: &dyn Fn(&omnigaze::dataset::PersonAnnotation) -> f64| summarize(&persons.iter().map(|p| f(p)).collect::<Vec<_>>());
    print_json(&serde_json::json!({
        "images": records.len(),
        "persons": persons.len(),
        "persons_per_image": per_image,
        "head_yaw_deg": col(&|p| p.head_pose.yaw),
        "head_pitch_deg": col(&|p| p.head_pose.pitch),
        "head_roll_deg": col(&|p| p.head_pose.roll),
        "distance_cm": col(&|p| p.distance_cm),
        "face_width_px": col(&|p| p.bbox.w),
        "eyelid_closure": col(&|p| p.eyelid_closure),
        "missing_eye_landmarks": persons.iter().filter(|p| p.eye_landmarks.is_none()).count(),
        "with_confidence": persons.iter().filter(|p| p.confidence.is_some()).count(),
    }));
    Ok(())
}
