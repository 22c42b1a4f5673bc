use std::path::PathBuf;

use clap::Args;
use omnigaze::dataset::{generate_record, write_manifest, FaceRig, SceneConfig};
use rayon::prelude::*;
use serde_json::json;

use crate::error::CliError;
use crate::output::{load_camera, print_json, write_atomic};
use crate::GlobalArgs;

pub const MANIFEST_NAME: &str = "manifest.jsonl";

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub out_dir: PathBuf,
    /// Number of images
    #[arg(long, short = 'n', default_value_t = 100)]
    pub count: u64,
}

pub fn run(g: &GlobalArgs, a: GenerateArgs) -> Result<(), CliError> {
    let camera = load_camera(g.camera.as_deref())?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    let rig = FaceRig::default();
    let config = SceneConfig::default();
    let records = (0..a.count)
        .into_par_iter()
        .map(|i| generate_record(g.seed, i, &camera, &rig, &config))
        .collect::<Result<Vec<_>, _>>()?;
    let mut buf = Vec::new();
    write_manifest(&mut buf, &records)?;
    let path = a.out_dir.join(MANIFEST_NAME);
    write_atomic(&path, &buf)?;
    print_json(&json!({
        "manifest": path.display().to_string(),
        "seed": g.seed,
        "images": records.len(),
        "persons": records.iter().map(|r| r.persons.len()).sum::<usize>(),
    }));
    Ok(())
}
