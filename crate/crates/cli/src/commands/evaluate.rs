use std::path::PathBuf;

use clap::Args;
use omnigaze::metrics::{adjusted_gaze_error, evaluate, format_table, EvalConfig, EvalReport};
use serde_json::json;

use super::sibling;
use crate::error::CliError;
use crate::output::{load_manifest, print_json, require_file, write_atomic};
use crate::GlobalArgs;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub ground_truth: PathBuf,
    pub predictions: PathBuf,
    /// Further prediction manifests; enables the adjusted gaze error
    #[arg(long)]
    pub compare: Vec<PathBuf>,
    /// Report JSON path (default: `<predictions stem>.eval.json`)
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print the report JSON instead of the table
    #[arg(long)]
    pub json: bool,
}

pub fn run(g: &GlobalArgs, a: EvaluateArgs) -> Result<(), CliError> {
    for p in std::iter::once(&a.ground_truth).chain([&a.predictions]).chain(&a.compare) {
        require_file(p)?;
    }
    let config = EvalConfig { iou_threshold: g.iou, conf_threshold: g.conf, bins: g.bins.clone() };
    config.validate()?;

    let gt = load_manifest(&a.ground_truth)?;
    let mut report = evaluate(&gt, &load_manifest(&a.predictions)?, &config)?;
    let others = a
        .compare
        .iter()
        .map(|p| Ok(evaluate(&gt, &load_manifest(p)?, &config)?))
        .collect::<Result<Vec<EvalReport>, CliError>>()?;

    let mut adjusted = Vec::new();
    if !others.is_empty() {
        let methods: Vec<&[_]> = std::iter::once(report.pairs.as_slice()).chain(others.iter().map(|r| r.pairs.as_slice())).collect();
        adjusted = adjusted_gaze_error(&methods)?;
        report.adjusted_gaze_error_deg = Some(adjusted[0].mean_gaze_error_deg);
    }

    let names = std::iter::once(&a.predictions).chain(&a.compare).map(|p| p.display().to_string());
    let doc = json!({
        "ground_truth": a.ground_truth.display().to_string(),
        "predictions": a.predictions.display().to_string(),
        "iou_threshold": config.iou_threshold,
        "conf_threshold": config.conf_threshold,
        "report": report,
        "compared": others.iter().zip(names.clone().skip(1)).map(|(r, n)| json!({
            "predictions": n,
            "precision": r.precision,
            "recall": r.recall,
            "gaze_error_deg": r.gaze_error_deg,
        })).collect::<Vec<_>>(),
        "adjusted": names.zip(&adjusted).map(|(n, a)| json!({
            "predictions": n,
            "mean_gaze_error_deg": a.mean_gaze_error_deg,
            "faces": a.faces,
        })).collect::<Vec<_>>(),
    });
    let report_path = a.report.unwrap_or_else(|| sibling(&a.predictions, ".eval.json"));
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("report serializes");
    bytes.push(b'\n');
    write_atomic(&report_path, &bytes)?;
    if a.json {
        print_json(&doc);
    } else {
        print!("{}", format_table(&report));
    }
    Ok(())
}
