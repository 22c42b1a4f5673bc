use std::path::PathBuf;

use clap::Subcommand;
use omnigaze::kernels::io::Bundle;
use omnigaze::kernels::{verify_bundle, VERIFY_TOLERANCE};
use serde_json::json;

use crate::error::{CliError, Exit};
use crate::output::{print_json, require_file, warn};
use crate::GlobalArgs;

#[derive(Debug, Subcommand)]
pub enum KernelsCommand {
    /// Re-run every check in a tensor bundle against its stored expected outputs
    Verify {
        /// JSON sidecar of the bundle
        bundle: PathBuf,
        #[arg(long, default_value_t = VERIFY_TOLERANCE)]
        tolerance: f64,
    },
}

pub fn run(_: &GlobalArgs, c: KernelsCommand) -> Result<(), CliError> {
    let KernelsCommand::Verify { bundle, tolerance } = c;
    if !(tolerance >= 0.0) {
        return Err(CliError::usage("--tolerance must be nonnegative"));
    }
    require_file(&bundle)?;
    let b = Bundle::load(&bundle)?;
    let report = verify_bundle(&b, tolerance);
    print_json(&report);
    if report.checks.is_empty() {
        warn("0 checks", json!({ "bundle": bundle.display().to_string() }));
    }
    let failed: Vec<String> = report.failures().map(|c| c.op.clone()).collect();
    if !failed.is_empty() {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        return Err(CliError::new(
            Exit::Verification,
            "verification_failed",
            format!("{} of {} checks failed: {}", failed.len(), report.checks.len(), failed.join(", ")),
        )
        .with_detail(json!({ "failed_ops": failed, "failed_checks": names })));
    }
    Ok(())
}
