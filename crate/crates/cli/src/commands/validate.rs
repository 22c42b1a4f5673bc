use std::io::{BufRead, BufReader};
use std::path::PathBuf;

use clap::Args;
use omnigaze::dataset::SampleRecord;
use omnigaze::dataset::validate_record;
use serde_json::json;

use crate::error::{CliError, Exit};
use crate::output::print_json;
use crate::GlobalArgs;

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub manifest: PathBuf,
}

/// Prints one JSON line per non-compliant record, then a summary line.
pub fn run(_: &GlobalArgs, a: ValidateArgs) -> Result<(), CliError> {
    let file = std::fs::File::open(&a.manifest).map_err(|e| CliError::io(&a.manifest, e))?;
    let (mut records, mut bad_records, mut violations, mut parse_errors) = (0usize, 0usize, 0usize, 0usize);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(&a.manifest, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records += 1;
        match SampleRecord::from_json_line(&line) {
            Err(e) => {
                parse_errors += 1;
                print_json(&json!({ "line": i + 1, "parse_error": e.to_string() }));
            }
            Ok(r) => {
                let v = validate_record(&r);
                if !v.is_empty() {
                    bad_records += 1;
                    violations += v.len();
                    print_json(&json!({ "line": i + 1, "image": r.image, "violations": v }));
                }
            }
        }
    }
    let summary = json!({
        "records": records,
        "non_compliant_records": bad_records,
        "violations": violations,
        "parse_errors": parse_errors,
    });
    print_json(&json!({ "summary": summary }));
    if violations + parse_errors > 0 {
        return Err(CliError::new(Exit::DataMismatch, "validation_failed", format!("{} of {records} records failed validation", bad_records + parse_errors))
            .with_detail(summary));
    }
    Ok(())
}
