use std::fmt;
use std::io;
use std::path::Path;

use omnigaze::dataset::DatasetError;
use omnigaze::kernels::KernelError;
use omnigaze::metrics::MetricsError;
use omnigaze::reproject::ReprojectError;
use serde_json::{json, Value};

/// Process exit status. The numeric values are a stable contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Usage = 1,
    MissingInput = 2,
    DataMismatch = 3,
    Verification = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub kind: &'static str,
    pub message: String,
    pub detail: Option<Value>,
}

impl CliError {
    pub fn new(exit: Exit, kind: &'static str, message: impl Into<String>) -> Self {
        Self { exit, kind, message: message.into(), detail: None }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(Exit::Usage, "usage", message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::new(Exit::DataMismatch, "data_mismatch", message)
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn io(path: &Path, err: io::Error) -> Self {
        let kind = if err.kind() == io::ErrorKind::NotFound { "missing_input" } else { "io" };
        Self::new(Exit::MissingInput, kind, format!("{}: {err}", path.display()))
            .with_detail(json!({ "path": path.display().to_string() }))
    }

    /// One-line JSON for stderr.
    pub fn to_json_line(&self) -> String {
        let mut v = json!({ "error": self.kind, "exit_code": self.exit as i32, "message": self.message });
        if let Some(Value::Object(extra)) = &self.detail {
            v.as_object_mut().unwrap().extend(extra.clone());
        }
        v.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ReprojectError> for CliError {
    fn from(e: ReprojectError) -> Self {
        match &e {
            ReprojectError::FaceImage { face, path, .. } => Self::new(Exit::MissingInput, "missing_input", e.to_string())
                .with_detail(json!({ "face": face.name(), "path": path.display().to_string() })),
            ReprojectError::Io(_) | ReprojectError::Image(_) => Self::new(Exit::MissingInput, "io", e.to_string()),
            ReprojectError::MissingFace(face) => Self::data(e.to_string()).with_detail(json!({ "face": face.name() })),
            _ => Self::data(e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(_) => Self::new(Exit::MissingInput, "io", e.to_string()),
            _ => Self::data(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match &e {
            MetricsError::ManifestMismatch { only_gt, only_pred } => {
                Self::data(e.to_string()).with_detail(json!({ "only_ground_truth": only_gt, "only_predictions": only_pred }))
            }
            MetricsError::InvalidThreshold { .. } | MetricsError::UnknownScheme(_) => Self::usage(e.to_string()),
            _ => Self::data(e.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Io { path, source } => Self::io(Path::new(&path), source),
            other => Self::data(other.to_string()),
        }
    }
}
