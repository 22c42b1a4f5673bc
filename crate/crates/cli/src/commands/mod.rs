pub mod evaluate;
pub mod generate;
pub mod kernels;
pub mod remap;
pub mod render;
pub mod stats;
pub mod validate;
pub mod visualize;

use std::path::{Path, PathBuf};

/// `dir/stem<suffix>` next to `path`.
pub(crate) fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}
