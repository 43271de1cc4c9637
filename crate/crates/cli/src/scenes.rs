//! Directory mode: a directory whose subdirectories each hold one scene.

use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Subdirectories of `root` containing `file`, sorted by name.
pub fn scene_dirs(root: &Path, file: &str) -> Result<Vec<(String, PathBuf)>, CliError> {
    let entries = std::fs::read_dir(root).map_err(|e| CliError::io(root, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(root, e))?;
        let path = entry.path();
        if path.is_dir() && path.join(file).is_file() {
            out.push((entry.file_name().to_string_lossy().into_owned(), path));
        }
    }
    if out.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no scene subdirectories containing {file}",
            root.display()
        )));
    }
    out.sort();
    Ok(out)
}
