//! Write-then-rename file output: no partial files are ever visible at the
//! destination path.

use crate::error::CliError;
use std::path::Path;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let wrap = |source: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(wrap)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp_path, bytes).map_err(wrap)?;
    std::fs::rename(&tmp_path, path).map_err(wrap)
}
