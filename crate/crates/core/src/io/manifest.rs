use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Ordered list of frame files making up a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceManifest {
    pub entries: Vec<PathBuf>,
    pub base_dir: PathBuf,
}

/// One path per line; blank lines and `#` comments are ignored.
/// Relative paths resolve against `base_dir`.
pub fn read_manifest(text: &str, base_dir: &Path) -> Result<SequenceManifest> {
    let entries: Vec<PathBuf> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| base_dir.join(l))
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyManifest);
    }
    Ok(SequenceManifest { entries, base_dir: base_dir.to_path_buf() })
}
