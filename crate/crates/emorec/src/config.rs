//! Optional `key = value` run configuration.
//!
//! Values resolve in precedence order: command-line flag, then config file,
//! then built-in default. Keys match the long flag names with underscores.

use std::collections::BTreeMap;
use std::path::Path;

use crate::{FormatError, FORMAT_VERSION_LINE};

/// Keys the pipeline understands; anything else in a config file is a typo.
pub const KNOWN_KEYS: [&str; 15] = [
    "frame_ms",
    "hop_ms",
    "mel_filters",
    "fft_size",
    "preemphasis",
    "f0_min_hz",
    "f0_max_hz",
    "voicing_threshold",
    "target",
    "bins",
    "delta",
    "train_frac",
    "k",
    "c",
    "lr",
];

/// Extra keys accepted alongside [`KNOWN_KEYS`].
pub const KNOWN_KEYS_MORE: [&str; 3] = ["epochs", "prune_fraction", "seed"];

/// Parse a config file into a key/value map.
///
/// Lines are `key = value`; `#` starts a comment; blank lines are ignored.
/// An optional leading `#version=1` line is accepted for symmetry with the
/// other formats.
pub fn load_config_file(path: &Path) -> Result<BTreeMap<String, String>, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line == FORMAT_VERSION_LINE || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            FormatError::row(
                path,
                i + 1,
                format!("expected 'key = value', found '{line}'"),
            )
        })?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) && !KNOWN_KEYS_MORE.contains(&key.as_str()) {
            return Err(FormatError::row(
                path,
                i + 1,
                format!("unknown key '{key}'"),
            ));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Flag/file/default resolution for one run.
pub struct Overlay {
    file: BTreeMap<String, String>,
    source: Option<std::path::PathBuf>,
}

impl Overlay {
    /// Overlay with no config file: flags and defaults only.
    pub fn empty() -> Self {
        Self {
            file: BTreeMap::new(),
            source: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, FormatError> {
        Ok(Self {
            file: load_config_file(path)?,
            source: Some(path.to_path_buf()),
        })
    }

    fn file_value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, FormatError> {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                FormatError::schema(
                    self.source.as_deref().unwrap_or(Path::new("<config>")),
                    format!("bad value '{raw}' for '{key}'"),
                )
            }),
        }
    }

    pub fn get<T: std::str::FromStr + Copy>(
        &self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, FormatError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        Ok(self.file_value(key)?.unwrap_or(default))
    }
}
