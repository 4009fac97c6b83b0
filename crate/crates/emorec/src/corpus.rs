//! Corpus directory loaders.
//!
//! Two layouts are supported: the Berlin emotional-speech naming convention
//! (label encoded as the sixth character of the file stem) and a generic
//! layout with one subdirectory per class name. Both walk recursively, load
//! deterministically in path order, and skip problem files with a counted
//! reason instead of failing the whole load.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use emorec_core::audio::AudioClip;
use emorec_core::functionals::EmotionClass;
use thiserror::Error;
use walkdir::WalkDir;

use crate::wav::load_wav;

/// Clips plus an accounting of everything that was not loaded.
#[derive(Debug)]
pub struct LoadedCorpus {
    pub clips: Vec<(AudioClip, EmotionClass)>,
    /// Skip reason -> count, deterministic order.
    pub skipped: BTreeMap<String, usize>,
}

impl LoadedCorpus {
    pub fn skipped_total(&self) -> usize {
        self.skipped.values().sum()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}", dir.display())]
    Io {
        dir: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", dir.display())]
    Walk {
        dir: PathBuf,
        #[source]
        source: walkdir::Error,
    },
    #[error("{}: no usable WAV files found", dir.display())]
    EmptyDataset { dir: PathBuf },
}

/// Berlin-corpus emotion letters kept by this pipeline.
fn berlin_code(code: char) -> Option<EmotionClass> {
    match code {
        'W' => Some(EmotionClass::Angry), // Wut
        'F' => Some(EmotionClass::Happy), // Freude
        'N' => Some(EmotionClass::Neutral),
        'T' => Some(EmotionClass::Sad), // Trauer
        _ => None,
    }
}

// Letters of the corpus emotions outside the four target classes.
const BERLIN_SKIPPED_CODES: [char; 3] = ['L', 'E', 'A']; // boredom, disgust, fear

fn is_wav(path: &Path) -> bool {
    path.extension()
        .map(|e| e.eq_ignore_ascii_case("wav"))
        .unwrap_or(false)
}

fn sorted_wav_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|source| CorpusError::Walk {
            dir: dir.to_path_buf(),
            source,
        })?;
        if entry.file_type().is_file() && is_wav(entry.path()) {
            files.push(entry.path().to_path_buf());
        }
    }
    Ok(files)
}

fn skip(skipped: &mut BTreeMap<String, usize>, reason: impl Into<String>) {
    *skipped.entry(reason.into()).or_insert(0) += 1;
}

/// Load a directory in the Berlin naming convention.
///
/// Stems look like `03a01Wa`: two speaker digits, a three-character text
/// code, the emotion letter, and a version letter. Only the four target
/// emotions are kept; the corpus's other three are counted as skipped, as is
/// anything with an unrecognized name or an undecodable payload.
pub fn load_berlin(dir: &Path) -> Result<LoadedCorpus, CorpusError> {
    let mut clips = Vec::new();
    let mut skipped = BTreeMap::new();
    for path in sorted_wav_files(dir)? {
        let stem: Vec<char> = path
            .file_stem()
            .map(|s| s.to_string_lossy().chars().collect())
            .unwrap_or_default();
        if stem.len() != 7 {
            skip(&mut skipped, "unrecognized filename");
            continue;
        }
        let code = stem[5];
        match berlin_code(code) {
            Some(class) => match load_wav(&path) {
                Ok(clip) => clips.push((clip, class)),
                Err(err) => skip(&mut skipped, format!("undecodable: {err}")),
            },
            None if BERLIN_SKIPPED_CODES.contains(&code) => {
                skip(&mut skipped, format!("emotion code '{code}' out of scope"));
            }
            None => skip(&mut skipped, "unrecognized filename"),
        }
    }
    if clips.is_empty() {
        return Err(CorpusError::EmptyDataset {
            dir: dir.to_path_buf(),
        });
    }
    Ok(LoadedCorpus { clips, skipped })
}

/// Load a directory with one subdirectory per class name
/// (`angry/ happy/ neutral/ sad/`, case-insensitive), recursing into each.
pub fn load_generic(dir: &Path) -> Result<LoadedCorpus, CorpusError> {
    let mut clips = Vec::new();
    let mut skipped = BTreeMap::new();

    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| CorpusError::Io {
            dir: dir.to_path_buf(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();

    for entry in entries {
        if !entry.is_dir() {
            if is_wav(&entry) {
                skip(&mut skipped, "wav outside any class directory");
            }
            continue;
        }
        let dir_name = entry
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let Some(class) = EmotionClass::from_name(&dir_name) else {
            skip(
                &mut skipped,
                format!("unknown class directory '{dir_name}'"),
            );
            continue;
        };
        for path in sorted_wav_files(&entry)? {
            match load_wav(&path) {
                Ok(clip) => clips.push((clip, class)),
                Err(err) => skip(&mut skipped, format!("undecodable: {err}")),
            }
        }
    }
    if clips.is_empty() {
        return Err(CorpusError::EmptyDataset {
            dir: dir.to_path_buf(),
        });
    }
    Ok(LoadedCorpus { clips, skipped })
}
