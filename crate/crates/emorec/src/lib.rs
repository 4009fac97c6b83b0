//! Speech emotion recognition toolkit around [`emorec_core`].
//!
//! This crate carries everything that touches the filesystem: WAV loading,
//! corpus directory layouts, the feature/selection/model file formats, run
//! configuration, report rendering, a synthetic demo-corpus generator, and
//! the `emorec` command-line pipeline built from them.

pub mod config;
pub mod corpus;
pub mod features_csv;
pub mod model_store;
pub mod pipeline;
pub mod report;
pub mod selection_file;
pub mod synth;
pub mod wav;

pub use config::{load_config_file, Overlay};
pub use corpus::{load_berlin, load_generic, LoadedCorpus};
pub use features_csv::{export_features, import_features};
pub use model_store::{load_models, save_models, RunMeta};
pub use selection_file::{read_selection, write_selection};
pub use wav::{load_wav, write_wav};

use std::path::PathBuf;

use emorec_core::selection::DatasetError;
use thiserror::Error;

/// Errors shared by the file formats and loaders in this crate.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: schema mismatch: {detail}", path.display())]
    SchemaMismatch { path: PathBuf, detail: String },
    #[error("{}: malformed row {row}: {detail}", path.display())]
    MalformedRow {
        path: PathBuf,
        row: usize,
        detail: String,
    },
    #[error("{}", path.display())]
    Dataset {
        path: PathBuf,
        #[source]
        source: DatasetError,
    },
}

impl FormatError {
    fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        FormatError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn schema(path: &std::path::Path, detail: impl Into<String>) -> Self {
        FormatError::SchemaMismatch {
            path: path.to_path_buf(),
            detail: detail.into(),
        }
    }

    fn row(path: &std::path::Path, row: usize, detail: impl Into<String>) -> Self {
        FormatError::MalformedRow {
            path: path.to_path_buf(),
            row,
            detail: detail.into(),
        }
    }
}

/// Version tag carried by every file format in this crate.
pub const FORMAT_VERSION_LINE: &str = "#version=1";
