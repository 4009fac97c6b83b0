//! Path-level WAV helpers around the byte codec in the core crate.

use std::path::{Path, PathBuf};

use emorec_core::audio::{decode_wav, encode_wav_pcm16, AudioClip, AudioError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WavIoError {
    #[error("{}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", path.display())]
    Decode {
        path: PathBuf,
        #[source]
        source: AudioError,
    },
}

/// Read and decode a WAV file. The clip's source id is the file stem.
pub fn load_wav(path: &Path) -> Result<AudioClip, WavIoError> {
    let bytes = std::fs::read(path).map_err(|source| WavIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    decode_wav(&bytes, &stem).map_err(|source| WavIoError::Decode {
        path: path.to_path_buf(),
        source,
    })
}

/// Write a clip as mono 16-bit PCM.
pub fn write_wav(path: &Path, clip: &AudioClip) -> Result<(), WavIoError> {
    std::fs::write(path, encode_wav_pcm16(clip)).map_err(|source| WavIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_roundtrip_preserves_samples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tone.wav");
        let clip = AudioClip::new(
            (0..800)
                .map(|i| 0.4 * (2.0 * std::f64::consts::PI * 220.0 * i as f64 / 16000.0).sin())
                .collect(),
            16000,
            "tone",
        )
        .unwrap();
        write_wav(&path, &clip).unwrap();
        let loaded = load_wav(&path).unwrap();
        assert_eq!(loaded.source_id(), "tone");
        assert_eq!(loaded.samples().len(), 800);
        for (a, b) in loaded.samples().iter().zip(clip.samples()) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn missing_file_reports_the_path() {
        let err = load_wav(Path::new("/nonexistent/x.wav")).unwrap_err();
        assert!(err.to_string().contains("x.wav"));
    }

    #[test]
    fn non_wav_bytes_fail_to_decode() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("not.wav");
        std::fs::write(&path, b"definitely not audio").unwrap();
        assert!(matches!(
            load_wav(&path),
            Err(WavIoError::Decode {
                source: AudioError::NotWav(_),
                ..
            })
        ));
    }
}
