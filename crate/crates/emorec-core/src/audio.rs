//! Normalized mono audio and a minimal RIFF/WAVE codec.
//!
//! The decoder works on byte slices so it can run without the standard
//! library; the companion crate wraps it with file IO. Supported encodings
//! are 16-bit PCM and 32-bit IEEE float, one or two channels. Stereo is
//! averaged down to mono, 16-bit samples are scaled by 1/32768, and unknown
//! chunks are skipped. No resampling is performed.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Minimum accepted sample rate in Hz.
pub const MIN_SAMPLE_RATE_HZ: u32 = 8000;

/// A mono clip with samples normalized to `[-1, 1]`.
///
/// Immutable after construction; the constructor enforces the invariants
/// (non-empty, every `|sample| <= 1`, sample rate at least 8 kHz).
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate_hz: u32,
    source_id: String,
}

impl AudioClip {
    pub fn new(
        samples: Vec<f64>,
        sample_rate_hz: u32,
        source_id: &str,
    ) -> Result<Self, AudioError> {
        if samples.is_empty() {
            return Err(AudioError::EmptyAudio);
        }
        if sample_rate_hz < MIN_SAMPLE_RATE_HZ {
            return Err(AudioError::InvalidSampleRate(sample_rate_hz));
        }
        if let Some(index) = samples.iter().position(|s| s.abs() > 1.0 || s.is_nan()) {
            return Err(AudioError::SampleOutOfRange { index });
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            source_id: source_id.to_string(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Clip duration in seconds.
    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

/// Errors from WAV decoding or clip validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AudioError {
    /// Not a RIFF/WAVE stream, or a required chunk is missing/truncated.
    NotWav(&'static str),
    /// The `fmt ` chunk describes an encoding this decoder does not handle.
    UnsupportedEncoding {
        format_tag: u16,
        bits_per_sample: u16,
    },
    /// More than two channels.
    UnsupportedChannels(u16),
    /// The data chunk holds zero complete sample frames.
    EmptyAudio,
    /// Sample rate below [`MIN_SAMPLE_RATE_HZ`].
    InvalidSampleRate(u32),
    /// A sample outside `[-1, 1]` was passed to `AudioClip::new`.
    SampleOutOfRange { index: usize },
}

impl fmt::Display for AudioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AudioError::NotWav(what) => write!(f, "not a WAV file: {what}"),
            AudioError::UnsupportedEncoding {
                format_tag,
                bits_per_sample,
            } => write!(
                f,
                "unsupported encoding: format tag {format_tag}, {bits_per_sample} bits per sample \
                 (expected 16-bit PCM or 32-bit float)"
            ),
            AudioError::UnsupportedChannels(n) => {
                write!(f, "unsupported channel count {n} (expected 1 or 2)")
            }
            AudioError::EmptyAudio => write!(f, "audio contains no samples"),
            AudioError::InvalidSampleRate(rate) => {
                write!(
                    f,
                    "sample rate {rate} Hz below minimum {MIN_SAMPLE_RATE_HZ} Hz"
                )
            }
            AudioError::SampleOutOfRange { index } => {
                write!(f, "sample {index} outside [-1, 1]")
            }
        }
    }
}

impl core::error::Error for AudioError {}

struct FmtChunk {
    format_tag: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

/// Decode a RIFF/WAVE byte stream into a normalized mono clip.
///
/// Honors the `fmt ` and `data` chunks and skips everything else. Stereo
/// input is averaged to mono; 16-bit integers are scaled by 1/32768; float
/// samples are clamped to `[-1, 1]`. The sample rate is preserved.
pub fn decode_wav(bytes: &[u8], source_id: &str) -> Result<AudioClip, AudioError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" {
        return Err(AudioError::NotWav("missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(AudioError::NotWav("missing WAVE form type"));
    }

    let mut fmt_chunk: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut off = 12usize;
    while off + 8 <= bytes.len() {
        let id = &bytes[off..off + 4];
        let size = read_u32(bytes, off + 4) as usize;
        let body_start = off + 8;
        let body_end = body_start
            .checked_add(size)
            .ok_or(AudioError::NotWav("chunk size overflow"))?;
        if body_end > bytes.len() {
            return Err(AudioError::NotWav("truncated chunk"));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(AudioError::NotWav("fmt chunk too small"));
                }
                fmt_chunk = Some(FmtChunk {
                    format_tag: read_u16(body, 0),
                    channels: read_u16(body, 2),
                    sample_rate: read_u32(body, 4),
                    bits_per_sample: read_u16(body, 14),
                });
            }
            b"data" if data.is_none() => data = Some(body),
            _ => {} // unknown chunk, skip
        }
        // chunks are word-aligned: odd sizes carry one pad byte
        off = body_end + (size & 1);
    }

    let fmt_chunk = fmt_chunk.ok_or(AudioError::NotWav("missing fmt chunk"))?;
    let data = data.ok_or(AudioError::NotWav("missing data chunk"))?;

    if fmt_chunk.channels == 0 || fmt_chunk.channels > 2 {
        return Err(AudioError::UnsupportedChannels(fmt_chunk.channels));
    }
    let channels = fmt_chunk.channels as usize;

    let samples: Vec<f64> = match (fmt_chunk.format_tag, fmt_chunk.bits_per_sample) {
        // PCM 16-bit
        (1, 16) => {
            let frame_bytes = 2 * channels;
            let frames = data.len() / frame_bytes;
            (0..frames)
                .map(|i| {
                    let mut acc = 0.0;
                    for ch in 0..channels {
                        let v = read_i16(data, i * frame_bytes + 2 * ch);
                        acc += v as f64 / 32768.0;
                    }
                    acc / channels as f64
                })
                .collect()
        }
        // IEEE float 32-bit
        (3, 32) => {
            let frame_bytes = 4 * channels;
            let frames = data.len() / frame_bytes;
            (0..frames)
                .map(|i| {
                    let mut acc = 0.0;
                    for ch in 0..channels {
                        let v = f32::from_le_bytes(
                            data[i * frame_bytes + 4 * ch..i * frame_bytes + 4 * ch + 4]
                                .try_into()
                                .unwrap(),
                        );
                        acc += v as f64;
                    }
                    (acc / channels as f64).clamp(-1.0, 1.0)
                })
                .collect()
        }
        (format_tag, bits_per_sample) => {
            return Err(AudioError::UnsupportedEncoding {
                format_tag,
                bits_per_sample,
            })
        }
    };

    if samples.is_empty() {
        return Err(AudioError::EmptyAudio);
    }
    AudioClip::new(samples, fmt_chunk.sample_rate, source_id)
}

/// Encode a clip as a mono 16-bit PCM WAV byte stream.
///
/// Samples are quantized with `round(s * 32768)` clamped to the i16 range,
/// so a decode of the result reproduces each sample within 1/32768.
pub fn encode_wav_pcm16(clip: &AudioClip) -> Vec<u8> {
    let n = clip.samples().len();
    let data_len = 2 * n as u32;
    let mut out = Vec::with_capacity(44 + 2 * n);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&clip.sample_rate_hz().to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate_hz() * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in clip.samples() {
        let q = libm::round(s * 32768.0).clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

fn read_u16(bytes: &[u8], off: usize) -> u16 {
    u16::from_le_bytes([bytes[off], bytes[off + 1]])
}

fn read_i16(bytes: &[u8], off: usize) -> i16 {
    i16::from_le_bytes([bytes[off], bytes[off + 1]])
}

fn read_u32(bytes: &[u8], off: usize) -> u32 {
    u32::from_le_bytes([bytes[off], bytes[off + 1], bytes[off + 2], bytes[off + 3]])
}
