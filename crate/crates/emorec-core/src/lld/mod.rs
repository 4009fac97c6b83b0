//! Frame-level low-level descriptors.
//!
//! Each utterance is cut into overlapping frames and reduced to 16 per-frame
//! descriptors: RMS energy, MFCC 1-12, zero-crossing rate, voicing
//! probability from the autocorrelation, and fundamental frequency. The
//! utterance is then trimmed to its voiced span (first to last frame with
//! nonzero pitch) and first-order deltas of all 16 contours are appended,
//! giving the 32-contour [`LldMatrix`].

mod fft;
pub mod mfcc;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::audio::AudioClip;
pub use mfcc::{dct_basis, frame_mfcc, MFCC_COUNT};

/// Number of base descriptors per frame.
pub const LLD_COUNT: usize = 16;
/// Base descriptors plus their deltas.
pub const CONTOUR_COUNT: usize = 2 * LLD_COUNT;
/// Fewest trimmed frames an utterance may have.
pub const MIN_FRAMES: usize = 3;

/// Contour names in matrix order, used for feature-column naming.
#[rustfmt::skip]
pub const CONTOUR_NAMES: [&str; CONTOUR_COUNT] = [
    "energy", "mfcc1", "mfcc2", "mfcc3", "mfcc4", "mfcc5", "mfcc6", "mfcc7", "mfcc8",
    "mfcc9", "mfcc10", "mfcc11", "mfcc12", "zcr", "voiceprob", "f0",
    "d_energy", "d_mfcc1", "d_mfcc2", "d_mfcc3", "d_mfcc4", "d_mfcc5", "d_mfcc6", "d_mfcc7",
    "d_mfcc8", "d_mfcc9", "d_mfcc10", "d_mfcc11", "d_mfcc12", "d_zcr", "d_voiceprob", "d_f0",
];

/// Short-time analysis parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub mel_filters: usize,
    /// FFT size; `None` picks the next power of two at or above the frame length.
    pub fft_size: Option<usize>,
    pub preemphasis: f64,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    /// Normalized autocorrelation peak needed to call a frame voiced.
    pub voicing_threshold: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            frame_ms: 25.0,
            hop_ms: 10.0,
            mel_filters: 26,
            fft_size: None,
            preemphasis: 0.97,
            f0_min_hz: 50.0,
            f0_max_hz: 500.0,
            voicing_threshold: 0.55,
        }
    }
}

impl FrameConfig {
    /// Frame length in samples at the given rate.
    pub fn frame_len(&self, sample_rate_hz: u32) -> usize {
        libm::round(self.frame_ms * sample_rate_hz as f64 / 1000.0) as usize
    }

    /// Hop length in samples at the given rate.
    pub fn hop_len(&self, sample_rate_hz: u32) -> usize {
        libm::round(self.hop_ms * sample_rate_hz as f64 / 1000.0) as usize
    }

    pub(crate) fn effective_fft_size(&self, frame_len: usize) -> usize {
        self.fft_size
            .unwrap_or_else(|| frame_len.next_power_of_two())
    }

    pub fn validate(&self, sample_rate_hz: u32) -> Result<(), LldError> {
        if !(self.hop_ms > 0.0 && self.frame_ms > self.hop_ms) {
            return Err(LldError::InvalidConfig("need frame_ms > hop_ms > 0"));
        }
        if !(self.f0_min_hz > 0.0
            && self.f0_min_hz < self.f0_max_hz
            && self.f0_max_hz < sample_rate_hz as f64 / 2.0)
        {
            return Err(LldError::InvalidConfig(
                "need 0 < f0_min_hz < f0_max_hz < sample_rate/2",
            ));
        }
        if !(0.0..1.0).contains(&self.preemphasis) {
            return Err(LldError::InvalidConfig("preemphasis must be in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.voicing_threshold) {
            return Err(LldError::InvalidConfig(
                "voicing_threshold must be in [0, 1]",
            ));
        }
        if self.mel_filters <= MFCC_COUNT {
            return Err(LldError::InvalidConfig("mel_filters must exceed 12"));
        }
        if let Some(n) = self.fft_size {
            if !n.is_power_of_two() || n < self.frame_len(sample_rate_hz) {
                return Err(LldError::InvalidConfig(
                    "fft_size must be a power of two at least the frame length",
                ));
            }
        }
        Ok(())
    }
}

/// The 32 equal-length descriptor contours of one trimmed utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct LldMatrix {
    contours: Vec<Vec<f64>>,
    frame_count: usize,
}

impl LldMatrix {
    pub fn contour(&self, index: usize) -> &[f64] {
        &self.contours[index]
    }

    pub fn contours(&self) -> &[Vec<f64>] {
        &self.contours
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LldError {
    /// Fewer than [`MIN_FRAMES`] frames survive framing and voiced-span trimming.
    UtteranceTooShort {
        frames: usize,
    },
    /// No frame has nonzero pitch, so there is no voiced span to keep.
    AllUnvoiced,
    InvalidConfig(&'static str),
}

impl fmt::Display for LldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LldError::UtteranceTooShort { frames } => write!(
                f,
                "utterance too short: {frames} usable frames, need at least {MIN_FRAMES}"
            ),
            LldError::AllUnvoiced => write!(f, "utterance has no voiced frames"),
            LldError::InvalidConfig(what) => write!(f, "invalid frame config: {what}"),
        }
    }
}

impl core::error::Error for LldError {}

/// Cut the clip into full frames of `frame_ms` every `hop_ms`.
///
/// The trailing partial frame is dropped, so the frame count is
/// `1 + (len - frame_len) / hop_len` when the clip holds at least one frame.
pub fn frame_signal<'a>(
    clip: &'a AudioClip,
    cfg: &FrameConfig,
) -> Result<Vec<&'a [f64]>, LldError> {
    let len = cfg.frame_len(clip.sample_rate_hz());
    let hop = cfg.hop_len(clip.sample_rate_hz());
    let samples = clip.samples();
    if samples.len() < len {
        return Err(LldError::UtteranceTooShort { frames: 0 });
    }
    Ok((0..=(samples.len() - len) / hop)
        .map(|i| &samples[i * hop..i * hop + len])
        .collect())
}

/// Root-mean-square energy of a frame.
pub fn frame_energy(frame: &[f64]) -> f64 {
    debug_assert!(!frame.is_empty());
    let sum_sq: f64 = frame.iter().map(|s| s * s).sum();
    libm::sqrt(sum_sq / frame.len() as f64)
}

/// Zero-crossing rate: strict sign changes between consecutive samples over
/// `len - 1`, with zero treated as positive. Always in `[0, 1]`.
pub fn frame_zcr(frame: &[f64]) -> f64 {
    debug_assert!(frame.len() >= 2);
    let changes = frame
        .windows(2)
        .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
        .count();
    changes as f64 / (frame.len() - 1) as f64
}

/// Pitch and voicing probability of one frame.
///
/// The frame is mean-removed and autocorrelated; the candidate lag range is
/// `[rate/f0_max, rate/f0_min]`, clamped to the frame length minus one. The
/// best lag maximizes the raw autocorrelation (favoring the shortest period
/// on octave ties); the voicing probability is the lag-length-compensated
/// peak `r(t)*N / ((N-t)*r(0))` clamped to `[0, 1]`, so a sustained periodic
/// frame scores near 1. Pitch is `rate/t` when the probability reaches the
/// voicing threshold, otherwise 0.
pub fn frame_pitch(frame: &[f64], cfg: &FrameConfig, sample_rate_hz: u32) -> (f64, f64) {
    let n = frame.len();
    if n < 2 {
        return (0.0, 0.0);
    }
    let mean = frame.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = frame.iter().map(|s| s - mean).collect();

    let r0: f64 = x.iter().map(|v| v * v).sum();
    if r0 <= 0.0 {
        return (0.0, 0.0);
    }

    let rate = sample_rate_hz as f64;
    let lag_lo = (libm::ceil(rate / cfg.f0_max_hz) as usize).max(1);
    let lag_hi = (libm::floor(rate / cfg.f0_min_hz) as usize).min(n - 1);
    if lag_lo > lag_hi {
        return (0.0, 0.0);
    }

    let mut best_lag = lag_lo;
    let mut best_r = f64::NEG_INFINITY;
    for lag in lag_lo..=lag_hi {
        let r: f64 = x[..n - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
        if r > best_r {
            best_r = r;
            best_lag = lag;
        }
    }

    let voicing = (best_r * n as f64 / ((n - best_lag) as f64 * r0)).clamp(0.0, 1.0);
    let f0 = if voicing >= cfg.voicing_threshold {
        rate / best_lag as f64
    } else {
        0.0
    };
    (f0, voicing)
}

/// First-order delta with replicated boundaries:
/// `d[t] = (x[t+1] - x[t-1]) / 2`, same length as the input.
pub fn delta(contour: &[f64]) -> Vec<f64> {
    let t_max = contour.len();
    match t_max {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..t_max)
            .map(|t| {
                let next = contour[(t + 1).min(t_max - 1)];
                let prev = contour[t.saturating_sub(1)];
                (next - prev) / 2.0
            })
            .collect(),
    }
}

/// First and last frame (inclusive) with nonzero pitch.
pub fn voiced_span(f0_contour: &[f64]) -> Result<(usize, usize), LldError> {
    let first = f0_contour.iter().position(|&f| f > 0.0);
    let last = f0_contour.iter().rposition(|&f| f > 0.0);
    match (first, last) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(LldError::AllUnvoiced),
    }
}

/// Full per-utterance descriptor extraction.
///
/// Computes the 16 descriptors over all frames, trims every contour to the
/// voiced span of the F0 contour, then appends first-order deltas of the
/// trimmed contours. Deltas are computed after trimming so they never
/// straddle the trim boundary.
pub fn extract_lld(clip: &AudioClip, cfg: &FrameConfig) -> Result<LldMatrix, LldError> {
    cfg.validate(clip.sample_rate_hz())?;
    let frames = frame_signal(clip, cfg)?;
    let extractor = mfcc::MfccExtractor::new(cfg, clip.sample_rate_hz(), frames[0].len());

    let mut contours: Vec<Vec<f64>> = (0..LLD_COUNT)
        .map(|_| Vec::with_capacity(frames.len()))
        .collect();
    for frame in &frames {
        contours[0].push(frame_energy(frame));
        let ceps = extractor.frame_mfcc(frame);
        for (k, c) in ceps.iter().enumerate() {
            contours[1 + k].push(*c);
        }
        contours[13].push(frame_zcr(frame));
        let (f0, voicing) = frame_pitch(frame, cfg, clip.sample_rate_hz());
        contours[14].push(voicing);
        contours[15].push(f0);
    }

    let (first, last) = voiced_span(&contours[15])?;
    let span = last - first + 1;
    if span < MIN_FRAMES {
        return Err(LldError::UtteranceTooShort { frames: span });
    }

    let mut trimmed: Vec<Vec<f64>> = contours
        .into_iter()
        .map(|c| c[first..=last].to_vec())
        .collect();
    let deltas: Vec<Vec<f64>> = trimmed.iter().map(|c| delta(c)).collect();
    trimmed.extend(deltas);

    Ok(LldMatrix {
        contours: trimmed,
        frame_count: span,
    })
}
