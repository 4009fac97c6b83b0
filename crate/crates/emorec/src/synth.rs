//! Synthetic demo corpus.
//!
//! Four caricatured "emotion" archetypes with separated pitch ranges and
//! distinct amplitude-modulation patterns, enough to exercise the whole
//! pipeline without licensed speech data. Everything is seeded, so a given
//! (class, index, seed) triple always yields the same clip.

use std::f64::consts::PI;
use std::path::Path;

use emorec_core::audio::AudioClip;
use emorec_core::functionals::EmotionClass;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::wav::{write_wav, WavIoError};

const SAMPLE_RATE: u32 = 16000;

struct Profile {
    f0_lo: f64,
    f0_hi: f64,
    am_rate_hz: f64,
    am_depth: f64,
    amplitude: f64,
    // fraction of the start amplitude left by the end of the clip
    fade_to: f64,
}

fn profile(class: EmotionClass) -> Profile {
    match class {
        EmotionClass::Angry => Profile {
            f0_lo: 280.0,
            f0_hi: 300.0,
            am_rate_hz: 8.0,
            am_depth: 0.5,
            amplitude: 0.75,
            fade_to: 1.0,
        },
        EmotionClass::Happy => Profile {
            f0_lo: 220.0,
            f0_hi: 240.0,
            am_rate_hz: 3.0,
            am_depth: 0.4,
            amplitude: 0.55,
            fade_to: 1.0,
        },
        EmotionClass::Neutral => Profile {
            f0_lo: 160.0,
            f0_hi: 180.0,
            am_rate_hz: 0.0,
            am_depth: 0.0,
            amplitude: 0.4,
            fade_to: 1.0,
        },
        EmotionClass::Sad => Profile {
            f0_lo: 100.0,
            f0_hi: 120.0,
            am_rate_hz: 0.0,
            am_depth: 0.0,
            amplitude: 0.35,
            fade_to: 0.4,
        },
    }
}

/// One synthetic utterance of the given class.
pub fn synth_clip(class: EmotionClass, index: usize, seed: u64) -> AudioClip {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (class.index() as u64) << 32 ^ (index as u64) << 8);
    let p = profile(class);
    let f0 = rng.gen_range(p.f0_lo..p.f0_hi);
    let secs = rng.gen_range(0.9..1.3);
    let vibrato_depth = rng.gen_range(0.005..0.02);
    let noise = rng.gen_range(0.005..0.02);
    let n = (secs * SAMPLE_RATE as f64) as usize;

    let mut samples = Vec::with_capacity(n);
    let mut phase = 0.0f64;
    for i in 0..n {
        let t = i as f64 / SAMPLE_RATE as f64;
        let inst_f0 = f0 * (1.0 + vibrato_depth * (2.0 * PI * 5.0 * t).sin());
        phase += 2.0 * PI * inst_f0 / SAMPLE_RATE as f64;

        let am = if p.am_rate_hz > 0.0 {
            1.0 - p.am_depth / 2.0 + (p.am_depth / 2.0) * (2.0 * PI * p.am_rate_hz * t).sin()
        } else {
            1.0
        };
        let fade = 1.0 + (p.fade_to - 1.0) * t / secs;
        // fundamental plus a weak second harmonic for a little timbre
        let tone = phase.sin() + 0.3 * (2.0 * phase).sin();
        let s = p.amplitude * am * fade * tone / 1.3 + noise * rng.gen_range(-1.0..1.0);
        samples.push(s.clamp(-1.0, 1.0));
    }
    AudioClip::new(
        samples,
        SAMPLE_RATE,
        &format!("{}_{index:03}", class.name()),
    )
    .unwrap()
}

/// Write a class-per-directory corpus of `clips_per_class` files per class.
/// Returns the number of files written.
pub fn write_synth_corpus(
    dir: &Path,
    clips_per_class: usize,
    seed: u64,
) -> Result<usize, WavIoError> {
    let mut written = 0;
    for class in EmotionClass::ALL {
        let class_dir = dir.join(class.name());
        std::fs::create_dir_all(&class_dir).map_err(|source| WavIoError::Io {
            path: class_dir.clone(),
            source,
        })?;
        for index in 0..clips_per_class {
            let clip = synth_clip(class, index, seed);
            write_wav(
                &class_dir.join(format!("{}_{index:03}.wav", class.name())),
                &clip,
            )?;
            written += 1;
        }
    }
    Ok(written)
}
