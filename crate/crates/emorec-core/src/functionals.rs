//! Statistical functionals over descriptor contours.
//!
//! Each of the 32 contours is collapsed to 11 statistics, giving the fixed
//! 352-value utterance descriptor. The layout is row-major:
//! `index = contour_index * 11 + functional_index`, with functionals ordered
//! max, min, range, posmax, posmin, mean, slope, offset, stddev, skew, kurt.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::lld::{LldMatrix, CONTOUR_COUNT, CONTOUR_NAMES};

/// Functionals per contour.
pub const FUNCTIONAL_COUNT: usize = 11;
/// Total feature-vector width: 32 contours x 11 functionals.
pub const FEATURE_COUNT: usize = CONTOUR_COUNT * FUNCTIONAL_COUNT;

/// Functional names in output order.
pub const FUNCTIONAL_NAMES: [&str; FUNCTIONAL_COUNT] = [
    "max", "min", "range", "posmax", "posmin", "mean", "slope", "offset", "stddev", "skew", "kurt",
];

// Variance below this is treated as zero when normalizing moments.
const SIGMA_FLOOR: f64 = 1e-12;

/// The four emotion classes, in canonical (tie-breaking) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmotionClass {
    Angry,
    Happy,
    Neutral,
    Sad,
}

impl EmotionClass {
    pub const ALL: [EmotionClass; 4] = [
        EmotionClass::Angry,
        EmotionClass::Happy,
        EmotionClass::Neutral,
        EmotionClass::Sad,
    ];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            EmotionClass::Angry => "angry",
            EmotionClass::Happy => "happy",
            EmotionClass::Neutral => "neutral",
            EmotionClass::Sad => "sad",
        }
    }

    /// Case-insensitive parse of the class name.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for EmotionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fixed-layout 352-value utterance descriptor, optionally labeled.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    label: Option<EmotionClass>,
    source_id: String,
}

impl FeatureVector {
    /// Validates width and finiteness.
    pub fn new(values: Vec<f64>) -> Result<Self, FunctionalsError> {
        if values.len() != FEATURE_COUNT {
            return Err(FunctionalsError::WrongDimension { got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FunctionalsError::NonFinite { index });
        }
        Ok(Self {
            values,
            label: None,
            source_id: String::new(),
        })
    }

    pub fn with_label(mut self, label: EmotionClass) -> Self {
        self.label = Some(label);
        self
    }

    pub fn with_source_id(mut self, source_id: &str) -> Self {
        self.source_id = source_id.to_string();
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> Option<EmotionClass> {
        self.label
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Value at a (contour, functional) cell.
    pub fn at(&self, contour: usize, functional: usize) -> f64 {
        self.values[contour * FUNCTIONAL_COUNT + functional]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionalsError {
    /// Contour shorter than the three frames the statistics assume.
    ContourTooShort {
        len: usize,
    },
    WrongDimension {
        got: usize,
    },
    NonFinite {
        index: usize,
    },
}

impl fmt::Display for FunctionalsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalsError::ContourTooShort { len } => {
                write!(
                    f,
                    "contour of length {len} too short for functionals (need 3)"
                )
            }
            FunctionalsError::WrongDimension { got } => {
                write!(
                    f,
                    "feature vector has {got} values, expected {FEATURE_COUNT}"
                )
            }
            FunctionalsError::NonFinite { index } => {
                write!(f, "feature value {index} is not finite")
            }
        }
    }
}

impl core::error::Error for FunctionalsError {}

/// Collapse one contour to its 11 functionals.
///
/// Positions are 0-based indices of the first occurrence of the extreme.
/// Slope and offset are the least-squares line fit over t = 0..T-1. Moments
/// are population moments; skewness `m3/s^3` and kurtosis `m4/s^4`
/// (non-excess) are defined as 0 when the standard deviation vanishes.
pub fn apply_functionals(contour: &[f64]) -> Result<[f64; FUNCTIONAL_COUNT], FunctionalsError> {
    let t_len = contour.len();
    if t_len < 3 {
        return Err(FunctionalsError::ContourTooShort { len: t_len });
    }
    let tf = t_len as f64;

    let mut max = contour[0];
    let mut min = contour[0];
    let mut pos_max = 0usize;
    let mut pos_min = 0usize;
    for (t, &v) in contour.iter().enumerate() {
        if v > max {
            max = v;
            pos_max = t;
        }
        if v < min {
            min = v;
            pos_min = t;
        }
    }

    let mean = contour.iter().sum::<f64>() / tf;

    // least squares x[t] ~ slope*t + offset
    let t_mean = (tf - 1.0) / 2.0;
    let t_var_sum = tf * (tf * tf - 1.0) / 12.0;
    let cov_sum: f64 = contour
        .iter()
        .enumerate()
        .map(|(t, &v)| (t as f64 - t_mean) * (v - mean))
        .sum();
    let slope = cov_sum / t_var_sum;
    let offset = mean - slope * t_mean;

    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in contour {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= tf;
    m3 /= tf;
    m4 /= tf;
    let stddev = libm::sqrt(m2);
    let (skew, kurt) = if stddev < SIGMA_FLOOR {
        (0.0, 0.0)
    } else {
        (m3 / (m2 * stddev), m4 / (m2 * m2))
    };

    Ok([
        max,
        min,
        max - min,
        pos_max as f64,
        pos_min as f64,
        mean,
        slope,
        offset,
        stddev,
        skew,
        kurt,
    ])
}

/// Build the 352-value descriptor from an utterance's contour matrix.
pub fn build_feature_vector(lld: &LldMatrix) -> Result<FeatureVector, FunctionalsError> {
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    for contour in lld.contours() {
        values.extend_from_slice(&apply_functionals(contour)?);
    }
    FeatureVector::new(values)
}

/// The 352 feature column names, `<contour>_<functional>` in layout order.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(FEATURE_COUNT);
    for contour in CONTOUR_NAMES {
        for functional in FUNCTIONAL_NAMES {
            names.push(format!("{contour}_{functional}"));
        }
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::AudioClip;
    use crate::lld::{extract_lld, FrameConfig};
    use alloc::vec;

    #[test]
    fn hand_computed_case() {
        let got = apply_functionals(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let want = [
            4.0,
            1.0,
            3.0,
            3.0,
            0.0,
            2.5,
            1.0,
            1.0,
            1.118033988749895,
            0.0,
            1.64,
        ];
        for (i, (g, w)) in got.iter().zip(&want).enumerate() {
            assert!((g - w).abs() < 1e-9, "functional {i}: got {g} want {w}");
        }
    }

    #[test]
    fn constant_contour_degenerates_cleanly() {
        let c = 7.25;
        let got = apply_functionals(&[c, c, c]).unwrap();
        assert_eq!(got, [c, c, 0.0, 0.0, 0.0, c, 0.0, c, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn shift_moves_only_location_statistics() {
        let x = [0.4, -1.2, 3.3, 2.0, 0.1, -0.7];
        let k = 5.5;
        let shifted: Vec<f64> = x.iter().map(|v| v + k).collect();
        let a = apply_functionals(&x).unwrap();
        let b = apply_functionals(&shifted).unwrap();
        for i in [0, 1, 5, 7] {
            assert!((b[i] - (a[i] + k)).abs() < 1e-9, "functional {i}");
        }
        for i in [2, 3, 4, 6, 8, 9, 10] {
            assert!((b[i] - a[i]).abs() < 1e-9, "functional {i}");
        }
    }

    #[test]
    fn linear_contour_recovers_its_line() {
        let m = -2.25;
        let b = 4.0;
        let x: Vec<f64> = (0..20).map(|t| m * t as f64 + b).collect();
        let got = apply_functionals(&x).unwrap();
        assert!((got[6] - m).abs() < 1e-9);
        assert!((got[7] - b).abs() < 1e-9);
        // an exact line leaves no residual
        let residual_sq: f64 = x
            .iter()
            .enumerate()
            .map(|(t, &v)| {
                let fit = got[6] * t as f64 + got[7];
                (v - fit) * (v - fit)
            })
            .sum();
        assert!(libm::sqrt(residual_sq / x.len() as f64) < 1e-9);
    }

    #[test]
    fn first_occurrence_positions() {
        let got = apply_functionals(&[2.0, 9.0, 1.0, 9.0, 1.0]).unwrap();
        assert_eq!(got[3], 1.0);
        assert_eq!(got[4], 2.0);
    }

    #[test]
    fn short_contour_is_rejected() {
        assert_eq!(
            apply_functionals(&[1.0, 2.0]),
            Err(FunctionalsError::ContourTooShort { len: 2 })
        );
    }

    #[test]
    fn vector_layout_and_width() {
        let clip = AudioClip::new(
            (0..16000)
                .map(|i| libm::sin(2.0 * core::f64::consts::PI * 200.0 * i as f64 / 16000.0))
                .collect(),
            16000,
            "tone",
        )
        .unwrap();
        let lld = extract_lld(&clip, &FrameConfig::default()).unwrap();
        let vector = build_feature_vector(&lld).unwrap();
        assert_eq!(vector.values().len(), FEATURE_COUNT);
        assert!(vector.values().iter().all(|v| v.is_finite()));

        // f0 mean sits in the documented layout slot and tracks the tone
        let f0_mean = vector.at(15, 5);
        assert!((197.0..=203.0).contains(&f0_mean), "f0 mean {f0_mean}");

        // range = max - min in every block
        for contour in 0..CONTOUR_COUNT {
            let (max, min, range) = (
                vector.at(contour, 0),
                vector.at(contour, 1),
                vector.at(contour, 2),
            );
            assert!((range - (max - min)).abs() < 1e-9);
            assert!(min <= vector.at(contour, 5) && vector.at(contour, 5) <= max);
        }

        // identical input, identical vector
        let again = build_feature_vector(&lld).unwrap();
        assert_eq!(vector, again);
    }

    #[test]
    fn feature_names_follow_contract() {
        let names = feature_names();
        assert_eq!(names.len(), FEATURE_COUNT);
        assert_eq!(names[0], "energy_max");
        assert_eq!(names[10], "energy_kurt");
        assert_eq!(names[11], "mfcc1_max");
        assert_eq!(names[15 * 11 + 5], "f0_mean");
        assert_eq!(names[351], "d_f0_kurt");
    }

    #[test]
    fn vector_validation() {
        assert!(matches!(
            FeatureVector::new(vec![0.0; 10]),
            Err(FunctionalsError::WrongDimension { got: 10 })
        ));
        let mut values = vec![0.0; FEATURE_COUNT];
        values[7] = f64::INFINITY;
        assert_eq!(
            FeatureVector::new(values),
            Err(FunctionalsError::NonFinite { index: 7 })
        );
    }

    #[test]
    fn class_names_round_trip() {
        for class in EmotionClass::ALL {
            assert_eq!(EmotionClass::from_name(class.name()), Some(class));
            assert_eq!(EmotionClass::from_index(class.index()), Some(class));
        }
        assert_eq!(EmotionClass::from_name("ANGRY"), Some(EmotionClass::Angry));
        assert_eq!(EmotionClass::from_name("bored"), None);
    }
}
