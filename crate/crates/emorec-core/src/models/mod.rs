//! The four base classifiers and their shared plumbing.
//!
//! All models consume standardized rows of the selected features. Training
//! is deterministic: every stochastic step draws from a caller-seeded RNG,
//! and ties are broken by fixed orderings.

mod knn;
mod nn;
mod svm;
mod tree;

use alloc::vec::Vec;
use core::fmt;

use crate::functionals::EmotionClass;

pub use knn::{predict_knn, train_knn, KnnModel, DEFAULT_K, KNN_DISTANCE_EPSILON};
pub use nn::{
    predict_nn, train_nn, NnGradients, NnModel, DEFAULT_EPOCHS, DEFAULT_HIDDEN,
    DEFAULT_LEARNING_RATE,
};
pub use svm::{
    predict_svm, solve_pair, train_svm, PairSolution, SvmModel, SvmPair, DEFAULT_C,
    DEFAULT_SVM_TOL, MAX_PAIR_UPDATES,
};
pub use tree::{predict_tree, train_tree, TreeModel, TreeNode, DEFAULT_PRUNE_FRACTION};

/// Per-class scores from one classifier.
///
/// KNN, tree and NN scores are probability-like (nonnegative, summing to 1);
/// SVM scores are pair-vote counts with a fractional decision-magnitude
/// tie-break. `argmax` resolves remaining ties in class enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores {
    scores: [f64; EmotionClass::COUNT],
}

impl ClassScores {
    pub fn new(scores: [f64; EmotionClass::COUNT]) -> Self {
        debug_assert!(scores.iter().all(|s| s.is_finite()));
        Self { scores }
    }

    pub fn score(&self, class: EmotionClass) -> f64 {
        self.scores[class.index()]
    }

    pub fn scores(&self) -> &[f64; EmotionClass::COUNT] {
        &self.scores
    }

    /// Winning class; ties go to the earlier class in enumeration order.
    pub fn argmax(&self) -> EmotionClass {
        let mut best = EmotionClass::Angry;
        for class in EmotionClass::ALL {
            if self.scores[class.index()] > self.scores[best.index()] {
                best = class;
            }
        }
        best
    }
}

/// Per-feature z-score transform fitted on training rows only.
///
/// A feature with zero training variance maps to 0 for every row.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    means: Vec<f64>,
    stddevs: Vec<f64>,
}

// Standard deviations below this are treated as zero variance.
const STD_FLOOR: f64 = 1e-12;

impl Standardizer {
    pub fn from_parts(means: Vec<f64>, stddevs: Vec<f64>) -> Self {
        debug_assert_eq!(means.len(), stddevs.len());
        Self { means, stddevs }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stddevs(&self) -> &[f64] {
        &self.stddevs
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>, ModelError> {
        if row.len() != self.means.len() {
            return Err(ModelError::FeatureMismatch {
                expected: self.means.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.means.iter().zip(&self.stddevs))
            .map(|(&v, (&mean, &std))| {
                if std < STD_FLOOR {
                    0.0
                } else {
                    (v - mean) / std
                }
            })
            .collect())
    }
}

/// Fit a [`Standardizer`] with population statistics over the training rows.
pub fn fit_standardizer(rows: &[Vec<f64>]) -> Result<Standardizer, ModelError> {
    if rows.len() < 2 {
        return Err(ModelError::TooFewRows {
            needed: 2,
            got: rows.len(),
        });
    }
    let dim = rows[0].len();
    let n = rows.len() as f64;
    let mut means = alloc::vec![0.0; dim];
    for row in rows {
        debug_assert_eq!(row.len(), dim);
        for (m, &v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= n;
    }
    let mut stddevs = alloc::vec![0.0; dim];
    for row in rows {
        for (s, (&v, &m)) in stddevs.iter_mut().zip(row.iter().zip(&means)) {
            *s += (v - m) * (v - m);
        }
    }
    for s in stddevs.iter_mut() {
        *s = libm::sqrt(*s / n);
    }
    Ok(Standardizer::from_parts(means, stddevs))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    TooFewRows {
        needed: usize,
        got: usize,
    },
    TooFewClasses {
        found: usize,
    },
    KTooLarge {
        k: usize,
        rows: usize,
    },
    /// A one-vs-one pair with no rows on one side.
    DegeneratePair {
        pos: EmotionClass,
        neg: EmotionClass,
    },
    FeatureMismatch {
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::TooFewRows { needed, got } => {
                write!(f, "need at least {needed} training rows, got {got}")
            }
            ModelError::TooFewClasses { found } => {
                write!(f, "need at least 2 classes in training data, found {found}")
            }
            ModelError::KTooLarge { k, rows } => {
                write!(f, "k = {k} exceeds the {rows} training rows")
            }
            ModelError::DegeneratePair { pos, neg } => {
                write!(f, "class pair {pos}/{neg} has no rows on one side")
            }
            ModelError::FeatureMismatch { expected, got } => {
                write!(f, "row has {got} features, model expects {expected}")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// Check that every row matches the expected width.
fn check_rows(rows: &[Vec<f64>], labels: &[EmotionClass]) -> Result<usize, ModelError> {
    debug_assert_eq!(rows.len(), labels.len());
    if rows.is_empty() {
        return Err(ModelError::TooFewRows { needed: 1, got: 0 });
    }
    let dim = rows[0].len();
    for row in rows {
        if row.len() != dim {
            return Err(ModelError::FeatureMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }
    Ok(dim)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn standardizer_centers_and_scales() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let std = fit_standardizer(&rows).unwrap();
        let transformed: Vec<f64> = rows.iter().map(|r| std.apply(r).unwrap()[0]).collect();
        let mean: f64 = transformed.iter().sum::<f64>() / 3.0;
        let var: f64 = transformed
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / 3.0;
        assert!(mean.abs() < 1e-9);
        assert!((libm::sqrt(var) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let rows = vec![vec![4.0, 1.0], vec![4.0, 3.0], vec![4.0, 8.0]];
        let std = fit_standardizer(&rows).unwrap();
        for row in &rows {
            assert_eq!(std.apply(row).unwrap()[0], 0.0);
        }
        // the zero-variance guard applies to unseen values too
        assert_eq!(std.apply(&[99.0, 1.0]).unwrap()[0], 0.0);
    }

    #[test]
    fn unseen_row_uses_training_statistics() {
        let rows = vec![vec![0.0], vec![2.0]];
        let std = fit_standardizer(&rows).unwrap();
        // training mean 1, population std 1
        assert!((std.apply(&[5.0]).unwrap()[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn standardizer_needs_two_rows() {
        assert_eq!(
            fit_standardizer(&[vec![1.0]]),
            Err(ModelError::TooFewRows { needed: 2, got: 1 })
        );
    }

    #[test]
    fn argmax_breaks_ties_in_class_order() {
        let scores = ClassScores::new([0.25, 0.25, 0.25, 0.25]);
        assert_eq!(scores.argmax(), EmotionClass::Angry);
        let scores = ClassScores::new([0.1, 0.4, 0.4, 0.1]);
        assert_eq!(scores.argmax(), EmotionClass::Happy);
    }
}
