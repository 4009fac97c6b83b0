//! Distance-weighted k-nearest-neighbor classifier.

use alloc::vec::Vec;

use super::{check_rows, euclidean, ClassScores, ModelError};
use crate::functionals::EmotionClass;

/// Neighborhood size that worked best in tuning.
pub const DEFAULT_K: usize = 10;
/// Guard added to distances before inverting, so exact matches dominate
/// without dividing by zero.
pub const KNN_DISTANCE_EPSILON: f64 = 1e-9;

/// Stored (standardized) training rows with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    rows: Vec<Vec<f64>>,
    labels: Vec<EmotionClass>,
    k: usize,
}

impl KnnModel {
    pub fn from_parts(rows: Vec<Vec<f64>>, labels: Vec<EmotionClass>, k: usize) -> Self {
        Self { rows, labels, k }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[EmotionClass] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }
}

/// Memorize the training rows. `k` must be between 1 and the row count.
pub fn train_knn(
    rows: &[Vec<f64>],
    labels: &[EmotionClass],
    k: usize,
) -> Result<KnnModel, ModelError> {
    check_rows(rows, labels)?;
    if k == 0 || k > rows.len() {
        return Err(ModelError::KTooLarge {
            k,
            rows: rows.len(),
        });
    }
    Ok(KnnModel::from_parts(rows.to_vec(), labels.to_vec(), k))
}

/// Inverse-distance-weighted vote over the k nearest training rows.
///
/// `score(class) = sum of 1/(d + eps) over neighbors of that class`,
/// normalized to sum to 1. Distance ties at the neighborhood boundary are
/// broken by training-row order.
pub fn predict_knn(model: &KnnModel, row: &[f64]) -> Result<ClassScores, ModelError> {
    if row.len() != model.dim() {
        return Err(ModelError::FeatureMismatch {
            expected: model.dim(),
            got: row.len(),
        });
    }
    let mut distances: Vec<(f64, usize)> = model
        .rows
        .iter()
        .enumerate()
        .map(|(i, train_row)| (euclidean(train_row, row), i))
        .collect();
    distances.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut scores = [0.0; EmotionClass::COUNT];
    let mut total = 0.0;
    for &(d, i) in distances.iter().take(model.k) {
        let w = 1.0 / (d + KNN_DISTANCE_EPSILON);
        scores[model.labels[i].index()] += w;
        total += w;
    }
    for s in scores.iter_mut() {
        *s /= total;
    }
    Ok(ClassScores::new(scores))
}
