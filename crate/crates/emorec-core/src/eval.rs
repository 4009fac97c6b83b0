//! Stratified splitting and confusion-matrix accounting.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::functionals::EmotionClass;
use crate::selection::LabeledDataset;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    EmptyTestSet,
    /// A class has too few rows to give both sides of the split at least one.
    ClassTooSmall {
        class: EmotionClass,
        rows: usize,
    },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::EmptyTestSet => write!(f, "test set is empty"),
            EvalError::ClassTooSmall { class, rows } => {
                write!(
                    f,
                    "class {class} has {rows} row(s), need at least 2 to split"
                )
            }
        }
    }
}

impl core::error::Error for EvalError {}

/// Class-stratified train/test split over the dataset's row indices.
///
/// Per class, `floor(train_fraction * n)` rows go to the training side,
/// clamped so each side keeps at least one row; membership is drawn by a
/// seeded shuffle, so identical inputs produce identical partitions. The
/// returned index lists are sorted.
pub fn stratified_split(
    data: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    let labels: Vec<EmotionClass> = data.labels().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in EmotionClass::ALL {
        let mut ids: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if ids.is_empty() {
            continue;
        }
        if ids.len() < 2 {
            return Err(EvalError::ClassTooSmall {
                class,
                rows: ids.len(),
            });
        }
        ids.shuffle(&mut rng);
        let take = ((train_fraction * ids.len() as f64) as usize).clamp(1, ids.len() - 1);
        train.extend_from_slice(&ids[..take]);
        test.extend_from_slice(&ids[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Row-normalized confusion matrix with an explicit no-decision column.
///
/// Rows are true classes; the first four columns are predicted classes and
/// the fifth counts undecided outcomes. Percentages in each non-empty row
/// sum to 100.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: [[usize; EmotionClass::COUNT + 1]; EmotionClass::COUNT],
}

/// Column index of the no-decision cell.
pub const NO_DECISION_COLUMN: usize = EmotionClass::COUNT;

impl ConfusionMatrix {
    /// Tally `(true class, predicted class or no-decision)` pairs.
    pub fn from_predictions<I>(pairs: I) -> Result<Self, EvalError>
    where
        I: IntoIterator<Item = (EmotionClass, Option<EmotionClass>)>,
    {
        let mut counts = [[0usize; EmotionClass::COUNT + 1]; EmotionClass::COUNT];
        let mut total = 0usize;
        for (truth, prediction) in pairs {
            let column = prediction.map_or(NO_DECISION_COLUMN, |p| p.index());
            counts[truth.index()][column] += 1;
            total += 1;
        }
        if total == 0 {
            return Err(EvalError::EmptyTestSet);
        }
        Ok(Self { counts })
    }

    pub fn count(&self, truth: EmotionClass, column: usize) -> usize {
        self.counts[truth.index()][column]
    }

    pub fn row_total(&self, truth: EmotionClass) -> usize {
        self.counts[truth.index()].iter().sum()
    }

    pub fn total(&self) -> usize {
        EmotionClass::ALL.iter().map(|&c| self.row_total(c)).sum()
    }

    /// Row-normalized percentage for one cell; 0 for an empty row.
    pub fn percentage(&self, truth: EmotionClass, column: usize) -> f64 {
        let total = self.row_total(truth);
        if total == 0 {
            0.0
        } else {
            100.0 * self.counts[truth.index()][column] as f64 / total as f64
        }
    }

    /// Diagonal percentage of one class.
    pub fn per_class_accuracy(&self, class: EmotionClass) -> f64 {
        self.percentage(class, class.index())
    }

    /// Unweighted mean of per-class accuracies over classes with test rows.
    pub fn average_accuracy(&self) -> f64 {
        let present: Vec<EmotionClass> = EmotionClass::ALL
            .iter()
            .copied()
            .filter(|&c| self.row_total(c) > 0)
            .collect();
        if present.is_empty() {
            return 0.0;
        }
        present
            .iter()
            .map(|&c| self.per_class_accuracy(c))
            .sum::<f64>()
            / present.len() as f64
    }

    pub fn cant_decide_rate(&self, class: EmotionClass) -> f64 {
        self.percentage(class, NO_DECISION_COLUMN)
    }

    /// Undecided share of the whole test set, in percent.
    pub fn overall_cant_decide_rate(&self) -> f64 {
        let undecided: usize = EmotionClass::ALL
            .iter()
            .map(|&c| self.count(c, NO_DECISION_COLUMN))
            .sum();
        100.0 * undecided as f64 / self.total() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{FeatureVector, FEATURE_COUNT};
    use alloc::vec;

    fn dataset(per_class: [usize; 4]) -> LabeledDataset {
        let mut vectors = Vec::new();
        for class in EmotionClass::ALL {
            for i in 0..per_class[class.index()] {
                vectors.push(
                    FeatureVector::new(vec![i as f64; FEATURE_COUNT])
                        .unwrap()
                        .with_label(class),
                );
            }
        }
        LabeledDataset::new(vectors).unwrap()
    }

    #[test]
    fn split_counts_follow_the_fraction() {
        let data = dataset([70, 70, 70, 70]);
        let (train, test) = stratified_split(&data, 0.75, 42).unwrap();
        assert_eq!(train.len(), 4 * 52); // floor(0.75 * 70)
        assert_eq!(test.len(), 4 * 18);
        // disjoint and complete
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..280).collect::<Vec<_>>());
        // per-class counts
        let labels: Vec<EmotionClass> = data.labels().collect();
        for class in EmotionClass::ALL {
            let n = train.iter().filter(|&&i| labels[i] == class).count();
            assert_eq!(n, 52);
        }
    }

    #[test]
    fn tiny_class_splits_one_and_one() {
        let data = dataset([2, 2, 0, 0]);
        let (train, test) = stratified_split(&data, 0.5, 7).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(test.len(), 2);
    }

    #[test]
    fn same_seed_same_partition() {
        let data = dataset([10, 8, 6, 12]);
        let a = stratified_split(&data, 0.75, 99).unwrap();
        let b = stratified_split(&data, 0.75, 99).unwrap();
        assert_eq!(a, b);
        let c = stratified_split(&data, 0.75, 100).unwrap();
        assert_ne!(a, c, "different seeds should shuffle differently");
    }

    #[test]
    fn perfect_predictor_scores_100() {
        let pairs = EmotionClass::ALL
            .iter()
            .flat_map(|&c| (0..5).map(move |_| (c, Some(c))));
        let cm = ConfusionMatrix::from_predictions(pairs).unwrap();
        assert_eq!(cm.average_accuracy(), 100.0);
        assert_eq!(cm.overall_cant_decide_rate(), 0.0);
        for class in EmotionClass::ALL {
            assert_eq!(cm.per_class_accuracy(class), 100.0);
        }
    }

    #[test]
    fn constant_predictor_scores_25_on_balanced_data() {
        let pairs = EmotionClass::ALL
            .iter()
            .flat_map(|&c| (0..5).map(move |_| (c, Some(EmotionClass::Angry))));
        let cm = ConfusionMatrix::from_predictions(pairs).unwrap();
        assert_eq!(cm.average_accuracy(), 25.0);
    }

    #[test]
    fn rows_sum_to_100_with_no_decision_column() {
        let pairs = vec![
            (EmotionClass::Angry, Some(EmotionClass::Angry)),
            (EmotionClass::Angry, None),
            (EmotionClass::Angry, Some(EmotionClass::Sad)),
            (EmotionClass::Happy, Some(EmotionClass::Happy)),
            (EmotionClass::Happy, Some(EmotionClass::Happy)),
        ];
        let cm = ConfusionMatrix::from_predictions(pairs).unwrap();
        for class in [EmotionClass::Angry, EmotionClass::Happy] {
            let row_sum: f64 = (0..=NO_DECISION_COLUMN)
                .map(|col| cm.percentage(class, col))
                .sum();
            assert!((row_sum - 100.0).abs() < 1e-6);
        }
        assert_eq!(cm.total(), 5);
        assert!((cm.cant_decide_rate(EmotionClass::Angry) - 100.0 / 3.0).abs() < 1e-9);
        assert!((cm.overall_cant_decide_rate() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn empty_test_set_is_an_error() {
        let empty: Vec<(EmotionClass, Option<EmotionClass>)> = vec![];
        assert_eq!(
            ConfusionMatrix::from_predictions(empty),
            Err(EvalError::EmptyTestSet)
        );
    }
}
