//! Feature ranking and the combined selection rule.
//!
//! Two independent rankings are computed over the labeled feature matrix: a
//! fast correlation-based filter (symmetrical uncertainty against the class,
//! then redundancy removal) and the Fisher score. The final working set is
//! the smallest top-K intersection of the two rankings that reaches the
//! target size, trimmed by rank-sum.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::functionals::{EmotionClass, FeatureVector};

/// Default equal-frequency bin count for discretizing continuous features.
pub const DEFAULT_BINS: usize = 10;
/// Default class-relevance threshold for the correlation filter.
pub const DEFAULT_DELTA: f64 = 0.0;
/// Default size of the selected feature set.
pub const DEFAULT_TARGET: usize = 12;

// Guard added to the Fisher denominator.
const FISHER_GUARD: f64 = 1e-12;

/// Labeled feature vectors with consistent dimensionality.
///
/// Construction checks that every vector is labeled, all widths agree, at
/// least two classes are present, and every present class has at least two
/// rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    vectors: Vec<FeatureVector>,
}

impl LabeledDataset {
    pub fn new(vectors: Vec<FeatureVector>) -> Result<Self, DatasetError> {
        if vectors.is_empty() {
            return Err(DatasetError::Empty);
        }
        let dim = vectors[0].values().len();
        let mut counts = [0usize; EmotionClass::COUNT];
        for (row, vector) in vectors.iter().enumerate() {
            if vector.values().len() != dim {
                return Err(DatasetError::DimensionMismatch {
                    row,
                    got: vector.values().len(),
                    expected: dim,
                });
            }
            match vector.label() {
                Some(label) => counts[label.index()] += 1,
                None => return Err(DatasetError::MissingLabel { row }),
            }
        }
        let present = counts.iter().filter(|&&n| n > 0).count();
        if present < 2 {
            return Err(DatasetError::TooFewClasses { found: present });
        }
        for class in EmotionClass::ALL {
            let n = counts[class.index()];
            if n == 1 {
                return Err(DatasetError::TooFewRowsInClass { class, rows: n });
            }
        }
        Ok(Self { vectors })
    }

    pub fn vectors(&self) -> &[FeatureVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Width of every row.
    pub fn dim(&self) -> usize {
        self.vectors[0].values().len()
    }

    /// Rows per class, indexed by `EmotionClass::index`.
    pub fn class_counts(&self) -> [usize; EmotionClass::COUNT] {
        let mut counts = [0usize; EmotionClass::COUNT];
        for vector in &self.vectors {
            counts[vector.label().expect("validated at construction").index()] += 1;
        }
        counts
    }

    pub fn labels(&self) -> impl Iterator<Item = EmotionClass> + '_ {
        self.vectors
            .iter()
            .map(|v| v.label().expect("validated at construction"))
    }

    /// One feature column as an owned vector.
    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.vectors.iter().map(|v| v.values()[feature]).collect()
    }
}

/// The chosen feature subset plus the evidence behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedFeatureSet {
    /// Selected feature indices, best combined rank first.
    pub indices: Vec<usize>,
    /// Class-relevance SU of each selected feature.
    pub su_scores: BTreeMap<usize, f64>,
    /// Fisher score of each selected feature.
    pub fisher_scores: BTreeMap<usize, f64>,
    /// Full correlation-filter ranking the selection was drawn from.
    pub fcbf_ranking: Vec<(usize, f64)>,
    /// Full Fisher ranking the selection was drawn from.
    pub fisher_ranking: Vec<(usize, f64)>,
}

impl SelectedFeatureSet {
    /// Project a full feature row down to the selected columns.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| values[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetError {
    Empty,
    DimensionMismatch {
        row: usize,
        got: usize,
        expected: usize,
    },
    MissingLabel {
        row: usize,
    },
    TooFewClasses {
        found: usize,
    },
    TooFewRowsInClass {
        class: EmotionClass,
        rows: usize,
    },
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::Empty => write!(f, "dataset has no rows"),
            DatasetError::DimensionMismatch { row, got, expected } => {
                write!(f, "row {row} has {got} features, expected {expected}")
            }
            DatasetError::MissingLabel { row } => write!(f, "row {row} has no label"),
            DatasetError::TooFewClasses { found } => {
                write!(f, "need at least 2 classes, found {found}")
            }
            DatasetError::TooFewRowsInClass { class, rows } => {
                write!(f, "class {class} has {rows} row(s), need at least 2")
            }
        }
    }
}

impl core::error::Error for DatasetError {}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionError {
    LengthMismatch {
        left: usize,
        right: usize,
    },
    /// Fewer common features exist than requested; carries all that were found.
    Shortfall {
        target: usize,
        found: Box<SelectedFeatureSet>,
    },
}

impl fmt::Display for SelectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionError::LengthMismatch { left, right } => {
                write!(f, "column lengths differ: {left} vs {right}")
            }
            SelectionError::Shortfall { target, found } => write!(
                f,
                "only {} features ranked by both filters, target was {target}",
                found.indices.len()
            ),
        }
    }
}

impl core::error::Error for SelectionError {}

/// Equal-frequency discretization into at most `bins` ids.
///
/// Boundaries sit at the k/bins sample quantiles; a value equal to a
/// boundary goes to the lower bin, which keeps runs of ties in one bin.
pub fn discretize_equal_frequency(column: &[f64], bins: usize) -> Vec<usize> {
    debug_assert!(!column.is_empty());
    let n = column.len();
    let mut sorted = column.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let boundaries: Vec<f64> = (1..bins)
        .map(|k| sorted[(k * n / bins).max(1) - 1])
        .collect();
    column
        .iter()
        .map(|&v| boundaries.iter().filter(|&&b| b < v).count())
        .collect()
}

/// Symmetrical uncertainty between two discrete columns:
/// `2 * IG(X;Y) / (H(X) + H(Y))` with entropies in bits, 0 when both
/// entropies vanish. Symmetric, and always in `[0, 1]`.
pub fn symmetrical_uncertainty(x: &[usize], y: &[usize]) -> Result<f64, SelectionError> {
    if x.len() != y.len() {
        return Err(SelectionError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len() as f64;
    let mut x_counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut y_counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut joint_counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *x_counts.entry(a).or_insert(0) += 1;
        *y_counts.entry(b).or_insert(0) += 1;
        *joint_counts.entry((a, b)).or_insert(0) += 1;
    }
    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .map(|&c| {
                let p = c as f64 / n;
                -p * libm::log2(p)
            })
            .sum()
    };
    let h_x = entropy(&x_counts.values().copied().collect::<Vec<_>>());
    let h_y = entropy(&y_counts.values().copied().collect::<Vec<_>>());
    let h_xy = entropy(&joint_counts.values().copied().collect::<Vec<_>>());
    let denom = h_x + h_y;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    let gain = h_x + h_y - h_xy;
    Ok((2.0 * gain / denom).clamp(0.0, 1.0))
}

/// Correlation-filter ranking.
///
/// Every feature is discretized and scored by SU against the class labels.
/// Features at or below `delta` are dropped; the rest are sorted by class SU
/// (descending, ties to the lower index) and scanned in order, removing any
/// feature more strongly correlated with an already-kept feature than with
/// the class. Returns the survivors in rank order with their class SU.
pub fn fcbf_rank(data: &LabeledDataset, delta: f64, bins: usize) -> Vec<(usize, f64)> {
    let class_ids: Vec<usize> = data.labels().map(|c| c.index()).collect();
    let discretized: Vec<Vec<usize>> = (0..data.dim())
        .map(|j| discretize_equal_frequency(&data.column(j), bins))
        .collect();

    let mut ranked: Vec<(usize, f64)> = discretized
        .iter()
        .enumerate()
        .map(|(j, ids)| {
            (
                j,
                symmetrical_uncertainty(ids, &class_ids).expect("equal lengths"),
            )
        })
        .filter(|&(_, su)| su > delta)
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut kept: Vec<(usize, f64)> = Vec::new();
    'candidates: for (j, su_class) in ranked {
        for &(i, _) in &kept {
            let su_pair =
                symmetrical_uncertainty(&discretized[i], &discretized[j]).expect("equal lengths");
            if su_pair >= su_class {
                continue 'candidates; // redundant with a stronger kept feature
            }
        }
        kept.push((j, su_class));
    }
    kept
}

/// Fisher-score ranking, descending (ties to the lower index).
///
/// For feature j with per-class sizes `n_i`, per-class means `u_i` and
/// population variances `s_i^2`, and overall mean `u`:
/// `F(j) = sum n_i (u_i - u)^2 / (sum n_i s_i^2 + guard)`.
/// Invariant under affine maps of the feature column.
pub fn fisher_rank(data: &LabeledDataset) -> Vec<(usize, f64)> {
    let labels: Vec<usize> = data.labels().map(|c| c.index()).collect();
    let counts = data.class_counts();
    let mut scores: Vec<(usize, f64)> = (0..data.dim())
        .map(|j| {
            let column = data.column(j);
            let overall_mean = column.iter().sum::<f64>() / column.len() as f64;
            let mut class_mean = [0.0; EmotionClass::COUNT];
            for (&v, &c) in column.iter().zip(&labels) {
                class_mean[c] += v;
            }
            for c in 0..EmotionClass::COUNT {
                if counts[c] > 0 {
                    class_mean[c] /= counts[c] as f64;
                }
            }
            let mut class_var_sum = [0.0; EmotionClass::COUNT];
            for (&v, &c) in column.iter().zip(&labels) {
                let d = v - class_mean[c];
                class_var_sum[c] += d * d;
            }
            let mut numerator = 0.0;
            let mut denominator = FISHER_GUARD;
            for c in 0..EmotionClass::COUNT {
                if counts[c] > 0 {
                    let d = class_mean[c] - overall_mean;
                    numerator += counts[c] as f64 * d * d;
                    // n_i * population variance = sum of squared deviations
                    denominator += class_var_sum[c];
                }
            }
            (j, numerator / denominator)
        })
        .collect();
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scores
}

/// Intersect the two rankings down to `target` features.
///
/// K starts at `target` and grows: at each K the top-K prefixes of both
/// rankings (whole ranking once K passes its length) are intersected, and
/// the first K whose intersection reaches `target` wins. An oversized
/// intersection keeps the `target` members with the smallest rank sum, ties
/// to the lower feature index; the surviving order is by that same key. If
/// both rankings are exhausted first, the common features found so far are
/// returned inside [`SelectionError::Shortfall`].
pub fn combine_rankings(
    fcbf: &[(usize, f64)],
    fisher: &[(usize, f64)],
    target: usize,
) -> Result<SelectedFeatureSet, SelectionError> {
    let fcbf_rank_of: BTreeMap<usize, usize> =
        fcbf.iter().enumerate().map(|(r, &(j, _))| (j, r)).collect();
    let fisher_rank_of: BTreeMap<usize, usize> = fisher
        .iter()
        .enumerate()
        .map(|(r, &(j, _))| (j, r))
        .collect();

    let intersection_at = |k: usize| -> Vec<usize> {
        let top_fcbf: BTreeSet<usize> = fcbf[..k.min(fcbf.len())].iter().map(|&(j, _)| j).collect();
        fisher[..k.min(fisher.len())]
            .iter()
            .map(|&(j, _)| j)
            .filter(|j| top_fcbf.contains(j))
            .collect()
    };

    let k_max = fcbf.len().max(fisher.len());
    let mut common: Vec<usize> = Vec::new();
    let mut reached = false;
    for k in target..=k_max.max(target) {
        common = intersection_at(k);
        if common.len() >= target {
            reached = true;
            break;
        }
        if k >= k_max {
            break;
        }
    }

    // order by rank sum, ties to the lower feature index
    common.sort_by_key(|j| (fcbf_rank_of[j] + fisher_rank_of[j], *j));
    if reached {
        common.truncate(target);
    }

    let set = SelectedFeatureSet {
        su_scores: common
            .iter()
            .map(|&j| (j, fcbf[fcbf_rank_of[&j]].1))
            .collect(),
        fisher_scores: common
            .iter()
            .map(|&j| (j, fisher[fisher_rank_of[&j]].1))
            .collect(),
        indices: common,
        fcbf_ranking: fcbf.to_vec(),
        fisher_ranking: fisher.to_vec(),
    };
    if reached {
        Ok(set)
    } else {
        Err(SelectionError::Shortfall {
            target,
            found: Box::new(set),
        })
    }
}

/// Rank with both filters and combine, using the same dataset throughout.
pub fn select_features(
    data: &LabeledDataset,
    target: usize,
    delta: f64,
    bins: usize,
) -> Result<SelectedFeatureSet, SelectionError> {
    combine_rankings(&fcbf_rank(data, delta, bins), &fisher_rank(data), target)
}
