//! CART decision tree with reduced-error pruning.
//!
//! Growth picks the (feature, midpoint threshold) split with the largest
//! Gini impurity decrease, ties to the lower feature index then the lower
//! threshold, and stops on pure nodes, nodes too small to split, or nodes
//! with no distinct feature values left. Pruning replaces a subtree by a
//! leaf whenever that does not reduce accuracy on a stratified holdout
//! carved from the training rows.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_rows, ClassScores, ModelError};
use crate::functionals::EmotionClass;

/// Share of training rows held out for pruning.
pub const DEFAULT_PRUNE_FRACTION: f64 = 0.2;

/// A grown (and possibly pruned) tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    root: TreeNode,
    pruned: bool,
    dim: usize,
}

/// Tree structure; the left branch takes `value <= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        distribution: [f64; EmotionClass::COUNT],
    },
}

impl TreeModel {
    pub fn from_parts(root: TreeNode, pruned: bool, dim: usize) -> Self {
        Self { root, pruned, dim }
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn pruned(&self) -> bool {
        self.pruned
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn leaf_count(&self) -> usize {
        fn count(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Split { left, right, .. } => count(left) + count(right),
            }
        }
        count(&self.root)
    }
}

// Growth-time node keeping the class counts of its training rows so any
// subtree can later collapse into a leaf.
enum GrowNode {
    Split {
        feature: usize,
        threshold: f64,
        counts: [usize; EmotionClass::COUNT],
        left: Box<GrowNode>,
        right: Box<GrowNode>,
    },
    Leaf {
        counts: [usize; EmotionClass::COUNT],
    },
}

fn class_counts(labels: &[EmotionClass], ids: &[usize]) -> [usize; EmotionClass::COUNT] {
    let mut counts = [0usize; EmotionClass::COUNT];
    for &i in ids {
        counts[labels[i].index()] += 1;
    }
    counts
}

fn gini(counts: &[usize; EmotionClass::COUNT]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / nf;
            p * p
        })
        .sum::<f64>()
}

fn distribution(counts: &[usize; EmotionClass::COUNT]) -> [f64; EmotionClass::COUNT] {
    let n: usize = counts.iter().sum();
    debug_assert!(n > 0);
    let mut dist = [0.0; EmotionClass::COUNT];
    for (d, &c) in dist.iter_mut().zip(counts) {
        *d = c as f64 / n as f64;
    }
    dist
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

#[allow(clippy::needless_range_loop)]
fn find_best_split(rows: &[Vec<f64>], labels: &[EmotionClass], ids: &[usize]) -> Option<BestSplit> {
    let parent_counts = class_counts(labels, ids);
    let n = ids.len() as f64;
    let parent_gini = gini(&parent_counts);
    let mut best: Option<BestSplit> = None;

    for feature in 0..rows[0].len() {
        let mut order: Vec<usize> = ids.to_vec();
        order.sort_by(|&a, &b| {
            rows[a][feature]
                .total_cmp(&rows[b][feature])
                .then(a.cmp(&b))
        });

        let mut left_counts = [0usize; EmotionClass::COUNT];
        for pos in 0..order.len() - 1 {
            left_counts[labels[order[pos]].index()] += 1;
            let a = rows[order[pos]][feature];
            let b = rows[order[pos + 1]][feature];
            if a == b {
                continue; // no boundary between equal values
            }
            let threshold = a + (b - a) / 2.0;
            let mut right_counts = parent_counts;
            for (r, l) in right_counts.iter_mut().zip(&left_counts) {
                *r -= l;
            }
            let n_left = (pos + 1) as f64;
            let n_right = n - n_left;
            let decrease = parent_gini
                - (n_left / n) * gini(&left_counts)
                - (n_right / n) * gini(&right_counts);
            // strict improvement keeps the lowest feature/threshold on ties
            if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                best = Some(BestSplit {
                    feature,
                    threshold,
                    decrease,
                });
            }
        }
    }
    // an impure node splits even at zero decrease (children are strictly
    // smaller, so recursion still terminates); None only when every feature
    // is constant over the node
    best
}

fn grow(rows: &[Vec<f64>], labels: &[EmotionClass], ids: &[usize]) -> GrowNode {
    let counts = class_counts(labels, ids);
    let is_pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if is_pure || ids.len() < 2 {
        return GrowNode::Leaf { counts };
    }
    match find_best_split(rows, labels, ids) {
        None => GrowNode::Leaf { counts },
        Some(split) => {
            let (left_ids, right_ids): (Vec<usize>, Vec<usize>) = ids
                .iter()
                .partition(|&&i| rows[i][split.feature] <= split.threshold);
            GrowNode::Split {
                feature: split.feature,
                threshold: split.threshold,
                counts,
                left: Box::new(grow(rows, labels, &left_ids)),
                right: Box::new(grow(rows, labels, &right_ids)),
            }
        }
    }
}

fn grow_node_predict(node: &GrowNode, row: &[f64]) -> [usize; EmotionClass::COUNT] {
    match node {
        GrowNode::Leaf { counts } => *counts,
        GrowNode::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } => {
            if row[*feature] <= *threshold {
                grow_node_predict(left, row)
            } else {
                grow_node_predict(right, row)
            }
        }
    }
}

fn counts_argmax(counts: &[usize; EmotionClass::COUNT]) -> EmotionClass {
    let mut best = EmotionClass::Angry;
    for class in EmotionClass::ALL {
        if counts[class.index()] > counts[best.index()] {
            best = class;
        }
    }
    best
}

// Bottom-up reduced-error pruning. `holdout` carries the holdout rows routed
// to this node; returns the number of holdout errors the (pruned) subtree
// makes on them.
fn prune(
    node: &mut GrowNode,
    rows: &[Vec<f64>],
    labels: &[EmotionClass],
    holdout: &[usize],
) -> usize {
    let counts = match node {
        GrowNode::Leaf { counts } => *counts,
        GrowNode::Split { counts, .. } => *counts,
    };
    let leaf_class = counts_argmax(&counts);
    let errors_as_leaf = holdout.iter().filter(|&&i| labels[i] != leaf_class).count();

    let subtree_errors = match node {
        GrowNode::Leaf { .. } => return errors_as_leaf,
        GrowNode::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } => {
            let (left_ids, right_ids): (Vec<usize>, Vec<usize>) = holdout
                .iter()
                .partition(|&&i| rows[i][*feature] <= *threshold);
            prune(left, rows, labels, &left_ids) + prune(right, rows, labels, &right_ids)
        }
    };

    if errors_as_leaf <= subtree_errors {
        *node = GrowNode::Leaf { counts };
        errors_as_leaf
    } else {
        subtree_errors
    }
}

fn finalize(node: GrowNode) -> TreeNode {
    match node {
        GrowNode::Leaf { counts } => TreeNode::Leaf {
            distribution: distribution(&counts),
        },
        GrowNode::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } => TreeNode::Split {
            feature,
            threshold,
            left: Box::new(finalize(*left)),
            right: Box::new(finalize(*right)),
        },
    }
}

/// Grow a tree on most of the rows and reduce-error prune it against a
/// stratified `prune_fraction` holdout drawn with the given seed. With a
/// holdout too small to form (every class share floors to zero) the tree is
/// left unpruned.
pub fn train_tree(
    rows: &[Vec<f64>],
    labels: &[EmotionClass],
    prune_fraction: f64,
    seed: u64,
) -> Result<TreeModel, ModelError> {
    let dim = check_rows(rows, labels)?;
    if rows.len() < 4 {
        return Err(ModelError::TooFewRows {
            needed: 4,
            got: rows.len(),
        });
    }

    // stratified holdout: floor(fraction * n_c) rows per class
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holdout_ids: Vec<usize> = Vec::new();
    let mut grow_ids: Vec<usize> = Vec::new();
    for class in EmotionClass::ALL {
        let mut class_ids: Vec<usize> = (0..rows.len()).filter(|&i| labels[i] == class).collect();
        class_ids.shuffle(&mut rng);
        let take = (prune_fraction * class_ids.len() as f64) as usize;
        holdout_ids.extend_from_slice(&class_ids[..take]);
        grow_ids.extend_from_slice(&class_ids[take..]);
    }
    grow_ids.sort_unstable();
    holdout_ids.sort_unstable();

    let mut root = grow(rows, labels, &grow_ids);

    let mut pruned = false;
    if !holdout_ids.is_empty() {
        let before: usize = holdout_ids
            .iter()
            .filter(|&&i| counts_argmax(&grow_node_predict(&root, &rows[i])) != labels[i])
            .count();
        let after = prune(&mut root, rows, labels, &holdout_ids);
        debug_assert!(after <= before, "pruning increased holdout errors");
        pruned = true;
    }

    Ok(TreeModel::from_parts(finalize(root), pruned, dim))
}

/// Route the row to its leaf and return that leaf's class distribution.
pub fn predict_tree(model: &TreeModel, row: &[f64]) -> Result<ClassScores, ModelError> {
    if row.len() != model.dim {
        return Err(ModelError::FeatureMismatch {
            expected: model.dim,
            got: row.len(),
        });
    }
    let mut node = &model.root;
    loop {
        match node {
            TreeNode::Leaf { distribution } => return Ok(ClassScores::new(*distribution)),
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                node = if row[*feature] <= *threshold {
                    left
                } else {
                    right
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng;

    fn accuracy(model: &TreeModel, rows: &[Vec<f64>], labels: &[EmotionClass]) -> f64 {
        let correct = rows
            .iter()
            .zip(labels)
            .filter(|(row, &label)| predict_tree(model, row).unwrap().argmax() == label)
            .count();
        correct as f64 / rows.len() as f64
    }

    #[test]
    fn single_split_separates_linear_data() {
        let rows: Vec<Vec<f64>> = (-10..10).map(|x| vec![x as f64 + 0.5]).collect();
        let labels: Vec<EmotionClass> = (-10..10)
            .map(|x| {
                if x < 0 {
                    EmotionClass::Angry
                } else {
                    EmotionClass::Happy
                }
            })
            .collect();
        let model = train_tree(&rows, &labels, 0.0, 1).unwrap();
        assert_eq!(accuracy(&model, &rows, &labels), 1.0);
        assert_eq!(model.leaf_count(), 2);
        assert!(!model.pruned());
    }

    #[test]
    fn pure_class_makes_a_single_leaf() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let labels = vec![EmotionClass::Sad; 4];
        let model = train_tree(&rows, &labels, 0.0, 1).unwrap();
        assert_eq!(model.leaf_count(), 1);
        let scores = predict_tree(&model, &[2.5]).unwrap();
        assert_eq!(scores.score(EmotionClass::Sad), 1.0);
    }

    #[test]
    fn unpruned_tree_memorizes_conflict_free_data() {
        // random rows; duplicate feature vectors get duplicate labels
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for round in 0..10 {
            let n = rng.gen_range(4..40);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen_range(0..6) as f64, rng.gen_range(0..6) as f64])
                .collect();
            let labels: Vec<EmotionClass> = rows
                .iter()
                .map(|r| {
                    EmotionClass::from_index(((r[0] as usize * 7) ^ (r[1] as usize)) % 4).unwrap()
                })
                .collect();
            let model = train_tree(&rows, &labels, 0.0, round).unwrap();
            assert_eq!(accuracy(&model, &rows, &labels), 1.0, "round {round}");
        }
    }

    #[test]
    fn pruning_never_hurts_holdout_accuracy() {
        // noisy two-feature problem; the debug assertion inside train_tree
        // checks the monotonicity, this exercises it across seeds
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..120)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let labels: Vec<EmotionClass> = rows
            .iter()
            .map(|r| {
                let noisy = rng.gen_range(0.0..1.0) < 0.15;
                let base = if r[0] > 0.0 {
                    EmotionClass::Angry
                } else {
                    EmotionClass::Sad
                };
                if noisy {
                    EmotionClass::Neutral
                } else {
                    base
                }
            })
            .collect();
        for seed in 0..5 {
            let model = train_tree(&rows, &labels, DEFAULT_PRUNE_FRACTION, seed).unwrap();
            assert!(model.pruned());
            assert!(model.leaf_count() >= 1);
        }
    }

    #[test]
    fn scores_are_leaf_distributions() {
        let rows = vec![
            vec![0.0],
            vec![0.2],
            vec![0.4],
            vec![10.0],
            vec![10.2],
            vec![10.4],
        ];
        let labels = vec![
            EmotionClass::Angry,
            EmotionClass::Angry,
            EmotionClass::Happy,
            EmotionClass::Sad,
            EmotionClass::Sad,
            EmotionClass::Sad,
        ];
        // grow without pruning but stop early by mixing labels below the split
        let model = train_tree(&rows, &labels, 0.0, 9).unwrap();
        let scores = predict_tree(&model, &[0.1]).unwrap();
        let sum: f64 = scores.scores().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn determinism_across_identical_calls() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
            .collect();
        let labels: Vec<EmotionClass> = (0..40)
            .map(|i| EmotionClass::from_index(i % 4).unwrap())
            .collect();
        let a = train_tree(&rows, &labels, 0.25, 42).unwrap();
        let b = train_tree(&rows, &labels, 0.25, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_rows_is_an_error() {
        let rows = vec![vec![0.0]; 3];
        let labels = vec![EmotionClass::Angry; 3];
        assert_eq!(
            train_tree(&rows, &labels, 0.2, 1),
            Err(ModelError::TooFewRows { needed: 4, got: 3 })
        );
    }
}
