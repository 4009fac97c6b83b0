//! One-vs-one soft-margin SVM with a linear kernel.
//!
//! Each of the six class pairs is solved in the dual by sequential minimal
//! optimization: two multipliers at a time, keeping `sum(alpha * sign) = 0`,
//! until the largest KKT violation drops below the tolerance or the update
//! cap is reached. Working-pair choice is deterministic (largest error gap,
//! ties to the lower index), so training is reproducible. The stored
//! decision function uses the convention `f(x) = w.x - bias`.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_rows, dot, ClassScores, ModelError};
use crate::functionals::EmotionClass;

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_SVM_TOL: f64 = 1e-3;

/// Most pair updates one binary solve may spend.
pub const MAX_PAIR_UPDATES: usize = 100_000;

// Multipliers below this are not stored as support vectors.
const ALPHA_FLOOR: f64 = 1e-12;

/// Solution of one binary subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSolution {
    /// Rows with nonzero multipliers.
    pub support_rows: Vec<Vec<f64>>,
    /// `+1`/`-1` label of each support row.
    pub support_signs: Vec<f64>,
    /// Dual coefficients of the support rows, each in `[0, C]`.
    pub alphas: Vec<f64>,
    /// Primal normal vector.
    pub w: Vec<f64>,
    /// Decision offset: `f(x) = w.x - bias`.
    pub bias: f64,
    /// False when the update cap was hit before the KKT check passed.
    pub converged: bool,
}

impl PairSolution {
    pub fn decision(&self, row: &[f64]) -> f64 {
        dot(&self.w, row) - self.bias
    }

    /// `|sum(alpha * sign)|`, which optimality drives to zero.
    pub fn feasibility_gap(&self) -> f64 {
        self.alphas
            .iter()
            .zip(&self.support_signs)
            .map(|(a, s)| a * s)
            .sum::<f64>()
            .abs()
    }
}

/// A binary subproblem labeled with its class pair; `pos` is voted when the
/// decision value is nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmPair {
    pub pos: EmotionClass,
    pub neg: EmotionClass,
    pub solution: PairSolution,
}

/// All six one-vs-one subproblems.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pairs: Vec<SvmPair>,
    c: f64,
    dim: usize,
}

impl SvmModel {
    pub fn from_parts(pairs: Vec<SvmPair>, c: f64, dim: usize) -> Self {
        Self { pairs, c, dim }
    }

    pub fn pairs(&self) -> &[SvmPair] {
        &self.pairs
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when every pair passed its KKT check within the update cap.
    pub fn converged(&self) -> bool {
        self.pairs.iter().all(|p| p.solution.converged)
    }
}

/// Solve one binary soft-margin problem. `signs` holds `+1.0` or `-1.0` per row.
pub fn solve_pair(rows: &[Vec<f64>], signs: &[f64], c: f64, tol: f64) -> PairSolution {
    debug_assert_eq!(rows.len(), signs.len());
    debug_assert!(signs.iter().all(|&s| s == 1.0 || s == -1.0));
    let n = rows.len();
    let dim = rows[0].len();

    // Gram matrix of the linear kernel
    let gram: Vec<Vec<f64>> = rows
        .iter()
        .map(|a| rows.iter().map(|b| dot(a, b)).collect())
        .collect();

    let mut alphas = vec![0.0; n];
    let mut b = 0.0; // internal convention f(x) = w.x + b
                     // error cache: e[i] = f(x_i) - y_i
    let mut errors: Vec<f64> = signs.iter().map(|&y| -y).collect();

    let interior = |a: f64| a > ALPHA_FLOOR && a < c - ALPHA_FLOOR;

    let mut updates = 0usize;
    let mut converged = false;
    loop {
        let mut sweep_updates = 0usize;
        let mut sweep_violations = 0usize;
        for i in 0..n {
            // KKT residual r = y*f - 1 = y*e
            let r = signs[i] * errors[i];
            let violated =
                (alphas[i] < c - ALPHA_FLOOR && r < -tol) || (alphas[i] > ALPHA_FLOOR && r > tol);
            if !violated {
                continue;
            }
            sweep_violations += 1;

            // deterministic second choice: largest error gap first, then the rest
            let mut candidates: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            candidates.sort_by(|&a, &b| {
                (errors[i] - errors[b])
                    .abs()
                    .total_cmp(&(errors[i] - errors[a]).abs())
                    .then(a.cmp(&b))
            });
            for j in candidates {
                if try_update(i, j, &gram, signs, c, &mut alphas, &mut b, &mut errors) {
                    updates += 1;
                    sweep_updates += 1;
                    break;
                }
            }
            if updates >= MAX_PAIR_UPDATES {
                break;
            }
        }
        if sweep_violations == 0 {
            converged = true;
            break;
        }
        if updates >= MAX_PAIR_UPDATES || sweep_updates == 0 {
            // cap hit, or violations remain that no pair step can improve
            break;
        }
    }

    let mut w = vec![0.0; dim];
    for i in 0..n {
        if alphas[i] > ALPHA_FLOOR {
            for (wk, &xk) in w.iter_mut().zip(&rows[i]) {
                *wk += alphas[i] * signs[i] * xk;
            }
        }
    }

    // bias from margin support vectors, widening the fallback as needed
    let margin_ids: Vec<usize> = (0..n).filter(|&i| interior(alphas[i])).collect();
    let bias_ids: Vec<usize> = if margin_ids.is_empty() {
        (0..n).filter(|&i| alphas[i] > ALPHA_FLOOR).collect()
    } else {
        margin_ids
    };
    let b_internal = if bias_ids.is_empty() {
        b
    } else {
        bias_ids
            .iter()
            .map(|&i| signs[i] - dot(&w, &rows[i]))
            .sum::<f64>()
            / bias_ids.len() as f64
    };

    let mut support_rows = Vec::new();
    let mut support_signs = Vec::new();
    let mut support_alphas = Vec::new();
    for i in 0..n {
        if alphas[i] > ALPHA_FLOOR {
            support_rows.push(rows[i].clone());
            support_signs.push(signs[i]);
            support_alphas.push(alphas[i]);
        }
    }

    PairSolution {
        support_rows,
        support_signs,
        alphas: support_alphas,
        w,
        bias: -b_internal,
        converged,
    }
}

#[allow(clippy::too_many_arguments)]
fn try_update(
    i: usize,
    j: usize,
    gram: &[Vec<f64>],
    signs: &[f64],
    c: f64,
    alphas: &mut [f64],
    b: &mut f64,
    errors: &mut [f64],
) -> bool {
    let (y_i, y_j) = (signs[i], signs[j]);
    let (a_i_old, a_j_old) = (alphas[i], alphas[j]);

    // box segment the pair may move along while keeping sum(alpha*y) fixed
    let (low, high) = if y_i != y_j {
        ((a_j_old - a_i_old).max(0.0), (c + a_j_old - a_i_old).min(c))
    } else {
        ((a_i_old + a_j_old - c).max(0.0), (a_i_old + a_j_old).min(c))
    };
    if high - low < ALPHA_FLOOR {
        return false;
    }

    // second derivative along the segment; must be negative for a maximum
    let eta = 2.0 * gram[i][j] - gram[i][i] - gram[j][j];
    if eta >= -ALPHA_FLOOR {
        return false;
    }

    let a_j_new = (a_j_old - y_j * (errors[i] - errors[j]) / eta).clamp(low, high);
    let delta_j = a_j_new - a_j_old;
    if delta_j.abs() < ALPHA_FLOOR {
        return false;
    }
    let a_i_new = a_i_old + y_i * y_j * (a_j_old - a_j_new);
    let delta_i = a_i_new - a_i_old;

    let b1 = *b - errors[i] - y_i * delta_i * gram[i][i] - y_j * delta_j * gram[i][j];
    let b2 = *b - errors[j] - y_i * delta_i * gram[i][j] - y_j * delta_j * gram[j][j];
    let interior = |a: f64| a > ALPHA_FLOOR && a < c - ALPHA_FLOOR;
    let b_new = if interior(a_i_new) {
        b1
    } else if interior(a_j_new) {
        b2
    } else {
        (b1 + b2) / 2.0
    };
    let delta_b = b_new - *b;

    for k in 0..alphas.len() {
        errors[k] += y_i * delta_i * gram[i][k] + y_j * delta_j * gram[j][k] + delta_b;
    }
    alphas[i] = a_i_new;
    alphas[j] = a_j_new;
    *b = b_new;
    true
}

/// Train all six one-vs-one pairs. Every pair needs at least one row per
/// side; a pair with an absent class fails with [`ModelError::DegeneratePair`].
pub fn train_svm(
    rows: &[Vec<f64>],
    labels: &[EmotionClass],
    c: f64,
    tol: f64,
) -> Result<SvmModel, ModelError> {
    let dim = check_rows(rows, labels)?;
    let mut pairs = Vec::with_capacity(6);
    for (ai, pos) in EmotionClass::ALL.iter().enumerate() {
        for neg in EmotionClass::ALL.iter().skip(ai + 1) {
            let mut pair_rows = Vec::new();
            let mut pair_signs = Vec::new();
            for (row, &label) in rows.iter().zip(labels) {
                if label == *pos {
                    pair_rows.push(row.clone());
                    pair_signs.push(1.0);
                } else if label == *neg {
                    pair_rows.push(row.clone());
                    pair_signs.push(-1.0);
                }
            }
            if !pair_signs.contains(&1.0) || !pair_signs.contains(&-1.0) {
                return Err(ModelError::DegeneratePair {
                    pos: *pos,
                    neg: *neg,
                });
            }
            pairs.push(SvmPair {
                pos: *pos,
                neg: *neg,
                solution: solve_pair(&pair_rows, &pair_signs, c, tol),
            });
        }
    }
    Ok(SvmModel::from_parts(pairs, c, dim))
}

/// Pairwise votes as class scores.
///
/// Each pair votes by the sign of its decision value. The integer part of a
/// class score is its vote count; a fractional `s/(s+1)` term built from the
/// summed decision magnitudes of the class's pairs breaks vote ties without
/// ever reordering vote counts.
pub fn predict_svm(model: &SvmModel, row: &[f64]) -> Result<ClassScores, ModelError> {
    if row.len() != model.dim {
        return Err(ModelError::FeatureMismatch {
            expected: model.dim,
            got: row.len(),
        });
    }
    let mut votes = [0.0; EmotionClass::COUNT];
    let mut magnitude = [0.0; EmotionClass::COUNT];
    for pair in &model.pairs {
        let d = pair.solution.decision(row);
        let winner = if d >= 0.0 { pair.pos } else { pair.neg };
        votes[winner.index()] += 1.0;
        magnitude[pair.pos.index()] += d.abs();
        magnitude[pair.neg.index()] += d.abs();
    }
    let mut scores = [0.0; EmotionClass::COUNT];
    for k in 0..EmotionClass::COUNT {
        scores[k] = votes[k] + magnitude[k] / (magnitude[k] + 1.0);
    }
    Ok(ClassScores::new(scores))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_problem_recovers_analytic_plane() {
        // (0,0) negative, (2,2) positive: the separating plane is x+y = 2,
        // so w = (0.5, 0.5) and bias = 1 with both margins exactly 1
        let rows = vec![vec![0.0, 0.0], vec![2.0, 2.0]];
        let signs = vec![-1.0, 1.0];
        let solution = solve_pair(&rows, &signs, DEFAULT_C, DEFAULT_SVM_TOL);
        assert!(solution.converged);
        assert!((solution.w[0] - 0.5).abs() < 1e-3, "w0 = {}", solution.w[0]);
        assert!((solution.w[1] - 0.5).abs() < 1e-3);
        assert!(
            (solution.bias - 1.0).abs() < 1e-3,
            "bias = {}",
            solution.bias
        );
        for (row, &sign) in rows.iter().zip(&signs) {
            let margin = sign * solution.decision(row);
            assert!((margin - 1.0).abs() < 1e-3, "margin = {margin}");
        }
        // dual feasibility
        assert!(solution.feasibility_gap() <= 1e-6);
        assert!(solution
            .alphas
            .iter()
            .all(|&a| (0.0..=DEFAULT_C).contains(&a)));
    }

    fn four_class_blobs() -> (Vec<Vec<f64>>, Vec<EmotionClass>) {
        let centers = [(0.0, 0.0), (6.0, 0.0), (0.0, 6.0), (6.0, 6.0)];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (ci, &(cx, cy)) in centers.iter().enumerate() {
            for k in 0..6 {
                let dx = (k % 3) as f64 * 0.2 - 0.2;
                let dy = (k / 3) as f64 * 0.2 - 0.1;
                rows.push(vec![cx + dx, cy + dy]);
                labels.push(EmotionClass::from_index(ci).unwrap());
            }
        }
        (rows, labels)
    }

    #[test]
    fn separable_margins_hold_for_all_pairs() {
        let (rows, labels) = four_class_blobs();
        let model = train_svm(&rows, &labels, DEFAULT_C, DEFAULT_SVM_TOL).unwrap();
        assert!(model.converged());
        assert_eq!(model.pairs().len(), 6);
        for pair in model.pairs() {
            for (row, &sign) in pair
                .solution
                .support_rows
                .iter()
                .zip(&pair.solution.support_signs)
            {
                let margin = sign * pair.solution.decision(row);
                assert!(margin >= 1.0 - 1e-3, "margin {margin} below the boundary");
            }
            assert!(pair.solution.feasibility_gap() <= 1e-6);
            assert!(pair
                .solution
                .alphas
                .iter()
                .all(|&a| (0.0..=DEFAULT_C).contains(&a)));
        }
        // every training row classified correctly
        for (row, &label) in rows.iter().zip(&labels) {
            assert_eq!(predict_svm(&model, row).unwrap().argmax(), label);
        }
    }

    #[test]
    fn duplicating_rows_keeps_the_decision_function() {
        let (rows, labels) = four_class_blobs();
        let tight = 1e-8;
        let base = train_svm(&rows, &labels, DEFAULT_C, tight).unwrap();

        let mut doubled_rows = rows.clone();
        doubled_rows.extend(rows.iter().cloned());
        let mut doubled_labels = labels.clone();
        doubled_labels.extend(labels.iter().copied());
        let doubled = train_svm(&doubled_rows, &doubled_labels, DEFAULT_C, tight).unwrap();

        let probes = [
            vec![1.0, 1.0],
            vec![3.0, 3.0],
            vec![5.5, 0.5],
            vec![0.2, 5.8],
            vec![4.0, 2.0],
        ];
        for (pair_a, pair_b) in base.pairs().iter().zip(doubled.pairs()) {
            for probe in &probes {
                let da = pair_a.solution.decision(probe);
                let db = pair_b.solution.decision(probe);
                assert!(
                    (da - db).abs() < 1e-6,
                    "pair {}/{}: {da} vs {db}",
                    pair_a.pos,
                    pair_a.neg
                );
            }
        }
    }

    #[test]
    fn missing_class_is_a_degenerate_pair() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![
            EmotionClass::Angry,
            EmotionClass::Angry,
            EmotionClass::Happy,
            EmotionClass::Happy,
        ];
        assert_eq!(
            train_svm(&rows, &labels, 1.0, 1e-3),
            Err(ModelError::DegeneratePair {
                pos: EmotionClass::Angry,
                neg: EmotionClass::Neutral
            })
        );
    }

    #[test]
    fn training_is_deterministic() {
        let (rows, labels) = four_class_blobs();
        let a = train_svm(&rows, &labels, 1.0, 1e-3).unwrap();
        let b = train_svm(&rows, &labels, 1.0, 1e-3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vote_scores_keep_vote_order() {
        let (rows, labels) = four_class_blobs();
        let model = train_svm(&rows, &labels, 1.0, 1e-3).unwrap();
        let scores = predict_svm(&model, &[0.1, 0.1]).unwrap();
        // 3 wins for the home class; fractional part never crosses 1
        assert!(scores.score(EmotionClass::Angry) >= 3.0);
        assert!(scores.score(EmotionClass::Angry) < 4.0);
    }
}
