//! Three-layer backpropagation network.
//!
//! Logistic-sigmoid hidden layer, softmax output, cross-entropy loss,
//! plain per-sample stochastic gradient descent with a seeded shuffle each
//! epoch. Weight init is uniform in `(-1/sqrt(fan_in), 1/sqrt(fan_in))`;
//! biases start at zero.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_rows, ClassScores, ModelError};
use crate::functionals::EmotionClass;

pub const DEFAULT_HIDDEN: usize = 10;
pub const DEFAULT_LEARNING_RATE: f64 = 0.05;
pub const DEFAULT_EPOCHS: usize = 500;

const OUTPUTS: usize = EmotionClass::COUNT;

/// Weights and biases of the trained network.
#[derive(Debug, Clone, PartialEq)]
pub struct NnModel {
    // hidden x input
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    // output x hidden
    w2: Vec<Vec<f64>>,
    b2: Vec<f64>,
}

/// Gradients matching the [`NnModel`] layout, averaged over a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct NnGradients {
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

impl NnModel {
    pub fn from_parts(w1: Vec<Vec<f64>>, b1: Vec<f64>, w2: Vec<Vec<f64>>, b2: Vec<f64>) -> Self {
        Self { w1, b1, w2, b2 }
    }

    /// Fresh network with seeded uniform init.
    pub fn init(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound1 = 1.0 / libm::sqrt(inputs as f64);
        let w1 = (0..hidden)
            .map(|_| {
                (0..inputs)
                    .map(|_| rng.gen_range(-bound1..bound1))
                    .collect()
            })
            .collect();
        let bound2 = 1.0 / libm::sqrt(hidden as f64);
        let w2 = (0..OUTPUTS)
            .map(|_| {
                (0..hidden)
                    .map(|_| rng.gen_range(-bound2..bound2))
                    .collect()
            })
            .collect();
        Self {
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; OUTPUTS],
        }
    }

    pub fn inputs(&self) -> usize {
        self.w1[0].len()
    }

    pub fn hidden(&self) -> usize {
        self.w1.len()
    }

    /// `(w1, b1, w2, b2)` in the layout the store format writes.
    #[allow(clippy::type_complexity)]
    pub fn weights(&self) -> (&[Vec<f64>], &[f64], &[Vec<f64>], &[f64]) {
        (&self.w1, &self.b1, &self.w2, &self.b2)
    }

    fn hidden_activations(&self, row: &[f64]) -> Vec<f64> {
        self.w1
            .iter()
            .zip(&self.b1)
            .map(|(weights, &bias)| sigmoid(super::dot(weights, row) + bias))
            .collect()
    }

    fn logits(&self, hidden: &[f64]) -> [f64; OUTPUTS] {
        let mut z = [0.0; OUTPUTS];
        for (k, (weights, &bias)) in self.w2.iter().zip(&self.b2).enumerate() {
            z[k] = super::dot(weights, hidden) + bias;
        }
        z
    }

    /// Softmax class probabilities for one row.
    pub fn probabilities(&self, row: &[f64]) -> [f64; OUTPUTS] {
        softmax(&self.logits(&self.hidden_activations(row)))
    }

    /// Mean cross-entropy over the batch, computed via log-sum-exp so the
    /// finite-difference gradient check sees a smooth function.
    pub fn loss(&self, rows: &[Vec<f64>], labels: &[EmotionClass]) -> f64 {
        let total: f64 = rows
            .iter()
            .zip(labels)
            .map(|(row, &label)| {
                let z = self.logits(&self.hidden_activations(row));
                log_sum_exp(&z) - z[label.index()]
            })
            .sum();
        total / rows.len() as f64
    }

    /// Analytic gradients of [`NnModel::loss`] over the batch.
    #[allow(clippy::needless_range_loop)]
    pub fn gradients(&self, rows: &[Vec<f64>], labels: &[EmotionClass]) -> NnGradients {
        let inputs = self.inputs();
        let hidden = self.hidden();
        let mut grad = NnGradients {
            w1: vec![vec![0.0; inputs]; hidden],
            b1: vec![0.0; hidden],
            w2: vec![vec![0.0; hidden]; OUTPUTS],
            b2: vec![0.0; OUTPUTS],
        };
        let scale = 1.0 / rows.len() as f64;
        for (row, &label) in rows.iter().zip(labels) {
            let h = self.hidden_activations(row);
            let p = softmax(&self.logits(&h));

            // output delta: p - onehot(label)
            let mut delta_out = p;
            delta_out[label.index()] -= 1.0;

            for k in 0..OUTPUTS {
                let d = delta_out[k] * scale;
                grad.b2[k] += d;
                for j in 0..hidden {
                    grad.w2[k][j] += d * h[j];
                }
            }
            for j in 0..hidden {
                let back: f64 = (0..OUTPUTS).map(|k| delta_out[k] * self.w2[k][j]).sum();
                let d = back * h[j] * (1.0 - h[j]) * scale;
                grad.b1[j] += d;
                for i in 0..inputs {
                    grad.w1[j][i] += d * row[i];
                }
            }
        }
        grad
    }

    fn sgd_step(&mut self, row: &[f64], label: EmotionClass, lr: f64) {
        let sample = [row.to_vec()];
        let grad = self.gradients(&sample, &[label]);
        for (w_row, g_row) in self.w1.iter_mut().zip(&grad.w1) {
            for (w, g) in w_row.iter_mut().zip(g_row) {
                *w -= lr * g;
            }
        }
        for (b, g) in self.b1.iter_mut().zip(&grad.b1) {
            *b -= lr * g;
        }
        for (w_row, g_row) in self.w2.iter_mut().zip(&grad.w2) {
            for (w, g) in w_row.iter_mut().zip(g_row) {
                *w -= lr * g;
            }
        }
        for (b, g) in self.b2.iter_mut().zip(&grad.b2) {
            *b -= lr * g;
        }
    }
}

fn softmax(z: &[f64; OUTPUTS]) -> [f64; OUTPUTS] {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; OUTPUTS];
    let mut sum = 0.0;
    for k in 0..OUTPUTS {
        out[k] = libm::exp(z[k] - max);
        sum += out[k];
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
    out
}

fn log_sum_exp(z: &[f64; OUTPUTS]) -> f64 {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + libm::log(z.iter().map(|&v| libm::exp(v - max)).sum::<f64>())
}

/// Train with shuffled per-sample SGD. Deterministic for a given seed.
pub fn train_nn(
    rows: &[Vec<f64>],
    labels: &[EmotionClass],
    learning_rate: f64,
    epochs: usize,
    seed: u64,
) -> Result<NnModel, ModelError> {
    let dim = check_rows(rows, labels)?;
    let mut present = [false; OUTPUTS];
    for &label in labels {
        present[label.index()] = true;
    }
    let classes = present.iter().filter(|&&p| p).count();
    if classes < 2 {
        return Err(ModelError::TooFewClasses { found: classes });
    }

    let mut model = NnModel::init(dim, DEFAULT_HIDDEN, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            model.sgd_step(&rows[i], labels[i], learning_rate);
        }
    }
    Ok(model)
}

/// Softmax probabilities as class scores.
pub fn predict_nn(model: &NnModel, row: &[f64]) -> Result<ClassScores, ModelError> {
    if row.len() != model.inputs() {
        return Err(ModelError::FeatureMismatch {
            expected: model.inputs(),
            got: row.len(),
        });
    }
    Ok(ClassScores::new(model.probabilities(row)))
}
