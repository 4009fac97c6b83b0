//! Majority voting over the four classifiers.
//!
//! A class wins when it holds a unique plurality of at least two of the four
//! votes. A 2-2 tie between two classes, or four distinct votes, yields the
//! explicit no-decision outcome rather than a guess.

use core::fmt;

use crate::functionals::{EmotionClass, FeatureVector};
use crate::models::{
    predict_knn, predict_nn, predict_svm, predict_tree, KnnModel, ModelError, NnModel,
    Standardizer, SvmModel, TreeModel,
};

/// One hard vote per classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Votes {
    pub knn: EmotionClass,
    pub tree: EmotionClass,
    pub nn: EmotionClass,
    pub svm: EmotionClass,
}

impl Votes {
    pub fn as_array(&self) -> [EmotionClass; 4] {
        [self.knn, self.tree, self.nn, self.svm]
    }
}

/// Outcome of the vote: a class, or no decision, plus the raw votes and the
/// size of the winning group (0 when undecided).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleDecision {
    pub outcome: Option<EmotionClass>,
    pub votes: Votes,
    pub agreement: usize,
}

impl fmt::Display for EnsembleDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.outcome {
            Some(class) => write!(f, "{class} ({} of 4 votes)", self.agreement),
            None => write!(f, "no-decision"),
        }
    }
}

/// Apply the majority rule to four votes.
///
/// Order-independent: only the per-class counts matter.
pub fn majority_vote(votes: Votes) -> EnsembleDecision {
    let mut counts = [0usize; EmotionClass::COUNT];
    for vote in votes.as_array() {
        counts[vote.index()] += 1;
    }
    let top = *counts.iter().max().expect("four classes");
    let winners = counts.iter().filter(|&&c| c == top).count();
    if top >= 2 && winners == 1 {
        let class = EmotionClass::ALL[counts.iter().position(|&c| c == top).expect("winner")];
        EnsembleDecision {
            outcome: Some(class),
            votes,
            agreement: top,
        }
    } else {
        EnsembleDecision {
            outcome: None,
            votes,
            agreement: 0,
        }
    }
}

/// The full trained stack: feature selection, standardizer, four models.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub selected: alloc::vec::Vec<usize>,
    pub standardizer: Standardizer,
    pub knn: KnnModel,
    pub tree: TreeModel,
    pub nn: NnModel,
    pub svm: SvmModel,
}

impl EnsembleModel {
    /// Select, standardize, run the four classifiers, and vote.
    pub fn predict(&self, vector: &FeatureVector) -> Result<EnsembleDecision, ModelError> {
        let values = vector.values();
        if let Some(&out_of_range) = self.selected.iter().find(|&&i| i >= values.len()) {
            return Err(ModelError::FeatureMismatch {
                expected: out_of_range + 1,
                got: values.len(),
            });
        }
        let selected: alloc::vec::Vec<f64> = self.selected.iter().map(|&i| values[i]).collect();
        let row = self.standardizer.apply(&selected)?;
        Ok(majority_vote(Votes {
            knn: predict_knn(&self.knn, &row)?.argmax(),
            tree: predict_tree(&self.tree, &row)?.argmax(),
            nn: predict_nn(&self.nn, &row)?.argmax(),
            svm: predict_svm(&self.svm, &row)?.argmax(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use EmotionClass::{Angry, Happy, Neutral, Sad};

    fn votes(a: EmotionClass, b: EmotionClass, c: EmotionClass, d: EmotionClass) -> Votes {
        Votes {
            knn: a,
            tree: b,
            nn: c,
            svm: d,
        }
    }

    #[test]
    fn plurality_of_two_decides() {
        let decision = majority_vote(votes(Angry, Angry, Happy, Neutral));
        assert_eq!(decision.outcome, Some(Angry));
        assert_eq!(decision.agreement, 2);
    }

    #[test]
    fn four_distinct_votes_decide_nothing() {
        let decision = majority_vote(votes(Angry, Happy, Neutral, Sad));
        assert_eq!(decision.outcome, None);
        assert_eq!(decision.agreement, 0);
    }

    #[test]
    fn two_two_tie_decides_nothing() {
        let decision = majority_vote(votes(Angry, Angry, Sad, Sad));
        assert_eq!(decision.outcome, None);
    }

    #[test]
    fn vote_order_is_irrelevant() {
        let all = [Angry, Happy, Neutral, Sad];
        for &a in &all {
            for &b in &all {
                for &c in &all {
                    for &d in &all {
                        let base = majority_vote(votes(a, b, c, d)).outcome;
                        // a few representative permutations
                        assert_eq!(base, majority_vote(votes(d, c, b, a)).outcome);
                        assert_eq!(base, majority_vote(votes(b, a, d, c)).outcome);
                        assert_eq!(base, majority_vote(votes(c, d, a, b)).outcome);
                    }
                }
            }
        }
    }

    /// Independent restatement of the rule: a class wins iff at least two
    /// classifiers output it and no other class matches its count.
    fn reference_rule(vs: [EmotionClass; 4]) -> Option<EmotionClass> {
        let mut winner = None;
        for class in EmotionClass::ALL {
            let own = vs.iter().filter(|&&v| v == class).count();
            if own < 2 {
                continue;
            }
            let beaten = EmotionClass::ALL
                .iter()
                .filter(|&&other| other != class)
                .all(|&other| vs.iter().filter(|&&v| v == other).count() < own);
            if beaten {
                winner = Some(class);
            }
        }
        winner
    }

    #[test]
    fn matches_reference_on_all_256_patterns() {
        let all = [Angry, Happy, Neutral, Sad];
        let mut decided = 0;
        for &a in &all {
            for &b in &all {
                for &c in &all {
                    for &d in &all {
                        let got = majority_vote(votes(a, b, c, d));
                        let want = reference_rule([a, b, c, d]);
                        assert_eq!(got.outcome, want, "votes {a} {b} {c} {d}");
                        // three or more agreeing votes always decide
                        let top = EmotionClass::ALL
                            .iter()
                            .map(|&k| [a, b, c, d].iter().filter(|&&v| v == k).count())
                            .max()
                            .unwrap();
                        if top >= 3 {
                            assert!(got.outcome.is_some());
                        }
                        match got.outcome {
                            Some(_) => {
                                assert_eq!(got.agreement, top);
                                decided += 1;
                            }
                            None => assert_eq!(got.agreement, 0),
                        }
                    }
                }
            }
        }
        // sanity: both outcomes occur
        assert!(decided > 0 && decided < 256);
    }
}
