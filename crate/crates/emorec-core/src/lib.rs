//! Speech emotion recognition core.
//!
//! Everything needed to go from a decoded waveform to an emotion decision:
//!
//! * [`audio`] — WAV decoding (byte-slice based) and the normalized mono clip type
//! * [`lld`] — frame-level low-level descriptors (energy, MFCC 1-12, zero-crossing
//!   rate, voicing probability, F0) plus first-order deltas, trimmed to the
//!   voiced span of the utterance
//! * [`functionals`] — 11 statistics per contour, collapsing the 32 contours
//!   into a fixed 352-value utterance descriptor
//! * [`selection`] — correlation-filter (symmetrical uncertainty) and Fisher-score
//!   rankings, intersected down to a small working feature set
//! * [`models`] — four classifiers trained from scratch: weighted KNN, a pruned
//!   CART tree, a sigmoid/softmax backprop network, and a one-vs-one soft-margin SVM
//! * [`ensemble`] — majority voting over the four classifiers, with an explicit
//!   no-decision outcome
//! * [`eval`] — stratified train/test splitting and confusion-matrix accounting
//!
//! The crate is `no_std` + `alloc`; float math goes through `libm` so results
//! are identical with or without the standard library. File IO, corpus layouts,
//! and the command-line interface live in the companion `emorec` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod audio;
pub mod ensemble;
pub mod eval;
pub mod functionals;
pub mod lld;
pub mod models;
pub mod selection;

pub use audio::{AudioClip, AudioError};
pub use ensemble::{majority_vote, EnsembleDecision, EnsembleModel, Votes};
pub use eval::{stratified_split, ConfusionMatrix, EvalError};
pub use functionals::{
    apply_functionals, build_feature_vector, feature_names, EmotionClass, FeatureVector,
    FEATURE_COUNT,
};
pub use lld::{extract_lld, FrameConfig, LldError, LldMatrix};
pub use models::{
    fit_standardizer, predict_knn, predict_nn, predict_svm, predict_tree, train_knn, train_nn,
    train_svm, train_tree, ClassScores, KnnModel, ModelError, NnModel, Standardizer, SvmModel,
    TreeModel,
};
pub use selection::{
    combine_rankings, discretize_equal_frequency, fcbf_rank, fisher_rank, symmetrical_uncertainty,
    DatasetError, LabeledDataset, SelectedFeatureSet, SelectionError,
};
