//! End-to-end pipeline stages behind the CLI subcommands.
//!
//! Extraction fans out per file; everything downstream is single-threaded
//! per run, so a full pipeline with a fixed seed is reproducible down to the
//! bytes of every artifact it writes.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use emorec_core::audio::AudioClip;
use emorec_core::ensemble::{majority_vote, EnsembleDecision, EnsembleModel, Votes};
use emorec_core::eval::{stratified_split, ConfusionMatrix};
use emorec_core::functionals::{build_feature_vector, feature_names, EmotionClass, FeatureVector};
use emorec_core::lld::{extract_lld, FrameConfig};
use emorec_core::models::{
    fit_standardizer, predict_knn, predict_nn, predict_svm, predict_tree, train_knn, train_nn,
    train_svm, train_tree,
};
use emorec_core::selection::{
    combine_rankings, fcbf_rank, fisher_rank, LabeledDataset, SelectionError,
};
use rayon::prelude::*;

use crate::corpus::{load_berlin, load_generic, LoadedCorpus};
use crate::features_csv::{export_features, import_features};
use crate::model_store::{load_models, save_models, RunMeta};
use crate::report::{cross_dataset_average, render_csv, render_text, EvalReport};
use crate::selection_file::{read_selection, write_selection};
use crate::synth::write_synth_corpus;
use crate::wav::load_wav;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Berlin,
    Generic,
}

/// Extract feature vectors from labeled clips, one worker per clip.
/// Clips the extractor rejects (all-unvoiced, too short) are returned as
/// `(source_id, reason)` instead of failing the run.
pub fn extract_vectors(
    clips: &[(AudioClip, EmotionClass)],
    cfg: &FrameConfig,
) -> (Vec<FeatureVector>, Vec<(String, String)>) {
    let results: Vec<Result<FeatureVector, (String, String)>> = clips
        .par_iter()
        .map(|(clip, label)| {
            extract_lld(clip, cfg)
                .map_err(|e| e.to_string())
                .and_then(|lld| build_feature_vector(&lld).map_err(|e| e.to_string()))
                .map(|v| v.with_label(*label).with_source_id(clip.source_id()))
                .map_err(|reason| (clip.source_id().to_string(), reason))
        })
        .collect();

    let mut vectors = Vec::new();
    let mut skipped = Vec::new();
    for result in results {
        match result {
            Ok(v) => vectors.push(v),
            Err(pair) => skipped.push(pair),
        }
    }
    (vectors, skipped)
}

fn print_skips(skipped: &[(String, String)]) {
    for (id, reason) in skipped {
        eprintln!("warning: skipped '{id}': {reason}");
    }
}

pub fn run_extract(input: &Path, layout: Layout, out: &Path, cfg: &FrameConfig) -> Result<()> {
    let corpus: LoadedCorpus = match layout {
        Layout::Berlin => load_berlin(input)?,
        Layout::Generic => load_generic(input)?,
    };
    for (reason, count) in &corpus.skipped {
        eprintln!("warning: {count} file(s) skipped: {reason}");
    }

    let (vectors, skipped) = extract_vectors(&corpus.clips, cfg);
    print_skips(&skipped);
    if vectors.is_empty() {
        bail!("no utterance survived feature extraction");
    }
    export_features(out, &vectors, cfg)?;

    let mut counts = [0usize; EmotionClass::COUNT];
    for v in &vectors {
        counts[v.label().expect("labeled by extraction").index()] += 1;
    }
    println!(
        "extracted {} utterances ({}) -> {}",
        vectors.len(),
        EmotionClass::ALL
            .iter()
            .map(|c| format!("{c}: {}", counts[c.index()]))
            .collect::<Vec<_>>()
            .join(", "),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn run_select(
    features: &Path,
    out: &Path,
    target: usize,
    bins: usize,
    delta: f64,
    train_only: bool,
    seed: u64,
    train_frac: f64,
) -> Result<()> {
    let (dataset, _) = import_features(features)?;
    let working = if train_only {
        let (train_ids, _) = stratified_split(&dataset, train_frac, seed)?;
        let vectors = train_ids
            .iter()
            .map(|&i| dataset.vectors()[i].clone())
            .collect();
        LabeledDataset::new(vectors).context("training partition too small for selection")?
    } else {
        dataset
    };

    let fcbf = fcbf_rank(&working, delta, bins);
    let fisher = fisher_rank(&working);
    let names = feature_names();
    match combine_rankings(&fcbf, &fisher, target) {
        Ok(set) => {
            write_selection(out, &set)?;
            println!(
                "selected {} features -> {}",
                set.indices.len(),
                out.display()
            );
            for &index in &set.indices {
                println!(
                    "  {index:3}  {:<20} su={:.4} fisher={:.4}",
                    names[index], set.su_scores[&index], set.fisher_scores[&index]
                );
            }
            Ok(())
        }
        Err(SelectionError::Shortfall { target, found }) => {
            write_selection(out, &found)?;
            bail!(
                "only {} features are ranked by both filters (target {target}); \
                 partial selection written to {}",
                found.indices.len(),
                out.display()
            );
        }
        Err(other) => Err(other.into()),
    }
}

/// Materialize selected, standardized rows for the given row indices.
fn project_rows(
    dataset: &LabeledDataset,
    ids: &[usize],
    selected: &[usize],
) -> (Vec<Vec<f64>>, Vec<EmotionClass>) {
    let rows = ids
        .iter()
        .map(|&i| {
            let values = dataset.vectors()[i].values();
            selected.iter().map(|&j| values[j]).collect()
        })
        .collect();
    let labels = ids
        .iter()
        .map(|&i| dataset.vectors()[i].label().expect("labeled dataset"))
        .collect();
    (rows, labels)
}

#[allow(clippy::too_many_arguments)]
pub fn run_train(
    features: &Path,
    selection_path: &Path,
    out: &Path,
    seed: u64,
    train_frac: f64,
    k: usize,
    c: f64,
    lr: f64,
    epochs: usize,
    prune_fraction: f64,
) -> Result<()> {
    let (dataset, frame) = import_features(features)?;
    let selection = read_selection(selection_path)?;
    let (train_ids, test_ids) = stratified_split(&dataset, train_frac, seed)?;
    let (raw_rows, labels) = project_rows(&dataset, &train_ids, &selection.indices);

    let standardizer = fit_standardizer(&raw_rows)?;
    let rows: Vec<Vec<f64>> = raw_rows
        .iter()
        .map(|r| standardizer.apply(r).expect("fitted on these rows"))
        .collect();

    let model = EnsembleModel {
        selected: selection.indices.clone(),
        standardizer,
        knn: train_knn(&rows, &labels, k)?,
        tree: train_tree(&rows, &labels, prune_fraction, seed)?,
        nn: train_nn(&rows, &labels, lr, epochs, seed)?,
        svm: train_svm(&rows, &labels, c, 1e-3)?,
    };
    if !model.svm.converged() {
        eprintln!("warning: an SVM pair hit its update cap before meeting the KKT tolerance");
    }

    let meta = RunMeta {
        seed,
        train_frac,
        k,
        c,
        lr,
        epochs,
        prune_fraction,
        frame,
    };
    save_models(out, &model, &selection, &meta)?;
    println!(
        "trained on {} rows ({} held out for the test split) -> {}",
        train_ids.len(),
        test_ids.len(),
        out.display()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Evaluate the seeded test partition recorded in the model directory.
    Test,
    /// Evaluate every row of the feature file.
    All,
}

/// Run the four classifiers and the vote over the chosen rows.
fn evaluate_rows(model: &EnsembleModel, vectors: &[&FeatureVector]) -> Result<EvalReport> {
    let mut knn_pairs = Vec::new();
    let mut tree_pairs = Vec::new();
    let mut nn_pairs = Vec::new();
    let mut svm_pairs = Vec::new();
    let mut ensemble_pairs = Vec::new();
    for vector in vectors {
        let truth = vector.label().expect("labeled dataset");
        let selected: Vec<f64> = model.selected.iter().map(|&j| vector.values()[j]).collect();
        let row = model.standardizer.apply(&selected)?;
        let votes = Votes {
            knn: predict_knn(&model.knn, &row)?.argmax(),
            tree: predict_tree(&model.tree, &row)?.argmax(),
            nn: predict_nn(&model.nn, &row)?.argmax(),
            svm: predict_svm(&model.svm, &row)?.argmax(),
        };
        knn_pairs.push((truth, Some(votes.knn)));
        tree_pairs.push((truth, Some(votes.tree)));
        nn_pairs.push((truth, Some(votes.nn)));
        svm_pairs.push((truth, Some(votes.svm)));
        ensemble_pairs.push((truth, majority_vote(votes).outcome));
    }
    Ok(EvalReport {
        dataset: String::new(),
        per_classifier: vec![
            ("knn", ConfusionMatrix::from_predictions(knn_pairs)?),
            ("tree", ConfusionMatrix::from_predictions(tree_pairs)?),
            ("nn", ConfusionMatrix::from_predictions(nn_pairs)?),
            ("svm", ConfusionMatrix::from_predictions(svm_pairs)?),
        ],
        ensemble: ConfusionMatrix::from_predictions(ensemble_pairs)?,
    })
}

/// Evaluate one model directory against one or more feature files.
pub fn run_eval(
    models: &Path,
    feature_files: &[PathBuf],
    report_path: Option<&Path>,
    mode: SplitMode,
) -> Result<Vec<EvalReport>> {
    let (model, meta) = load_models(models)?;
    let mut reports = Vec::new();
    for path in feature_files {
        let (dataset, _) = import_features(path)?;
        let vectors: Vec<&FeatureVector> = match mode {
            SplitMode::Test => {
                let (_, test_ids) = stratified_split(&dataset, meta.train_frac, meta.seed)?;
                test_ids.iter().map(|&i| &dataset.vectors()[i]).collect()
            }
            SplitMode::All => dataset.vectors().iter().collect(),
        };
        let mut report = evaluate_rows(&model, &vectors)?;
        report.dataset = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        print!("{}", render_text(&report));
        println!();
        reports.push(report);
    }
    if reports.len() > 1 {
        println!(
            "cross-dataset average accuracy (ensemble): {:.2}%",
            cross_dataset_average(&reports)
        );
    }
    if let Some(path) = report_path {
        std::fs::write(path, render_csv(&reports))
            .with_context(|| format!("writing report to {}", path.display()))?;
        println!("report written to {}", path.display());
    }
    Ok(reports)
}

/// Classify one WAV file with a trained model directory.
pub fn run_predict(models: &Path, wav: &Path) -> Result<EnsembleDecision> {
    let (model, meta) = load_models(models)?;
    let clip = load_wav(wav)?;
    let lld = extract_lld(&clip, &meta.frame)
        .with_context(|| format!("cannot extract features from {}", wav.display()))?;
    let vector = build_feature_vector(&lld)?;
    let decision = model.predict(&vector)?;
    println!("file:     {}", wav.display());
    println!(
        "votes:    knn={} tree={} nn={} svm={}",
        decision.votes.knn, decision.votes.tree, decision.votes.nn, decision.votes.svm
    );
    match decision.outcome {
        Some(class) => println!("decision: {class} ({} of 4 votes)", decision.agreement),
        None => println!("decision: no-decision"),
    }
    Ok(decision)
}

/// Generate the synthetic demo corpus.
pub fn run_synth(out: &Path, clips_per_class: usize, seed: u64) -> Result<()> {
    let written = write_synth_corpus(out, clips_per_class, seed)?;
    println!("wrote {written} synthetic clips under {}", out.display());
    Ok(())
}
