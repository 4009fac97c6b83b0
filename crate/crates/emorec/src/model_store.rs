//! Versioned plain-text persistence for the trained stack.
//!
//! A model directory holds one file per model plus the standardizer, the
//! selection listing, and a `run.meta` with every parameter needed to
//! reproduce or apply the run (split seed and fraction, hyperparameters, and
//! the frame parameters copied from the feature file). Numbers are written
//! in shortest round-trip form, so save/load is exact and repeated runs are
//! byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use emorec_core::ensemble::EnsembleModel;
use emorec_core::functionals::EmotionClass;
use emorec_core::lld::FrameConfig;
use emorec_core::models::{
    KnnModel, NnModel, PairSolution, Standardizer, SvmModel, SvmPair, TreeModel, TreeNode,
};

use crate::selection_file::{read_selection, write_selection};
use crate::{FormatError, FORMAT_VERSION_LINE};

/// Everything about a training run that later stages need.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub seed: u64,
    pub train_frac: f64,
    pub k: usize,
    pub c: f64,
    pub lr: f64,
    pub epochs: usize,
    pub prune_fraction: f64,
    pub frame: FrameConfig,
}

const FILES: [&str; 7] = [
    "run.meta",
    "selection.txt",
    "standardizer.model",
    "knn.model",
    "tree.model",
    "nn.model",
    "svm.model",
];

fn model_header(kind: &str) -> String {
    format!("#model={kind} {FORMAT_VERSION_LINE}")
}

fn write_floats(out: &mut String, label: &str, values: &[f64]) {
    out.push_str(label);
    for v in values {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

fn save(path: &Path, content: String) -> Result<(), FormatError> {
    std::fs::write(path, content).map_err(|e| FormatError::io(path, e))
}

/// Persist the trained stack, the selection it was built on, and the run
/// parameters into `dir`.
pub fn save_models(
    dir: &Path,
    model: &EnsembleModel,
    selection: &emorec_core::selection::SelectedFeatureSet,
    meta: &RunMeta,
) -> Result<(), FormatError> {
    debug_assert_eq!(model.selected, selection.indices);
    std::fs::create_dir_all(dir).map_err(|e| FormatError::io(dir, e))?;

    // run.meta
    let fft = meta
        .frame
        .fft_size
        .map_or_else(|| "auto".to_string(), |n| n.to_string());
    let mut out = format!("{FORMAT_VERSION_LINE}\n");
    let _ = write!(
        out,
        "seed={}\ntrain_frac={}\nk={}\nc={}\nlr={}\nepochs={}\nprune_fraction={}\n\
         frame_ms={}\nhop_ms={}\nmel_filters={}\nfft_size={fft}\npreemphasis={}\n\
         f0_min_hz={}\nf0_max_hz={}\nvoicing_threshold={}\n",
        meta.seed,
        meta.train_frac,
        meta.k,
        meta.c,
        meta.lr,
        meta.epochs,
        meta.prune_fraction,
        meta.frame.frame_ms,
        meta.frame.hop_ms,
        meta.frame.mel_filters,
        meta.frame.preemphasis,
        meta.frame.f0_min_hz,
        meta.frame.f0_max_hz,
        meta.frame.voicing_threshold,
    );
    save(&dir.join("run.meta"), out)?;

    write_selection(&dir.join("selection.txt"), selection)?;

    // standardizer
    let mut out = model_header("standardizer");
    out.push('\n');
    write_floats(&mut out, "means", model.standardizer.means());
    write_floats(&mut out, "stddevs", model.standardizer.stddevs());
    save(&dir.join("standardizer.model"), out)?;

    // knn: standardized training rows with labels
    let mut out = model_header("knn");
    let _ = write!(out, "\nk {}\ndim {}\n", model.knn.k(), model.knn.dim());
    for (row, label) in model.knn.rows().iter().zip(model.knn.labels()) {
        write_floats(&mut out, &format!("row {label}"), row);
    }
    save(&dir.join("knn.model"), out)?;

    // tree: pre-order, split lines then leaf distributions
    let mut out = model_header("tree");
    let _ = write!(
        out,
        "\ndim {}\npruned {}\n",
        model.tree.dim(),
        model.tree.pruned()
    );
    fn write_node(out: &mut String, node: &TreeNode) {
        match node {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let _ = writeln!(out, "node,{feature},{threshold}");
                write_node(out, left);
                write_node(out, right);
            }
            TreeNode::Leaf { distribution } => {
                let _ = writeln!(
                    out,
                    "leaf,{},{},{},{}",
                    distribution[0], distribution[1], distribution[2], distribution[3]
                );
            }
        }
    }
    write_node(&mut out, model.tree.root());
    save(&dir.join("tree.model"), out)?;

    // nn
    let (w1, b1, w2, b2) = model.nn.weights();
    let mut out = model_header("nn");
    let _ = write!(
        out,
        "\ndims {} {} {}\n",
        model.nn.inputs(),
        model.nn.hidden(),
        EmotionClass::COUNT
    );
    for row in w1 {
        write_floats(&mut out, "w1", row);
    }
    write_floats(&mut out, "b1", b1);
    for row in w2 {
        write_floats(&mut out, "w2", row);
    }
    write_floats(&mut out, "b2", b2);
    save(&dir.join("nn.model"), out)?;

    // svm, one block per pair
    let mut out = model_header("svm");
    let _ = write!(out, "\ndim {}\nc {}\n", model.svm.dim(), model.svm.c());
    for pair in model.svm.pairs() {
        let _ = writeln!(
            out,
            "pair {} {}\nconverged {}\nbias {}",
            pair.pos, pair.neg, pair.solution.converged, pair.solution.bias
        );
        write_floats(&mut out, "w", &pair.solution.w);
        for ((alpha, sign), row) in pair
            .solution
            .alphas
            .iter()
            .zip(&pair.solution.support_signs)
            .zip(&pair.solution.support_rows)
        {
            let mut line = format!("sv {alpha} {sign}");
            for v in row {
                let _ = write!(line, " {v}");
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    save(&dir.join("svm.model"), out)?;

    Ok(())
}

struct Loader<'a> {
    path: PathBuf,
    lines: std::iter::Peekable<std::str::Lines<'a>>,
    row: usize,
}

impl<'a> Loader<'a> {
    fn new(path: &Path, text: &'a str, kind: &str) -> Result<Self, FormatError> {
        let mut loader = Self {
            path: path.to_path_buf(),
            lines: text.lines().peekable(),
            row: 0,
        };
        let header = loader.next_line()?;
        if header != model_header(kind) {
            return Err(FormatError::schema(
                path,
                format!("expected '{}', found '{header}'", model_header(kind)),
            ));
        }
        Ok(loader)
    }

    fn next_line(&mut self) -> Result<&'a str, FormatError> {
        self.row += 1;
        self.lines
            .next()
            .ok_or_else(|| FormatError::row(&self.path, self.row, "unexpected end of file"))
    }

    fn peek(&mut self) -> Option<&'a str> {
        self.lines.peek().copied()
    }

    fn err(&self, detail: impl Into<String>) -> FormatError {
        FormatError::row(&self.path, self.row, detail)
    }

    /// Next line, which must start with `label` followed by the payload.
    fn labeled(&mut self, label: &str) -> Result<&'a str, FormatError> {
        let line = self.next_line()?;
        line.strip_prefix(label)
            .and_then(|rest| {
                rest.strip_prefix(' ')
                    .or(Some(rest).filter(|r| r.is_empty()))
            })
            .ok_or_else(|| {
                FormatError::row(
                    &self.path,
                    self.row,
                    format!("expected '{label} ...', found '{line}'"),
                )
            })
    }

    fn floats(&mut self, label: &str) -> Result<Vec<f64>, FormatError> {
        let payload = self.labeled(label)?;
        payload
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| self.err(format!("bad number '{tok}'")))
                    .and_then(|v| {
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(self.err(format!("non-finite number '{tok}'")))
                        }
                    })
            })
            .collect()
    }

    fn parse<T: std::str::FromStr>(&self, token: &str) -> Result<T, FormatError> {
        token
            .parse()
            .map_err(|_| self.err(format!("bad value '{token}'")))
    }
}

fn read_file(dir: &Path, name: &str) -> Result<String, FormatError> {
    let path = dir.join(name);
    std::fs::read_to_string(&path).map_err(|e| FormatError::io(&path, e))
}

fn load_meta(dir: &Path) -> Result<RunMeta, FormatError> {
    let path = dir.join("run.meta");
    let text = read_file(dir, "run.meta")?;
    let mut lines = text.lines();
    match lines.next() {
        Some(line) if line == FORMAT_VERSION_LINE => {}
        other => {
            return Err(FormatError::schema(
                &path,
                format!("expected '{FORMAT_VERSION_LINE}', found {other:?}"),
            ))
        }
    }
    let mut map = BTreeMap::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| FormatError::schema(&path, format!("bad line '{line}'")))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    let get = |key: &str| -> Result<&String, FormatError> {
        map.get(key)
            .ok_or_else(|| FormatError::schema(&path, format!("missing key '{key}'")))
    };
    let parse_f64 = |key: &str| -> Result<f64, FormatError> {
        get(key)?
            .parse()
            .map_err(|_| FormatError::schema(&path, format!("bad value for '{key}'")))
    };
    let parse_usize = |key: &str| -> Result<usize, FormatError> {
        get(key)?
            .parse()
            .map_err(|_| FormatError::schema(&path, format!("bad value for '{key}'")))
    };
    let fft = match get("fft_size")?.as_str() {
        "auto" => None,
        value => Some(value.parse().map_err(|_| {
            FormatError::schema(&path, format!("bad value for 'fft_size': {value}"))
        })?),
    };
    Ok(RunMeta {
        seed: get("seed")?
            .parse()
            .map_err(|_| FormatError::schema(&path, "bad value for 'seed'"))?,
        train_frac: parse_f64("train_frac")?,
        k: parse_usize("k")?,
        c: parse_f64("c")?,
        lr: parse_f64("lr")?,
        epochs: parse_usize("epochs")?,
        prune_fraction: parse_f64("prune_fraction")?,
        frame: FrameConfig {
            frame_ms: parse_f64("frame_ms")?,
            hop_ms: parse_f64("hop_ms")?,
            mel_filters: parse_usize("mel_filters")?,
            fft_size: fft,
            preemphasis: parse_f64("preemphasis")?,
            f0_min_hz: parse_f64("f0_min_hz")?,
            f0_max_hz: parse_f64("f0_max_hz")?,
            voicing_threshold: parse_f64("voicing_threshold")?,
        },
    })
}

fn load_standardizer(dir: &Path) -> Result<Standardizer, FormatError> {
    let text = read_file(dir, "standardizer.model")?;
    let path = dir.join("standardizer.model");
    let mut loader = Loader::new(&path, &text, "standardizer")?;
    let means = loader.floats("means")?;
    let stddevs = loader.floats("stddevs")?;
    if means.len() != stddevs.len() || means.is_empty() {
        return Err(FormatError::schema(&path, "means/stddevs length mismatch"));
    }
    Ok(Standardizer::from_parts(means, stddevs))
}

fn load_knn(dir: &Path, dim: usize) -> Result<KnnModel, FormatError> {
    let text = read_file(dir, "knn.model")?;
    let path = dir.join("knn.model");
    let mut loader = Loader::new(&path, &text, "knn")?;
    let k: usize = {
        let tok = loader.labeled("k")?;
        loader.parse(tok.trim())?
    };
    let stored_dim: usize = {
        let tok = loader.labeled("dim")?;
        loader.parse(tok.trim())?
    };
    if stored_dim != dim {
        return Err(FormatError::schema(
            &path,
            format!("dim {stored_dim} does not match selection ({dim})"),
        ));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    while loader.peek().is_some_and(|l| !l.trim().is_empty()) {
        let payload = loader.labeled("row")?;
        let mut parts = payload.split_whitespace();
        let label_name = parts.next().ok_or_else(|| loader.err("missing label"))?;
        let label = EmotionClass::from_name(label_name)
            .ok_or_else(|| loader.err(format!("unknown label '{label_name}'")))?;
        let row: Vec<f64> = parts
            .map(|tok| loader.parse::<f64>(tok))
            .collect::<Result<_, _>>()?;
        if row.len() != dim {
            return Err(loader.err(format!("{} values, expected {dim}", row.len())));
        }
        rows.push(row);
        labels.push(label);
    }
    if rows.is_empty() || k == 0 || k > rows.len() {
        return Err(FormatError::schema(
            &path,
            format!("k = {k} with {} rows", rows.len()),
        ));
    }
    Ok(KnnModel::from_parts(rows, labels, k))
}

fn load_tree(dir: &Path, dim: usize) -> Result<TreeModel, FormatError> {
    let text = read_file(dir, "tree.model")?;
    let path = dir.join("tree.model");
    let mut loader = Loader::new(&path, &text, "tree")?;
    let stored_dim: usize = {
        let tok = loader.labeled("dim")?;
        loader.parse(tok.trim())?
    };
    if stored_dim != dim {
        return Err(FormatError::schema(
            &path,
            format!("dim {stored_dim} does not match selection ({dim})"),
        ));
    }
    let pruned: bool = {
        let tok = loader.labeled("pruned")?;
        loader.parse(tok.trim())?
    };

    fn read_node(loader: &mut Loader<'_>, dim: usize) -> Result<TreeNode, FormatError> {
        let line = loader.next_line()?;
        let parts: Vec<&str> = line.split(',').collect();
        match parts.first().copied() {
            Some("node") if parts.len() == 3 => {
                let feature: usize = loader.parse(parts[1])?;
                if feature >= dim {
                    return Err(loader.err(format!("feature {feature} out of range")));
                }
                let threshold: f64 = loader.parse(parts[2])?;
                let left = Box::new(read_node(loader, dim)?);
                let right = Box::new(read_node(loader, dim)?);
                Ok(TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                })
            }
            Some("leaf") if parts.len() == 5 => {
                let mut distribution = [0.0; EmotionClass::COUNT];
                for (slot, tok) in distribution.iter_mut().zip(&parts[1..]) {
                    *slot = loader.parse(tok)?;
                }
                Ok(TreeNode::Leaf { distribution })
            }
            _ => Err(loader.err(format!("expected node/leaf line, found '{line}'"))),
        }
    }
    let root = read_node(&mut loader, dim)?;
    if loader.peek().is_some_and(|l| !l.trim().is_empty()) {
        return Err(FormatError::schema(&path, "trailing lines after the tree"));
    }
    Ok(TreeModel::from_parts(root, pruned, dim))
}

fn load_nn(dir: &Path, dim: usize) -> Result<NnModel, FormatError> {
    let text = read_file(dir, "nn.model")?;
    let path = dir.join("nn.model");
    let mut loader = Loader::new(&path, &text, "nn")?;
    let dims = loader.floats("dims")?;
    if dims.len() != 3 {
        return Err(FormatError::schema(&path, "dims must be 'in hidden out'"));
    }
    let (inputs, hidden, outputs) = (dims[0] as usize, dims[1] as usize, dims[2] as usize);
    if inputs != dim || outputs != EmotionClass::COUNT {
        return Err(FormatError::schema(
            &path,
            format!("dims {inputs}/{outputs} do not match selection ({dim}) and 4 classes"),
        ));
    }
    let mut w1 = Vec::with_capacity(hidden);
    for _ in 0..hidden {
        let row = loader.floats("w1")?;
        if row.len() != inputs {
            return Err(FormatError::schema(&path, "w1 row width mismatch"));
        }
        w1.push(row);
    }
    let b1 = loader.floats("b1")?;
    let mut w2 = Vec::with_capacity(outputs);
    for _ in 0..outputs {
        let row = loader.floats("w2")?;
        if row.len() != hidden {
            return Err(FormatError::schema(&path, "w2 row width mismatch"));
        }
        w2.push(row);
    }
    let b2 = loader.floats("b2")?;
    if b1.len() != hidden || b2.len() != outputs {
        return Err(FormatError::schema(&path, "bias width mismatch"));
    }
    Ok(NnModel::from_parts(w1, b1, w2, b2))
}

fn load_svm(dir: &Path, dim: usize) -> Result<SvmModel, FormatError> {
    let text = read_file(dir, "svm.model")?;
    let path = dir.join("svm.model");
    let mut loader = Loader::new(&path, &text, "svm")?;
    let stored_dim: usize = {
        let tok = loader.labeled("dim")?;
        loader.parse(tok.trim())?
    };
    if stored_dim != dim {
        return Err(FormatError::schema(
            &path,
            format!("dim {stored_dim} does not match selection ({dim})"),
        ));
    }
    let c: f64 = {
        let tok = loader.labeled("c")?;
        loader.parse(tok.trim())?
    };

    let mut pairs = Vec::new();
    while loader.peek().is_some_and(|l| !l.trim().is_empty()) {
        let payload = loader.labeled("pair")?.to_string();
        let mut names = payload.split_whitespace();
        let pos = names
            .next()
            .and_then(EmotionClass::from_name)
            .ok_or_else(|| loader.err("bad pair line"))?;
        let neg = names
            .next()
            .and_then(EmotionClass::from_name)
            .ok_or_else(|| loader.err("bad pair line"))?;
        let converged: bool = {
            let tok = loader.labeled("converged")?;
            loader.parse(tok.trim())?
        };
        let bias: f64 = {
            let tok = loader.labeled("bias")?;
            loader.parse(tok.trim())?
        };
        let w = loader.floats("w")?;
        if w.len() != dim {
            return Err(loader.err("w width mismatch"));
        }
        let mut alphas = Vec::new();
        let mut support_signs = Vec::new();
        let mut support_rows = Vec::new();
        while loader.peek().is_some_and(|l| l.starts_with("sv")) {
            let values = loader.floats("sv")?;
            if values.len() != dim + 2 {
                return Err(loader.err("sv line width mismatch"));
            }
            let (alpha, sign) = (values[0], values[1]);
            if sign != 1.0 && sign != -1.0 {
                return Err(loader.err(format!("bad sign {sign}")));
            }
            if !(0.0..=c).contains(&alpha) {
                return Err(loader.err(format!("alpha {alpha} outside [0, c]")));
            }
            alphas.push(alpha);
            support_signs.push(sign);
            support_rows.push(values[2..].to_vec());
        }
        pairs.push(SvmPair {
            pos,
            neg,
            solution: PairSolution {
                support_rows,
                support_signs,
                alphas,
                w,
                bias,
                converged,
            },
        });
    }
    if pairs.len() != 6 {
        return Err(FormatError::schema(
            &path,
            format!("expected 6 pairs, found {}", pairs.len()),
        ));
    }
    Ok(SvmModel::from_parts(pairs, c, dim))
}

/// Load a model directory back into the trained stack and its run metadata.
///
/// Cross-checks that every file is present and that all widths agree with
/// the selection, so prediction never sees a feature-count mismatch.
pub fn load_models(dir: &Path) -> Result<(EnsembleModel, RunMeta), FormatError> {
    for name in FILES {
        let path = dir.join(name);
        if !path.is_file() {
            return Err(FormatError::schema(
                dir,
                format!("missing model file '{name}'"),
            ));
        }
    }
    let meta = load_meta(dir)?;
    let selection = read_selection(&dir.join("selection.txt"))?;
    let dim = selection.indices.len();
    let standardizer = load_standardizer(dir)?;
    if standardizer.dim() != dim {
        return Err(FormatError::schema(
            &dir.join("standardizer.model"),
            format!(
                "standardizer dim {} does not match selection ({dim})",
                standardizer.dim()
            ),
        ));
    }
    let model = EnsembleModel {
        selected: selection.indices,
        standardizer,
        knn: load_knn(dir, dim)?,
        tree: load_tree(dir, dim)?,
        nn: load_nn(dir, dim)?,
        svm: load_svm(dir, dim)?,
    };
    Ok((model, meta))
}
