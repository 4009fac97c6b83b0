//! The selected-feature listing.
//!
//! One line per selected feature, `index,column_name,su,fisher`, after the
//! `#version=1` header. The column name is redundant with the index and is
//! validated on read, guarding against a listing from a different layout.

use std::path::Path;

use emorec_core::functionals::{feature_names, FEATURE_COUNT};
use emorec_core::selection::SelectedFeatureSet;

use crate::{FormatError, FORMAT_VERSION_LINE};

/// Write the selected features in rank order.
pub fn write_selection(path: &Path, set: &SelectedFeatureSet) -> Result<(), FormatError> {
    let names = feature_names();
    let mut out = String::from(FORMAT_VERSION_LINE);
    out.push('\n');
    for &index in &set.indices {
        let su = set.su_scores.get(&index).copied().unwrap_or(0.0);
        let fisher = set.fisher_scores.get(&index).copied().unwrap_or(0.0);
        out.push_str(&format!("{index},{},{su},{fisher}\n", names[index]));
    }
    std::fs::write(path, out).map_err(|e| FormatError::io(path, e))
}

/// Read a selection listing. The returned set carries the listed indices and
/// scores; the full rankings behind the original selection are not stored in
/// this format and come back empty.
pub fn read_selection(path: &Path) -> Result<SelectedFeatureSet, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(line) if line.trim_end() == FORMAT_VERSION_LINE => {}
        other => {
            return Err(FormatError::schema(
                path,
                format!("expected '{FORMAT_VERSION_LINE}' first line, found {other:?}"),
            ))
        }
    }

    let names = feature_names();
    let mut set = SelectedFeatureSet {
        indices: Vec::new(),
        su_scores: Default::default(),
        fisher_scores: Default::default(),
        fcbf_ranking: Vec::new(),
        fisher_ranking: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(FormatError::row(
                path,
                row,
                format!("{} fields, expected 4", parts.len()),
            ));
        }
        let index: usize = parts[0]
            .parse()
            .map_err(|_| FormatError::row(path, row, format!("bad index '{}'", parts[0])))?;
        if index >= FEATURE_COUNT {
            return Err(FormatError::row(
                path,
                row,
                format!("index {index} out of range (layout has {FEATURE_COUNT} features)"),
            ));
        }
        if parts[1] != names[index] {
            return Err(FormatError::row(
                path,
                row,
                format!(
                    "feature {index} named '{}', layout says '{}'",
                    parts[1], names[index]
                ),
            ));
        }
        let su: f64 = parts[2]
            .parse()
            .map_err(|_| FormatError::row(path, row, format!("bad su '{}'", parts[2])))?;
        let fisher: f64 = parts[3]
            .parse()
            .map_err(|_| FormatError::row(path, row, format!("bad fisher '{}'", parts[3])))?;
        if set.indices.contains(&index) {
            return Err(FormatError::row(
                path,
                row,
                format!("duplicate index {index}"),
            ));
        }
        set.indices.push(index);
        set.su_scores.insert(index, su);
        set.fisher_scores.insert(index, fisher);
    }
    if set.indices.is_empty() {
        return Err(FormatError::schema(path, "no features listed".to_string()));
    }
    Ok(set)
}
