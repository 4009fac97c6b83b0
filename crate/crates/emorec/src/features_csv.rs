//! The feature CSV format.
//!
//! Layout: a `#version=1` line, the frame parameters used at extraction time
//! as `#key=value` lines (so later stages can re-extract consistently), then
//! a CSV table `file,label,<352 feature columns>` using the documented
//! `<contour>_<functional>` column names. Floats are written in shortest
//! round-trip form, so export/import preserves values exactly.

use std::path::Path;

use emorec_core::functionals::{feature_names, EmotionClass, FeatureVector, FEATURE_COUNT};
use emorec_core::lld::FrameConfig;
use emorec_core::selection::LabeledDataset;

use crate::{FormatError, FORMAT_VERSION_LINE};

fn format_param_lines(cfg: &FrameConfig) -> String {
    let fft = cfg
        .fft_size
        .map_or_else(|| "auto".to_string(), |n| n.to_string());
    format!(
        "#frame_ms={}\n#hop_ms={}\n#mel_filters={}\n#fft_size={}\n#preemphasis={}\n\
         #f0_min_hz={}\n#f0_max_hz={}\n#voicing_threshold={}\n",
        cfg.frame_ms,
        cfg.hop_ms,
        cfg.mel_filters,
        fft,
        cfg.preemphasis,
        cfg.f0_min_hz,
        cfg.f0_max_hz,
        cfg.voicing_threshold
    )
}

/// Write labeled feature vectors with the frame parameters that produced them.
pub fn export_features(
    path: &Path,
    vectors: &[FeatureVector],
    cfg: &FrameConfig,
) -> Result<(), FormatError> {
    let mut out = String::new();
    out.push_str(FORMAT_VERSION_LINE);
    out.push('\n');
    out.push_str(&format_param_lines(cfg));

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["file".to_string(), "label".to_string()];
    header.extend(feature_names());
    writer
        .write_record(&header)
        .expect("csv write to memory cannot fail");
    for vector in vectors {
        let mut record = Vec::with_capacity(2 + FEATURE_COUNT);
        record.push(vector.source_id().to_string());
        record.push(
            vector
                .label()
                .map(|c| c.name().to_string())
                .unwrap_or_default(),
        );
        record.extend(vector.values().iter().map(|v| v.to_string()));
        writer
            .write_record(&record)
            .expect("csv write to memory cannot fail");
    }
    let table = writer.into_inner().expect("memory writer");
    out.push_str(std::str::from_utf8(&table).expect("csv output is utf-8"));

    std::fs::write(path, out).map_err(|e| FormatError::io(path, e))
}

fn parse_param(cfg: &mut FrameConfig, key: &str, value: &str) -> Result<(), String> {
    let bad = |what: &str| format!("bad {what} value '{value}'");
    match key {
        "frame_ms" => cfg.frame_ms = value.parse().map_err(|_| bad(key))?,
        "hop_ms" => cfg.hop_ms = value.parse().map_err(|_| bad(key))?,
        "mel_filters" => cfg.mel_filters = value.parse().map_err(|_| bad(key))?,
        "fft_size" => {
            cfg.fft_size = if value == "auto" {
                None
            } else {
                Some(value.parse().map_err(|_| bad(key))?)
            }
        }
        "preemphasis" => cfg.preemphasis = value.parse().map_err(|_| bad(key))?,
        "f0_min_hz" => cfg.f0_min_hz = value.parse().map_err(|_| bad(key))?,
        "f0_max_hz" => cfg.f0_max_hz = value.parse().map_err(|_| bad(key))?,
        "voicing_threshold" => cfg.voicing_threshold = value.parse().map_err(|_| bad(key))?,
        other => return Err(format!("unknown parameter '{other}'")),
    }
    Ok(())
}

/// Read a feature CSV back into a labeled dataset plus the frame parameters
/// recorded in its header.
pub fn import_features(path: &Path) -> Result<(LabeledDataset, FrameConfig), FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let mut lines = text.lines().peekable();

    match lines.next() {
        Some(line) if line.trim_end() == FORMAT_VERSION_LINE => {}
        other => {
            return Err(FormatError::schema(
                path,
                format!("expected '{FORMAT_VERSION_LINE}' first line, found {other:?}"),
            ))
        }
    }
    let mut cfg = FrameConfig::default();
    while let Some(line) = lines.peek() {
        let Some(rest) = line.strip_prefix('#') else {
            break;
        };
        let (key, value) = rest
            .split_once('=')
            .ok_or_else(|| FormatError::schema(path, format!("bad parameter line '{line}'")))?;
        parse_param(&mut cfg, key.trim(), value.trim())
            .map_err(|detail| FormatError::schema(path, detail))?;
        lines.next();
    }

    let table: String = lines.collect::<Vec<_>>().join("\n");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(table.as_bytes());

    let expected_header: Vec<String> = ["file", "label"]
        .iter()
        .map(|s| s.to_string())
        .chain(feature_names())
        .collect();
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| FormatError::schema(path, e.to_string()))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if header.len() != expected_header.len() {
        return Err(FormatError::schema(
            path,
            format!(
                "expected {} columns ({} features), found {}",
                expected_header.len(),
                FEATURE_COUNT,
                header.len()
            ),
        ));
    }
    if let Some(i) = (0..header.len()).find(|&i| header[i] != expected_header[i]) {
        return Err(FormatError::schema(
            path,
            format!(
                "column {i} named '{}', expected '{}'",
                header[i], expected_header[i]
            ),
        ));
    }

    let mut vectors = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let row = index + 1; // 1-based data row for reporting
        let record = record.map_err(|e| FormatError::row(path, row, e.to_string()))?;
        if record.len() != expected_header.len() {
            return Err(FormatError::row(
                path,
                row,
                format!(
                    "{} fields, expected {}",
                    record.len(),
                    expected_header.len()
                ),
            ));
        }
        let source_id = record.get(0).unwrap_or_default();
        let label_name = record.get(1).unwrap_or_default();
        let label = EmotionClass::from_name(label_name)
            .ok_or_else(|| FormatError::row(path, row, format!("unknown label '{label_name}'")))?;
        let mut values = Vec::with_capacity(FEATURE_COUNT);
        for (column, cell) in record.iter().skip(2).enumerate() {
            let value: f64 = cell.parse().map_err(|_| {
                FormatError::row(
                    path,
                    row,
                    format!(
                        "non-numeric cell '{cell}' in column '{}'",
                        header[column + 2]
                    ),
                )
            })?;
            values.push(value);
        }
        let vector = FeatureVector::new(values)
            .map_err(|e| FormatError::row(path, row, e.to_string()))?
            .with_label(label)
            .with_source_id(source_id);
        vectors.push(vector);
    }

    let dataset = LabeledDataset::new(vectors).map_err(|source| FormatError::Dataset {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((dataset, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_vectors() -> Vec<FeatureVector> {
        let mut vectors = Vec::new();
        for class in EmotionClass::ALL {
            for i in 0..3 {
                let values: Vec<f64> = (0..FEATURE_COUNT)
                    .map(|j| (class.index() * 1000 + i * 100 + j) as f64 * 0.123456789012345 - 20.0)
                    .collect();
                vectors.push(
                    FeatureVector::new(values)
                        .unwrap()
                        .with_label(class)
                        .with_source_id(&format!("{}_{i}", class.name())),
                );
            }
        }
        vectors
    }

    #[test]
    fn roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let vectors = sample_vectors();
        let cfg = FrameConfig {
            voicing_threshold: 0.61,
            ..FrameConfig::default()
        };
        export_features(&path, &vectors, &cfg).unwrap();

        let (dataset, loaded_cfg) = import_features(&path).unwrap();
        assert_eq!(loaded_cfg, cfg);
        assert_eq!(dataset.len(), vectors.len());
        for (a, b) in dataset.vectors().iter().zip(&vectors) {
            assert_eq!(a.source_id(), b.source_id());
            assert_eq!(a.label(), b.label());
            assert_eq!(a.values(), b.values(), "float round trip must be exact");
        }
    }

    #[test]
    fn missing_version_line_is_schema_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        std::fs::write(&path, "file,label\n").unwrap();
        assert!(matches!(
            import_features(&path),
            Err(FormatError::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn wrong_column_count_is_schema_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let vectors = sample_vectors();
        export_features(&path, &vectors, &FrameConfig::default()).unwrap();
        // drop the last column from every line of the table
        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: Vec<String> = text
            .lines()
            .map(|line| {
                if line.starts_with('#') {
                    line.to_string()
                } else {
                    line.rsplit_once(',').map(|(a, _)| a.to_string()).unwrap()
                }
            })
            .collect();
        std::fs::write(&path, truncated.join("\n")).unwrap();
        match import_features(&path) {
            Err(FormatError::SchemaMismatch { detail, .. }) => {
                assert!(detail.contains("353"), "detail: {detail}")
            }
            other => panic!("expected schema mismatch, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_its_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        export_features(&path, &sample_vectors(), &FrameConfig::default()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(|s| s.to_string()).collect();
        // data rows start after 9 # lines and the header; corrupt data row 7
        let target = 9 + 1 + 6;
        lines[target] = {
            let mut parts: Vec<&str> = lines[target].split(',').collect();
            parts[10] = "not-a-number";
            parts.join(",")
        };
        std::fs::write(&path, lines.join("\n")).unwrap();
        match import_features(&path) {
            Err(FormatError::MalformedRow { row, .. }) => assert_eq!(row, 7),
            other => panic!("expected malformed row, got {other:?}"),
        }
    }

    #[test]
    fn nan_cells_are_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        export_features(&path, &sample_vectors(), &FrameConfig::default()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(|s| s.to_string()).collect();
        let target = 9 + 1 + 2;
        lines[target] = {
            let mut parts: Vec<&str> = lines[target].split(',').collect();
            parts[5] = "NaN";
            parts.join(",")
        };
        std::fs::write(&path, lines.join("\n")).unwrap();
        match import_features(&path) {
            Err(FormatError::MalformedRow { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected malformed row, got {other:?}"),
        }
    }
}
