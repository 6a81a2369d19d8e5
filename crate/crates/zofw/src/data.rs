//! Dataset ingestion: LIBSVM sparse text format, dataset statistics, and
//! label normalization.
//!
//! File indices are 1-based per the LIBSVM convention and stored 0-based
//! in memory. `#` comments are stripped and blank lines skipped.

use crate::numerics::SparseVector;
use crate::Error;

/// Immutable sparse dataset: one row and one real label per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub rows: Vec<SparseVector>,
    pub labels: Vec<f64>,
    pub dim: usize,
    pub name: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Summary counts plus the smoothness constant the logistic loss implies.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetStats {
    pub n: usize,
    pub d: usize,
    pub nnz: usize,
    /// Distinct labels with their multiplicities, sorted by label.
    pub label_histogram: Vec<(f64, usize)>,
    pub max_row_norm_sq: f64,
    /// `max_i ||z_i||^2 / 4`, the per-component smoothness of the
    /// logistic loss on this data.
    pub logistic_l_hat: f64,
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, message: msg.into() }
}

/// Parses LIBSVM text: each non-empty line is a label followed by
/// space-separated `index:value` pairs with strictly ascending 1-based
/// indices.
///
/// `declared_d` fixes the dimension and rejects larger indices; without
/// it the dimension is the largest index seen.
pub fn parse_libsvm(text: &str, declared_d: Option<usize>) -> Result<Dataset, Error> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;

    for (line_no, raw_line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        if line.trim().is_empty() {
            continue;
        }

        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a first token");
        let col_of = |tok: &str| line.find(tok).map(|p| p + 1).unwrap_or(1);
        let label: f64 = label_tok.parse().map_err(|_| {
            parse_err(line_no, col_of(label_tok), format!("invalid label token {label_tok:?}"))
        })?;

        let mut indices: Vec<u32> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut prev_index = 0usize; // 1-based; 0 means none yet
        for tok in tokens {
            let col = col_of(tok);
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(line_no, col, format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx_s.parse().map_err(|_| {
                parse_err(line_no, col, format!("invalid feature index in token {tok:?}"))
            })?;
            if idx == 0 {
                return Err(parse_err(line_no, col, "feature indices are 1-based; got 0"));
            }
            if idx <= prev_index {
                return Err(parse_err(
                    line_no,
                    col,
                    format!("non-ascending feature index {idx} after {prev_index}"),
                ));
            }
            if let Some(d) = declared_d {
                if idx > d {
                    return Err(parse_err(
                        line_no,
                        col,
                        format!("feature index {idx} exceeds declared dimension {d}"),
                    ));
                }
            }
            let val: f64 = val_s.parse().map_err(|_| {
                parse_err(line_no, col, format!("invalid feature value in token {tok:?}"))
            })?;
            if !val.is_finite() {
                return Err(parse_err(line_no, col, format!("non-finite feature value in token {tok:?}")));
            }
            prev_index = idx;
            max_index = max_index.max(idx);
            indices.push((idx - 1) as u32);
            values.push(val);
        }

        rows.push(SparseVector::new(indices, values));
        labels.push(label);
    }

    if rows.is_empty() {
        return Err(parse_err(1, 1, "dataset is empty"));
    }
    let dim = declared_d.unwrap_or(max_index);
    Ok(Dataset { rows, labels, dim, name: String::new() })
}

/// Re-emits a dataset in LIBSVM text form (1-based indices, shortest
/// round-trip float formatting), so `parse(write(ds))` reproduces it.
pub fn write_libsvm(ds: &Dataset) -> String {
    let mut out = String::new();
    for (row, label) in ds.rows.iter().zip(&ds.labels) {
        out.push_str(&format!("{label}"));
        for (i, v) in row.iter() {
            out.push_str(&format!(" {}:{}", i + 1, v));
        }
        out.push('\n');
    }
    out
}

pub fn dataset_stats(ds: &Dataset) -> DatasetStats {
    let nnz = ds.rows.iter().map(|r| r.nnz()).sum();
    let max_row_norm_sq = ds
        .rows
        .iter()
        .map(|r| r.norm2_sq())
        .fold(0.0f64, f64::max);

    let mut histogram: Vec<(f64, usize)> = Vec::new();
    for &label in &ds.labels {
        match histogram.iter_mut().find(|(l, _)| *l == label) {
            Some((_, count)) => *count += 1,
            None => histogram.push((label, 1)),
        }
    }
    histogram.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite labels"));

    DatasetStats {
        n: ds.len(),
        d: ds.dim,
        nnz,
        label_histogram: histogram,
        max_row_norm_sq,
        logistic_l_hat: max_row_norm_sq / 4.0,
    }
}

/// Maps `{0,1}` labels to `{-1,+1}`; `{-1,+1}` passes through unchanged.
/// Any other label set is rejected, listing the offending values.
pub fn scale_labels_pm1(ds: &Dataset) -> Result<Dataset, Error> {
    let is_pm1 = ds.labels.iter().all(|&l| l == -1.0 || l == 1.0);
    if is_pm1 {
        return Ok(ds.clone());
    }
    let is_01 = ds.labels.iter().all(|&l| l == 0.0 || l == 1.0);
    if is_01 {
        let labels = ds.labels.iter().map(|&l| if l == 0.0 { -1.0 } else { 1.0 }).collect();
        return Ok(Dataset { labels, ..ds.clone() });
    }
    let mut offending: Vec<f64> = ds
        .labels
        .iter()
        .copied()
        .filter(|&l| l != 0.0 && l != 1.0 && l != -1.0)
        .collect();
    offending.sort_by(|a, b| a.partial_cmp(b).expect("finite labels"));
    offending.dedup();
    Err(Error::Config(format!(
        "labels must be {{0,1}} or {{-1,+1}}; found unsupported values {offending:?}"
    )))
}

/// Per-feature max-abs scaling (columns with no support are untouched).
/// Off by default in the CLI; the experiments apply no preprocessing
/// unless asked.
pub fn scale_features_maxabs(ds: &Dataset) -> Dataset {
    let mut maxabs = vec![0.0f64; ds.dim];
    for row in &ds.rows {
        for (i, v) in row.iter() {
            maxabs[i] = maxabs[i].max(v.abs());
        }
    }
    let rows = ds
        .rows
        .iter()
        .map(|row| {
            let indices = row.indices().to_vec();
            let values = row
                .iter()
                .map(|(i, v)| if maxabs[i] > 0.0 { v / maxabs[i] } else { v })
                .collect();
            SparseVector::new(indices, values)
        })
        .collect();
    Dataset { rows, ..ds.clone() }
}
