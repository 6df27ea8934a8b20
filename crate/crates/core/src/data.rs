//! Sample matrices, label vectors and their CSV representation.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major `N x d` matrix of finite values with cached column ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    feature_mins: Vec<f64>,
    feature_maxs: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 {
            return Err(Error::Empty("matrix has no rows".into()));
        }
        if cols == 0 {
            return Err(Error::Empty("matrix has no columns".into()));
        }
        if values.len() != rows * cols {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: rows * cols,
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols + 1,
                column: format!("{}", pos % cols),
                value: format!("{}", values[pos]),
            });
        }
        let mut feature_mins = values[..cols].to_vec();
        let mut feature_maxs = values[..cols].to_vec();
        for row in values.chunks_exact(cols).skip(1) {
            for (j, &v) in row.iter().enumerate() {
                if v < feature_mins[j] {
                    feature_mins[j] = v;
                }
                if v > feature_maxs[j] {
                    feature_maxs[j] = v;
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            values,
            feature_mins,
            feature_maxs,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Ragged {
                    row: i,
                    found: r.len(),
                    expected: cols,
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.cols)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn feature_mins(&self) -> &[f64] {
        &self.feature_mins
    }

    pub fn feature_maxs(&self) -> &[f64] {
        &self.feature_maxs
    }

    /// New matrix holding the selected rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.cols, values)
    }

    pub(crate) fn check_cols(&self, expected: usize) -> Result<()> {
        if self.cols != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.cols,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelKind {
    OutlierBinary,
    ClassLabel,
}

/// Per-row labels: either outlier flags or class labels with a first-seen
/// registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LabelVector {
    Outlier(Vec<bool>),
    Class {
        /// Index into `registry` for every row.
        values: Vec<usize>,
        registry: Vec<String>,
    },
}

impl LabelVector {
    pub fn kind(&self) -> LabelKind {
        match self {
            LabelVector::Outlier(_) => LabelKind::OutlierBinary,
            LabelVector::Class { .. } => LabelKind::ClassLabel,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            LabelVector::Outlier(v) => v.len(),
            LabelVector::Class { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn outlier_flags(&self) -> Option<&[bool]> {
        match self {
            LabelVector::Outlier(v) => Some(v),
            LabelVector::Class { .. } => None,
        }
    }

    pub fn class_values(&self) -> Option<&[usize]> {
        match self {
            LabelVector::Class { values, .. } => Some(values),
            LabelVector::Outlier(_) => None,
        }
    }

    /// Builds class labels from raw strings, registering classes in order of
    /// first appearance.
    pub fn classes_from<S: AsRef<str>>(raw: &[S]) -> Self {
        let mut registry: Vec<String> = Vec::new();
        let values = raw
            .iter()
            .map(|s| {
                let s = s.as_ref();
                match registry.iter().position(|r| r == s) {
                    Some(i) => i,
                    None => {
                        registry.push(s.to_string());
                        registry.len() - 1
                    }
                }
            })
            .collect();
        LabelVector::Class { values, registry }
    }
}

pub fn parse_outlier_label(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "1.0" | "true" | "outlier" | "yes" => Some(true),
        "0" | "0.0" | "false" | "inlier" | "no" => Some(false),
        _ => None,
    }
}

fn parse_finite(raw: &str, row: usize, column: &str) -> Result<f64> {
    let trimmed = raw.trim();
    let v: f64 = trimmed.parse().map_err(|_| Error::NonNumeric {
        row,
        column: column.to_string(),
        value: raw.to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        });
    }
    Ok(v)
}

/// Parses a headered CSV. `row` numbers in errors are 1-based data rows.
pub fn read_csv<R: Read>(
    reader: R,
    label_column: Option<&str>,
    label_kind: LabelKind,
) -> Result<(DataMatrix, Option<LabelVector>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_idx = match label_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingLabelColumn(name.to_string()))?,
        ),
        None => None,
    };
    let cols = headers.len() - usize::from(label_idx.is_some());

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut rows = 0;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != headers.len() {
            return Err(Error::Ragged {
                row,
                found: record.len(),
                expected: headers.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            if Some(j) == label_idx {
                raw_labels.push(cell.trim().to_string());
            } else {
                values.push(parse_finite(cell, row, &headers[j])?);
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Empty("CSV has a header but no data rows".into()));
    }
    let matrix = DataMatrix::new(rows, cols, values)?;

    let labels = match (label_idx, label_kind) {
        (None, _) => None,
        (Some(_), LabelKind::OutlierBinary) => Some(LabelVector::Outlier(
            raw_labels
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    parse_outlier_label(s).ok_or_else(|| Error::InvalidLabel {
                        row: i + 1,
                        value: s.clone(),
                    })
                })
                .collect::<Result<_>>()?,
        )),
        (Some(_), LabelKind::ClassLabel) => Some(LabelVector::classes_from(&raw_labels)),
    };
    Ok((matrix, labels))
}

pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: Option<&str>,
    label_kind: LabelKind,
) -> Result<(DataMatrix, Option<LabelVector>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(file), label_column, label_kind)
}

/// Shortest decimal that parses back to the same `f64` (always carries a
/// decimal point or exponent).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_scores_to<W: Write>(out: W, scores: &[f64], flags: Option<&[bool]>) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::Empty("no scores to write".into()));
    }
    if let Some(f) = flags {
        if f.len() != scores.len() {
            return Err(Error::LengthMismatch {
                left: scores.len(),
                right: f.len(),
            });
        }
    }
    if let Some(v) = scores.iter().find(|v| !v.is_finite()) {
        return Err(Error::param("scores", format!("non-finite score {v}")));
    }
    let mut w = BufWriter::new(out);
    let io = |e| Error::io("<scores>", e);
    if flags.is_some() {
        writeln!(w, "row_index,score,rare").map_err(io)?;
    } else {
        writeln!(w, "row_index,score").map_err(io)?;
    }
    for (i, s) in scores.iter().enumerate() {
        match flags {
            Some(f) => writeln!(w, "{i},{},{}", fmt_f64(*s), u8::from(f[i])),
            None => writeln!(w, "{i},{}", fmt_f64(*s)),
        }
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_scores(path: impl AsRef<Path>, scores: &[f64], flags: Option<&[bool]>) -> Result<()> {
    let path = path.as_ref();
    if scores.is_empty() {
        return Err(Error::Empty("no scores to write".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_scores_to(file, scores, flags)
}

/// Reads the `score` column of a scores file, in file order.
pub fn read_scores<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let idx = headers
        .iter()
        .position(|h| h.trim() == "score")
        .ok_or_else(|| Error::MissingLabelColumn("score".into()))?;
    let mut scores = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        scores.push(parse_finite(record.get(idx).unwrap_or(""), i + 1, "score")?);
    }
    if scores.is_empty() {
        return Err(Error::Empty("scores file has no rows".into()));
    }
    Ok(scores)
}

/// Writes `x0..x{d-1}[,label]` with full-precision values.
pub fn write_matrix_to<W: Write>(out: W, data: &DataMatrix, labels: Option<&[String]>) -> Result<()> {
    let mut w = BufWriter::new(out);
    let io = |e| Error::io("<matrix>", e);
    let mut header: Vec<String> = (0..data.cols()).map(|j| format!("x{j}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for (i, row) in data.iter_rows().enumerate() {
        let mut line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        if let Some(l) = labels {
            line.push(l[i].clone());
        }
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_csv() {
        let (m, l) = read_csv("a,b\n0,1\n2,3\n4,5".as_bytes(), None, LabelKind::OutlierBinary).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(m.feature_mins(), &[0.0, 1.0]);
        assert_eq!(m.feature_maxs(), &[4.0, 5.0]);
        assert!(l.is_none());
    }

    #[test]
    fn label_column_is_excluded() {
        let src = "a,y,b\n0,0,1\n2,1,3\n4,1,5\n6,0,7";
        let (m, l) = read_csv(src.as_bytes(), Some("y"), LabelKind::OutlierBinary).unwrap();
        assert_eq!(m.cols(), 2);
        assert_eq!(m.row(1), &[2.0, 3.0]);
        let flags = l.unwrap();
        let flags = flags.outlier_flags().unwrap();
        assert_eq!(flags.iter().filter(|&&f| f).count(), 2);
    }

    #[test]
    fn class_labels_register_first_seen() {
        let src = "a,y\n0,b\n1,a\n2,b\n3,c";
        let (_, l) = read_csv(src.as_bytes(), Some("y"), LabelKind::ClassLabel).unwrap();
        match l.unwrap() {
            LabelVector::Class { values, registry } => {
                assert_eq!(registry, vec!["b", "a", "c"]);
                assert_eq!(values, vec![0, 1, 0, 2]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_cells() {
        let err = read_csv("a,b\n0,1\n2,inf".as_bytes(), None, LabelKind::OutlierBinary).unwrap_err();
        match err {
            Error::NonFinite { row, column, .. } => assert_eq!((row, column.as_str()), (2, "b")),
            other => panic!("unexpected {other}"),
        }
        let err = read_csv("a,b\n0,x".as_bytes(), None, LabelKind::OutlierBinary).unwrap_err();
        assert!(matches!(err, Error::NonNumeric { row: 1, .. }), "{err}");
        let err = read_csv("a,b\n0,NaN".as_bytes(), None, LabelKind::OutlierBinary).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
        let err = read_csv("a,b\n".as_bytes(), None, LabelKind::OutlierBinary).unwrap_err();
        assert!(matches!(err, Error::Empty(_)));
        let err = read_csv("a,b\n0,1".as_bytes(), Some("y"), LabelKind::OutlierBinary).unwrap_err();
        assert!(matches!(err, Error::MissingLabelColumn(_)));
        let err = read_csv("a,y\n0,2".as_bytes(), Some("y"), LabelKind::OutlierBinary).unwrap_err();
        assert!(matches!(err, Error::InvalidLabel { .. }));
    }

    #[test]
    fn missing_file() {
        let err = load_csv("/nonexistent/x.csv", None, LabelKind::OutlierBinary).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn score_files() {
        let mut buf = Vec::new();
        write_scores_to(&mut buf, &[0.0], None).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "row_index,score\n0,0.0\n");

        let mut buf = Vec::new();
        write_scores_to(&mut buf, &[1.5, 2.25], Some(&[false, true])).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "row_index,score,rare\n0,1.5,0\n1,2.25,1\n"
        );
        assert_eq!(read_scores(buf.as_slice()).unwrap(), vec![1.5, 2.25]);

        assert!(write_scores_to(Vec::new(), &[], None).is_err());
        let dir = tempfile::tempdir().unwrap();
        assert!(write_scores(dir.path().join("s.csv"), &[], None).is_err());
        assert!(write_scores(dir.path().join("missing/s.csv"), &[1.0], None).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(rows in 1usize..8, cols in 1usize..5, seed in prop::collection::vec(-1e12f64..1e12, 40)) {
            let values: Vec<f64> = (0..rows * cols).map(|k| seed[k % seed.len()] / (k as f64 + 0.7)).collect();
            let m = DataMatrix::new(rows, cols, values).unwrap();
            let mut buf = Vec::new();
            write_matrix_to(&mut buf, &m, None).unwrap();
            let (back, _) = read_csv(buf.as_slice(), None, LabelKind::OutlierBinary).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
