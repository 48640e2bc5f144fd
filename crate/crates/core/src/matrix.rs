//! Dense row-major feature matrices keyed by document id.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix shape mismatch: {rows} row ids x {cols} columns needs {expected} values, got {found}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("row id {0} not in matrix")]
    UnknownRow(String),
    #[error("feature file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("feature csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("feature csv record {record}: {message}")]
    Format { record: usize, message: String },
}

/// Rows are documents, columns are features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    row_ids: Vec<String>,
    column_names: Vec<String>,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(
        row_ids: Vec<String>,
        column_names: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self, MatrixError> {
        let expected = row_ids.len() * column_names.len();
        if values.len() != expected {
            return Err(MatrixError::Shape {
                rows: row_ids.len(),
                cols: column_names.len(),
                expected,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let cols = column_names.len();
            return Err(MatrixError::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self {
            row_ids,
            column_names,
            values,
        })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(
        row_ids: Vec<String>,
        column_names: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, MatrixError> {
        let cols = column_names.len();
        let mut values = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            if row.len() != cols {
                return Err(MatrixError::Shape {
                    rows: rows.len(),
                    cols,
                    expected: rows.len() * cols,
                    found: values.len() + row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(row_ids, column_names, values)
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    /// New matrix holding the listed rows in the listed order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let c = self.n_cols();
        let mut values = Vec::with_capacity(indices.len() * c);
        let mut row_ids = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            row_ids.push(self.row_ids[i].clone());
        }
        FeatureMatrix {
            row_ids,
            column_names: self.column_names.clone(),
            values,
        }
    }

    /// New matrix holding the rows with the given ids, in that order.
    pub fn select_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<FeatureMatrix, MatrixError> {
        let index: HashMap<&str, usize> = self
            .row_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let rows = ids
            .iter()
            .map(|id| {
                index
                    .get(id.as_ref())
                    .copied()
                    .ok_or_else(|| MatrixError::UnknownRow(id.as_ref().to_owned()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.select_rows(&rows))
    }

    /// CSV with a `doc_id` column followed by the feature columns; values
    /// carry 9 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MatrixError> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = Vec::with_capacity(self.n_cols() + 1);
        header.push("doc_id");
        header.extend(self.column_names.iter().map(String::as_str));
        writer.write_record(&header)?;
        let mut record = Vec::with_capacity(self.n_cols() + 1);
        for (id, row) in self.row_ids.iter().zip(self.rows()) {
            record.clear();
            record.push(id.clone());
            record.extend(row.iter().map(|v| format_sig9(*v)));
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| MatrixError::Csv(e.into()))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<FeatureMatrix, MatrixError> {
        let mut reader = csv::Reader::from_reader(input);
        let header = reader.headers()?.clone();
        if header.get(0) != Some("doc_id") {
            return Err(MatrixError::Format {
                record: 0,
                message: "first column must be doc_id".into(),
            });
        }
        let column_names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut row_ids = Vec::new();
        let mut values = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record?;
            let mut fields = record.iter();
            row_ids.push(fields.next().unwrap_or_default().to_owned());
            for field in fields {
                let v: f64 = field.parse().map_err(|_| MatrixError::Format {
                    record: idx + 1,
                    message: format!("not a number: {field:?}"),
                })?;
                values.push(v);
            }
        }
        FeatureMatrix::new(row_ids, column_names, values)
    }

    pub fn save(&self, path: &Path) -> Result<(), MatrixError> {
        let file = fs::File::create(path).map_err(|source| MatrixError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.write_csv(io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<FeatureMatrix, MatrixError> {
        let file = fs::File::open(path).map_err(|source| MatrixError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::read_csv(io::BufReader::new(file))
    }
}

/// Formats like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_fraction(&fixed).to_owned()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(0.5), "0.5");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(-2.0 / 3.0), "-0.666666667");
        assert_eq!(format_sig9(123456789.0), "123456789");
        assert_eq!(format_sig9(1234567890.0), "1.23456789e9");
        assert_eq!(format_sig9(0.000012345), "1.2345e-5");
        assert_eq!(format_sig9(0.00012345), "0.00012345");
    }

    #[test]
    fn shape_and_finiteness_checked() {
        let err = FeatureMatrix::new(vec!["a".into()], vec!["x".into(), "y".into()], vec![1.0]);
        assert!(matches!(err, Err(MatrixError::Shape { .. })));
        let err = FeatureMatrix::new(vec!["a".into()], vec!["x".into()], vec![f64::NAN]);
        assert!(matches!(err, Err(MatrixError::NonFinite { row: 0, col: 0 })));
    }

    #[test]
    fn select_by_id() {
        let m = FeatureMatrix::from_rows(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["x".into()],
            vec![vec![1.0], vec![2.0], vec![3.0]],
        )
        .unwrap();
        let s = m.select_ids(&["c", "a"]).unwrap();
        assert_eq!(s.values(), &[3.0, 1.0]);
        assert!(matches!(m.select_ids(&["z"]), Err(MatrixError::UnknownRow(_))));
    }

    #[test]
    fn csv_layout() {
        let m = FeatureMatrix::from_rows(
            vec!["d1".into(), "d2".into()],
            vec!["the court".into(), "held".into()],
            vec![vec![0.0, 1.5], vec![1.0 / 3.0, 2.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "doc_id,the court,held\nd1,0,1.5\nd2,0.333333333,2\n"
        );
        let back = FeatureMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.row_ids(), m.row_ids());
        assert_eq!(back.column_names(), m.column_names());
    }

    proptest! {
        #[test]
        fn csv_round_trip_within_nine_digits(vals in proptest::collection::vec(-1e6f64..1e6, 1..20)) {
            let n = vals.len();
            let m = FeatureMatrix::new(vec!["r".into()], (0..n).map(|i| format!("c{i}")).collect(), vals.clone()).unwrap();
            let mut buf = Vec::new();
            m.write_csv(&mut buf).unwrap();
            let back = FeatureMatrix::read_csv(buf.as_slice()).unwrap();
            for (a, b) in vals.iter().zip(back.values()) {
                prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300) + 1e-300);
            }
            // formatting is a fixed point after one round
            let mut again = Vec::new();
            back.write_csv(&mut again).unwrap();
            prop_assert_eq!(buf, again);
        }
    }
}
