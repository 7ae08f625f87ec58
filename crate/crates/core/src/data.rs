//! Column-oriented datasets and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marginal scale of a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Raw observations.
    X,
    /// Copula scale, every entry in (0, 1).
    U,
    /// Standard normal scores.
    Z,
}

/// `n x d` observations stored by column. Column `j` belongs to variable `j + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
    scale: Scale,
}

impl Dataset {
    pub fn new(labels: Vec<String>, columns: Vec<Vec<f64>>, scale: Scale) -> Result<Self> {
        if labels.len() != columns.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} columns",
                labels.len(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::invalid(format!("column {} has {} rows, expected {n}", j + 1, col.len())));
            }
            for (i, &x) in col.iter().enumerate() {
                let ok = match scale {
                    Scale::U => x > 0.0 && x < 1.0,
                    _ => x.is_finite(),
                };
                if !ok {
                    return Err(Error::invalid(format!(
                        "entry (row {}, column {}) = {x} is not valid on the {scale:?} scale",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Dataset { labels, columns, scale })
    }

    /// Labels `V1..Vd`.
    pub fn from_columns(columns: Vec<Vec<f64>>, scale: Scale) -> Result<Self> {
        let labels = (1..=columns.len()).map(|j| format!("V{j}")).collect();
        Dataset::new(labels, columns, scale)
    }

    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>], scale: Scale) -> Result<Self> {
        let d = labels.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::invalid(format!("row {} has {} values, expected {d}", i + 1, row.len())));
            }
            for (j, &x) in row.iter().enumerate() {
                columns[j].push(x);
            }
        }
        Dataset::new(labels, columns, scale)
    }

    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Column of variable `v` (1-based).
    pub fn var(&self, v: usize) -> &[f64] {
        &self.columns[v - 1]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<Vec<f64>> {
        self.columns
    }

    pub(crate) fn with_columns(&self, columns: Vec<Vec<f64>>, scale: Scale) -> Result<Self> {
        Dataset::new(self.labels.clone(), columns, scale)
    }

    /// Guesses the scale of freshly parsed values: `U` when every entry lies
    /// in (0, 1), else `X`.
    pub fn detect_scale(columns: &[Vec<f64>]) -> Scale {
        if columns.iter().flatten().all(|&x| x > 0.0 && x < 1.0) {
            Scale::U
        } else {
            Scale::X
        }
    }

    /// Reads a CSV with a header row of labels. `scale = None` detects it.
    pub fn read_csv<R: Read>(reader: R, scale: Option<Scale>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let labels: Vec<String> = rdr
            .headers()
            .map_err(csv_error)?
            .iter()
            .map(str::to_string)
            .collect();
        if labels.is_empty() || labels.iter().all(String::is_empty) {
            return Err(Error::Parse { line: 1, message: "missing header row".into() });
        }
        let d = labels.len();
        let mut columns = vec![Vec::new(); d];
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_error)?;
            let line = i + 2;
            if rec.len() != d {
                return Err(Error::Parse {
                    line,
                    message: format!("{} fields, header has {d}", rec.len()),
                });
            }
            for (j, field) in rec.iter().enumerate() {
                let x: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {} ({}): '{field}' is not a number", j + 1, labels[j]),
                })?;
                if !x.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("column {} ({}): value is not finite", j + 1, labels[j]),
                    });
                }
                columns[j].push(x);
            }
        }
        if columns[0].is_empty() {
            return Err(Error::Parse { line: 2, message: format!("no data rows ({d} columns in header)") });
        }
        let scale = scale.unwrap_or_else(|| Dataset::detect_scale(&columns));
        Dataset::new(labels, columns, scale)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.labels).map_err(csv_error)?;
        let mut buf = Vec::with_capacity(self.d());
        for i in 0..self.n() {
            buf.clear();
            buf.extend(self.columns.iter().map(|c| c[i].to_string()));
            w.write_record(&buf).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("csv output is utf-8")
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse { line, message: format!("{kind:?}") },
    }
}

/// Average ranks (1-based) with ties sharing the mean rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_and_detection() {
        let text = "a,b\n0.25,0.5\n0.75,0.125\n";
        let ds = Dataset::read_csv(text.as_bytes(), None).unwrap();
        assert_eq!(ds.scale(), Scale::U);
        assert_eq!(ds.var(2), &[0.5, 0.125]);
        assert_eq!(ds.to_csv_string(), text);
        let raw = Dataset::read_csv("x,y\n3.5,-1\n2,0\n".as_bytes(), None).unwrap();
        assert_eq!(raw.scale(), Scale::X);
    }

    #[test]
    fn csv_errors_name_rows_and_columns() {
        let err = Dataset::read_csv("".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = Dataset::read_csv("a,b\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = Dataset::read_csv("a,b\n1,2\n3,x\n".as_bytes(), None).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("column 2"), "{message}");
            }
            e => panic!("{e}"),
        }
        assert!(Dataset::read_csv("a,b\n1,2\n3\n".as_bytes(), None).is_err());
    }

    #[test]
    fn u_scale_rejects_boundary() {
        assert!(Dataset::from_columns(vec![vec![0.0, 0.5]], Scale::U).is_err());
        assert!(Dataset::from_columns(vec![vec![0.5, 1.0]], Scale::U).is_err());
        assert!(Dataset::from_columns(vec![vec![f64::NAN]], Scale::Z).is_err());
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(ranks(&[3.2, 1.1, 9.9, 0.4, 5.5]), vec![3.0, 2.0, 5.0, 1.0, 4.0]);
        assert_eq!(ranks(&[1.0, 2.0, 1.0]), vec![1.5, 3.0, 1.5]);
    }
}
