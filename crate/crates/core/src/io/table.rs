use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::mapping::{uniform_to_gaussian, ParameterRange};
use super::write_atomic;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// How the input columns of a dataset file are to be read.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnSchema {
    /// Standard Gaussian coordinates; `dimension` is checked when given.
    Gaussian { dimension: Option<usize> },
    /// Physical values, matched to ranges by column name and mapped to
    /// Gaussian coordinates.
    Physical(Vec<ParameterRange>),
}

impl Default for ColumnSchema {
    fn default() -> Self {
        ColumnSchema::Gaussian { dimension: None }
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_error(path: &Path, line: u64, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

/// Reads a header row of input column names followed by one output column.
pub fn read_dataset_csv(path: &Path, schema: &ColumnSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(crate::error::open_file(path)?);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if headers.len() < 2 {
        return Err(parse_error(path, 1, 1, "need at least one input column and one output column"));
    }
    let d = headers.len() - 1;
    let order: Option<(Vec<usize>, &[ParameterRange])> = match schema {
        ColumnSchema::Gaussian { dimension: Some(want) } if *want != d => {
            return Err(parse_error(path, 1, 1, format!("expected {want} input columns, found {d}")));
        }
        ColumnSchema::Gaussian { .. } => None,
        ColumnSchema::Physical(ranges) => {
            if ranges.len() != d {
                return Err(parse_error(
                    path,
                    1,
                    1,
                    format!("{} parameter ranges for {d} input columns", ranges.len()),
                ));
            }
            let mut idx = Vec::with_capacity(d);
            for (col, name) in headers[..d].iter().enumerate() {
                let pos = ranges
                    .iter()
                    .position(|r| &r.name == name)
                    .ok_or_else(|| parse_error(path, 1, col + 1, format!("no range given for column `{name}`")))?;
                idx.push(pos);
            }
            Some((idx, ranges.as_slice()))
        }
    };

    let mut values: Vec<f64> = Vec::new();
    let mut outputs: Vec<f64> = Vec::new();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record)? {
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != d + 1 {
            return Err(parse_error(
                path,
                line,
                record.len().min(d + 1),
                format!("expected {} fields, found {}", d + 1, record.len()),
            ));
        }
        let mut row = Vec::with_capacity(d + 1);
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(path, line, col + 1, format!("cannot parse `{field}` as a real")))?;
            if !v.is_finite() {
                return Err(parse_error(path, line, col + 1, format!("non-finite value `{field}`")));
            }
            row.push(v);
        }
        let u = row.pop().expect("row has d + 1 entries");
        match &order {
            None => values.extend(row),
            Some((idx, ranges)) => {
                let ordered: Vec<ParameterRange> = idx.iter().map(|&i| ranges[i].clone()).collect();
                let xi = uniform_to_gaussian(&row, &ordered).map_err(|e| parse_error(path, line, 0, e.to_string()))?;
                values.extend(xi);
            }
        }
        outputs.push(u);
    }
    if outputs.is_empty() {
        return Err(parse_error(path, 2, 1, "no data rows"));
    }
    let n = outputs.len();
    Dataset::new(DMatrix::from_row_slice(n, d, &values), DVector::from_vec(outputs))
}

/// Writes the `xi_1,…,xi_d,u` layout.
pub fn write_dataset_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut headers: Vec<String> = (1..=data.dimension()).map(|i| format!("xi_{i}")).collect();
    headers.push("u".into());
    let rows: Vec<Vec<f64>> = (0..data.len())
        .map(|i| {
            let mut r: Vec<f64> = data.inputs().row(i).iter().copied().collect();
            r.push(data.outputs()[i]);
            r
        })
        .collect();
    write_table_csv(path, &headers, &rows)
}

/// A numeric table with a header row.
pub fn write_table_csv<S: AsRef<str>>(path: &Path, headers: &[S], rows: &[Vec<f64>]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(headers.iter().map(|h| h.as_ref()))?;
    for row in rows {
        if row.len() != headers.len() {
            return Err(Error::DimensionMismatch {
                expected: headers.len(),
                actual: row.len(),
                context: "table row vs header",
            });
        }
        writer.write_record(row.iter().map(|v| format_real(*v)))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}
