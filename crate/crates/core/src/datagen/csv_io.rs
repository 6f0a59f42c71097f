use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::Dataset;
use crate::error::{Result, VolNmfError};
use crate::linalg::Matrix;

const CORNER: &str = "label";

fn parse_err(line: u64, column: usize, message: impl Into<String>) -> VolNmfError {
    VolNmfError::Parse {
        line: line as usize,
        column,
        message: message.into(),
    }
}

fn is_number(s: &str) -> bool {
    s.trim().parse::<f64>().is_ok()
}

fn read_records<R: std::io::Read>(rdr: R) -> Result<Vec<(u64, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(rdr);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, 0, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        // Blank lines come through as a single empty field.
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

/// A header row is recognized by any non-numeric cell; a label column by a
/// non-numeric first cell in the first data row.
fn records_to_dataset(records: Vec<(u64, Vec<String>)>) -> Result<Dataset> {
    let Some((first_line, first)) = records.first() else {
        return Err(parse_err(1, 0, "empty input"));
    };
    let expected = first.len();
    for (line, rec) in &records {
        if rec.len() != expected {
            return Err(VolNmfError::RaggedRows {
                line: *line as usize,
                found: rec.len(),
                expected,
            });
        }
    }
    let has_header = first.iter().any(|c| !is_number(c));
    let body = &records[usize::from(has_header)..];
    if body.is_empty() {
        return Err(parse_err(*first_line, 0, "no numeric rows"));
    }
    let has_labels = !is_number(&body[0].1[0]);
    let skip = usize::from(has_labels);
    let cols = expected - skip;
    if cols == 0 {
        return Err(parse_err(body[0].0, 1, "no numeric columns"));
    }

    let mut data = Vec::with_capacity(body.len() * cols);
    let mut row_labels = Vec::new();
    for (line, rec) in body {
        if has_labels {
            row_labels.push(rec[0].trim().to_owned());
        }
        for (c, cell) in rec.iter().enumerate().skip(skip) {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(*line, c + 1, format!("not a number: '{cell}'")))?;
            if !v.is_finite() {
                return Err(parse_err(*line, c + 1, format!("non-finite value '{cell}'")));
            }
            data.push(v);
        }
    }
    let col_labels = has_header.then(|| first[skip..].iter().map(|s| s.trim().to_owned()).collect());
    let x = Matrix::new(body.len(), cols, data)?;
    Ok(Dataset {
        x,
        m_true: None,
        h_true: None,
        row_labels: has_labels.then_some(row_labels),
        col_labels,
    })
}

pub(crate) fn parse_csv_str(text: &str) -> Result<Dataset> {
    records_to_dataset(read_records(text.as_bytes())?)
}

/// Reads a rectangular numeric CSV with an optional header row and label
/// column.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = File::open(path.as_ref())
        .map_err(|e| VolNmfError::Io(format!("{}: {e}", path.as_ref().display())))?;
    records_to_dataset(read_records(file)?)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    load_csv(path).map(|d| d.x)
}

fn csv_error(e: csv::Error) -> VolNmfError {
    VolNmfError::Io(e.to_string())
}

/// Writes `d.x` with shortest round-trip float formatting. Row labels force
/// a header so the reader can tell the label column apart.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let x = &d.x;
    if let Some(r) = &d.row_labels {
        if r.len() != x.rows() {
            return Err(VolNmfError::ShapeMismatch(format!(
                "{} row labels for {} rows",
                r.len(),
                x.rows()
            )));
        }
    }
    if let Some(c) = &d.col_labels {
        if c.len() != x.cols() {
            return Err(VolNmfError::ShapeMismatch(format!(
                "{} column labels for {} columns",
                c.len(),
                x.cols()
            )));
        }
    }
    let file = File::create(path.as_ref())
        .map_err(|e| VolNmfError::Io(format!("{}: {e}", path.as_ref().display())))?;
    let mut w = csv::WriterBuilder::new().from_writer(BufWriter::new(file));

    let header: Option<Vec<String>> = match (&d.row_labels, &d.col_labels) {
        (_, Some(c)) => Some(c.clone()),
        (Some(_), None) => Some((1..=x.cols()).map(|j| format!("c{j}")).collect()),
        (None, None) => None,
    };
    if let Some(h) = header {
        let mut rec = Vec::with_capacity(h.len() + 1);
        if d.row_labels.is_some() {
            rec.push(CORNER.to_owned());
        }
        rec.extend(h);
        w.write_record(&rec).map_err(csv_error)?;
    }
    for i in 0..x.rows() {
        let mut rec = Vec::with_capacity(x.cols() + 1);
        if let Some(r) = &d.row_labels {
            rec.push(r[i].clone());
        }
        rec.extend(x.row(i).iter().map(|v| format!("{v:?}")));
        w.write_record(&rec).map_err(csv_error)?;
    }
    let mut inner = w.into_inner().map_err(|e| VolNmfError::Io(e.to_string()))?;
    inner.flush()?;
    Ok(())
}

pub fn write_matrix_csv(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    write_csv(&Dataset::from_matrix(m.clone()), path)
}
