//! Labeled datasets as CSV: header `x1,...,xd,y`, labels `+1`/`-1`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use dwsvm_core::{Label, LabeledDataset};

use crate::error::{AppError, AppResult};

fn data_err(source: &str, msg: impl std::fmt::Display) -> AppError {
    AppError::Data(format!("{source}: {msg}"))
}

/// Number of feature columns in a header `x1..xd` optionally followed by `y`.
fn check_header(header: &csv::StringRecord, require_label: bool, source: &str) -> AppResult<(usize, bool)> {
    let fields: Vec<&str> = header.iter().map(str::trim).collect();
    let has_label = fields.last() == Some(&"y");
    if require_label && !has_label {
        return Err(data_err(source, "last column must be 'y'"));
    }
    let dim = fields.len() - usize::from(has_label);
    if dim == 0 {
        return Err(data_err(source, "no feature columns"));
    }
    for (j, name) in fields[..dim].iter().enumerate() {
        if *name != format!("x{}", j + 1) {
            return Err(data_err(source, format!("column {} must be named x{}, found '{name}'", j + 1, j + 1)));
        }
    }
    Ok((dim, has_label))
}

struct Table {
    dim: usize,
    features: Vec<f64>,
    labels: Option<Vec<Label>>,
}

fn read_table(reader: impl Read, require_label: bool, source: &str) -> AppResult<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| data_err(source, e))?.clone();
    let (dim, has_label) = check_header(&header, require_label, source)?;
    let mut features = Vec::new();
    let mut labels = has_label.then(Vec::new);
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| data_err(source, e))?;
        let line = row + 2;
        for j in 0..dim {
            let text = record[j].trim();
            let v: f64 = text
                .parse()
                .map_err(|_| data_err(source, format!("line {line}: '{text}' is not a number")))?;
            features.push(v);
        }
        if let Some(labels) = labels.as_mut() {
            let text = record[dim].trim();
            labels.push(Label::parse(text).ok_or_else(|| data_err(source, format!("line {line}: label '{text}' is not +1 or -1")))?);
        }
    }
    if features.is_empty() {
        return Err(data_err(source, "no observations"));
    }
    Ok(Table { dim, features, labels })
}

pub fn read_dataset_from(reader: impl Read, source: &str) -> AppResult<LabeledDataset> {
    let t = read_table(reader, true, source)?;
    let labels = t.labels.unwrap_or_default();
    LabeledDataset::new(t.features, labels, t.dim).map_err(|e| data_err(source, e))
}

pub fn read_dataset(path: &Path) -> AppResult<LabeledDataset> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    read_dataset_from(file, &path.display().to_string())
}

/// Feature rows (row-major) and their dimension; a trailing `y` column is ignored.
pub fn read_features(path: &Path) -> AppResult<(Vec<f64>, usize)> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let source = path.display().to_string();
    let t = read_table(file, false, &source)?;
    if let Some(pos) = t.features.iter().position(|v| !v.is_finite()) {
        return Err(data_err(&source, format!("non-finite feature at row {}", pos / t.dim + 1)));
    }
    Ok((t.features, t.dim))
}

pub fn write_dataset_to(mut w: impl Write, data: &LabeledDataset) -> std::io::Result<()> {
    let header: Vec<String> = (1..=data.dim()).map(|j| format!("x{j}")).collect();
    writeln!(w, "{},y", header.join(","))?;
    for (row, label) in data.rows().zip(data.labels()) {
        for v in row {
            write!(w, "{v},")?;
        }
        writeln!(w, "{label}")?;
    }
    w.flush()
}

pub fn write_dataset(path: &Path, data: &LabeledDataset) -> AppResult<()> {
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    write_dataset_to(std::io::BufWriter::new(file), data).map_err(|e| AppError::io(path, e))
}
