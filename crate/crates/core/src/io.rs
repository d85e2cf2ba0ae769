//! File formats: numeric CSV, the `fmat` binary matrix container, label
//! files, and embedding coordinate CSVs.
//!
//! `fmat` layout: magic bytes `FMAT`, two little-endian `u64` values
//! (rows `d`, cols `n`), then `d * n` little-endian IEEE-754 `f32` values
//! in column-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::data::{DataMatrix, LabelVector};
use crate::error::{Error, Result};
use crate::matrix::Mat;

const FMAT_MAGIC: &[u8; 4] = b"FMAT";

/// Declared on-disk layout of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Comma-separated values, features as rows by default.
    Csv,
    /// Binary `fmat` matrix.
    Fmat,
}

/// Loads a dataset in the given format. For CSV, an optional header row is
/// detected (any non-numeric cell in the first row) and becomes the feature
/// names; `transpose` accepts samples-as-rows files.
pub fn load_dataset(path: &Path, format: DataFormat, transpose: bool) -> Result<DataMatrix> {
    let (mat, header) = match format {
        DataFormat::Csv => read_csv_matrix(path)?,
        DataFormat::Fmat => (read_fmat(path)?, None),
    };
    // the header names the file's columns: features in a samples-as-rows
    // file, sample ids in the features-as-rows orientation
    if transpose {
        DataMatrix::new(mat.transpose(), header, None)
    } else {
        DataMatrix::new(mat, None, header)
    }
}

fn read_csv_matrix(path: &Path) -> Result<(Mat, Option<Vec<String>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut header: Option<Vec<String>> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Vec<Option<f64>> = cells.iter().map(|c| c.parse::<f64>().ok()).collect();
        if lineno == 0 && parsed.iter().any(Option::is_none) {
            header = Some(cells.iter().map(|c| c.to_string()).collect());
            continue;
        }
        let mut row = Vec::with_capacity(cells.len());
        for (col, value) in parsed.iter().enumerate() {
            match value {
                Some(v) if v.is_finite() => row.push(*v),
                Some(_) => {
                    return Err(Error::Format(format!(
                        "non-finite value at line {}, column {} of {}",
                        lineno + 1,
                        col + 1,
                        path.display()
                    )))
                }
                None => {
                    return Err(Error::Format(format!(
                        "non-numeric cell `{}` at line {}, column {} of {}",
                        cells[col],
                        lineno + 1,
                        col + 1,
                        path.display()
                    )))
                }
            }
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Format(format!(
                    "ragged row at line {} of {}: {} cells, expected {}",
                    lineno + 1,
                    path.display(),
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format(format!("no data rows in {}", path.display())));
    }
    let n_cols = rows[0].len();
    // the header must cover one cell per sample column; a mismatch means the
    // first row was data with a stray string
    if let Some(h) = &header {
        if h.len() != n_cols {
            return Err(Error::Format(format!(
                "header has {} cells but rows have {} in {}",
                h.len(),
                n_cols,
                path.display()
            )));
        }
    }
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    let n_rows = data.len() / n_cols;
    Ok((Mat::from_vec(n_rows, n_cols, data), header))
}

/// Reads an `fmat` file into a row-major matrix.
pub fn read_fmat(path: &Path) -> Result<Mat> {
    let mut file = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
    if &magic != FMAT_MAGIC {
        return Err(Error::Format(format!(
            "{} is not an fmat file (bad magic)",
            path.display()
        )));
    }
    let mut header = [0u8; 16];
    file.read_exact(&mut header).map_err(|e| Error::io(path, e))?;
    let d = u64::from_le_bytes(header[..8].try_into().unwrap()) as usize;
    let n = u64::from_le_bytes(header[8..].try_into().unwrap()) as usize;
    let count = d.checked_mul(n).ok_or_else(|| {
        Error::Format(format!("fmat shape {d}x{n} overflows in {}", path.display()))
    })?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() != count * 4 {
        return Err(Error::Format(format!(
            "fmat payload of {} has {} bytes, expected {}",
            path.display(),
            bytes.len(),
            count * 4
        )));
    }
    let mut mat = Mat::zeros(d, n);
    for j in 0..n {
        for i in 0..d {
            let off = (j * d + i) * 4;
            let v = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            mat.set(i, j, v as f64);
        }
    }
    Ok(mat)
}

/// Writes a matrix as `fmat` (values narrowed to `f32`).
pub fn write_fmat(path: &Path, mat: &Mat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>, bytes: &[u8]| -> Result<()> {
        w.write_all(bytes).map_err(|e| Error::io(path, e))
    };
    write(&mut w, FMAT_MAGIC)?;
    write(&mut w, &(mat.rows() as u64).to_le_bytes())?;
    write(&mut w, &(mat.cols() as u64).to_le_bytes())?;
    for j in 0..mat.cols() {
        for i in 0..mat.rows() {
            write(&mut w, &(mat.get(i, j) as f32).to_le_bytes())?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a label file: one non-negative integer per line.
pub fn read_labels(path: &Path) -> Result<LabelVector> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: i64 = t.parse().map_err(|_| {
            Error::Format(format!(
                "bad label `{t}` at line {} of {}",
                lineno + 1,
                path.display()
            ))
        })?;
        if v < 0 {
            return Err(Error::Format(format!(
                "negative label at line {} of {}",
                lineno + 1,
                path.display()
            )));
        }
        labels.push(v as usize);
    }
    LabelVector::new(labels)
}

pub fn write_labels(path: &Path, labels: &LabelVector) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for &l in labels.as_slice() {
        writeln!(w, "{l}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes embedding coordinates as CSV: one row per point, one column per
/// output dimension, full `f64` round-trip precision.
pub fn write_coords_csv(path: &Path, coords: &Mat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for i in 0..coords.rows() {
        let row: Vec<String> = coords.row(i).iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", row.join(",")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a coordinate CSV written by [`write_coords_csv`].
pub fn read_coords_csv(path: &Path) -> Result<Mat> {
    let (mat, header) = read_csv_matrix(path)?;
    if header.is_some() {
        return Err(Error::Format(format!(
            "coordinate file {} must not have a header row",
            path.display()
        )));
    }
    Ok(mat)
}
