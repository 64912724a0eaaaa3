use std::fs;
use std::path::Path;

use crate::error::{FateError, Result};
use crate::linalg::Matrix;

use super::tabular::{read_table, CsvSchema, LabelMap};
use super::{Dataset, Provenance};

/// Binary layout: magic, u32 rows, u32 cols, then row-major little-endian f64.
pub const MATRIX_MAGIC: &[u8; 8] = b"FATEMAT1";
const HEADER_LEN: usize = 16;

/// Reads a matrix from the binary container or from a headed CSV.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    if bytes.starts_with(MATRIX_MAGIC) {
        return decode_matrix(&bytes);
    }
    let table = read_table(path)?;
    let mut m = Matrix::zeros(table.records.len(), table.headers.len());
    for j in 0..table.headers.len() {
        m.set_column(j, &table.reals(j)?);
    }
    Ok(m)
}

fn decode_matrix(bytes: &[u8]) -> Result<Matrix> {
    let bad = |message: String| FateError::Parse { row: 0, column: "header".into(), message };
    if bytes.len() < HEADER_LEN {
        return Err(bad("truncated header".into()));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
    let payload = &bytes[HEADER_LEN..];
    if rows == 0 || cols == 0 {
        return Err(FateError::EmptyFile);
    }
    if payload.len() != rows * cols * 8 {
        return Err(bad(format!(
            "expected {} payload bytes for {rows}×{cols}, found {}",
            rows * cols * 8,
            payload.len()
        )));
    }
    let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let m = Matrix::from_vec(rows, cols, data)?;
    if !m.is_finite() {
        return Err(bad("non-finite entries".into()));
    }
    Ok(m)
}

pub fn write_matrix_bin(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = Vec::with_capacity(HEADER_LEN + 8 * m.as_slice().len());
    bytes.extend_from_slice(MATRIX_MAGIC);
    bytes.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    bytes.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    for v in m.as_slice() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// External embeddings with labels from a separate CSV; `schema.features` is
/// ignored.
pub fn load_embeddings(path: impl AsRef<Path>, labels_path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let (path, labels_path) = (path.as_ref(), labels_path.as_ref());
    let x = read_matrix(path)?;
    let table = read_table(labels_path)?;
    if table.records.len() != x.rows() {
        return Err(FateError::RowCountMismatch { left: x.rows(), right: table.records.len() });
    }
    let target_raw = table.strings(table.column_index(&schema.target)?);
    let sensitive_raw = table.strings(table.column_index(&schema.sensitive)?);
    let target_map = LabelMap::fit(&target_raw);
    let sensitive_map = LabelMap::fit(&sensitive_raw);
    let names = (0..x.cols()).map(|j| format!("e{j}")).collect();
    Dataset::with_classes(
        x,
        target_map.encode(&target_raw),
        sensitive_map.encode(&sensitive_raw),
        target_map.len(),
        sensitive_map.len(),
        names,
        Provenance::Embeddings {
            path: path.display().to_string(),
            labels_path: labels_path.display().to_string(),
            target_map,
            sensitive_map,
        },
    )
}
