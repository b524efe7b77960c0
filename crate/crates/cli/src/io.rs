//! JSON file formats.
//!
//! Matrices are `{"rows", "cols", "data"}` with `data` row-major and every
//! entry a `[re, im]` pair. Numbers go through serde_json's shortest
//! round-trip formatting, so parsing what we wrote gives back the same bits.

use std::fs;
use std::path::Path;

use opext::{CMatrix, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {0}: {1}")]
    Read(String, std::io::Error),
    #[error("cannot parse {0}: {1}")]
    Parse(String, serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let data = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        MatrixFile { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> Result<CMatrix, IoError> {
        if self.data.len() != self.rows {
            return Err(IoError::Invalid(format!("matrix declares {} rows but data has {}", self.rows, self.data.len())));
        }
        for (i, row) in self.data.iter().enumerate() {
            if row.len() != self.cols {
                return Err(IoError::Invalid(format!("row {i} has {} entries, expected {}", row.len(), self.cols)));
            }
            if row.iter().flatten().any(|x| !x.is_finite()) {
                return Err(IoError::Invalid(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i][j];
            C64::new(re, im)
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub t11: MatrixFile,
    pub t21: MatrixFile,
    pub t12: MatrixFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallFile {
    pub center: MatrixFile,
    pub r_left: MatrixFile,
    pub r_right: MatrixFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleFile {
    pub c1: MatrixFile,
    pub c2: MatrixFile,
    pub r_left: MatrixFile,
    pub r_right: MatrixFile,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| IoError::Read(name.clone(), e))?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse(name, e))
}

pub fn read_matrix(path: &Path) -> Result<CMatrix, IoError> {
    read_json::<MatrixFile>(path)?.to_matrix()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("domain types serialize")
}
