//! JSON matrix interchange.
//!
//! ```json
//! {"rows": 4, "cols": 4, "d1": 2, "d2": 2, "data": [[re, im], ...]}
//! ```
//!
//! `data` is row-major. Numbers are written in shortest round-trip form.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::matcore::{BipartiteOperator, CMatrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<usize>,
    pub data: Vec<[f64; 2]>,
}

/// Failure reading a matrix file; parse and shape problems are kept apart
/// so the CLI can map them to different exit codes.
#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Shape(#[from] Error),
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix, dims: Option<(usize, usize)>) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            d1: dims.map(|d| d.0),
            d2: dims.map(|d| d.1),
            data: m.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn from_bipartite(b: &BipartiteOperator) -> Self {
        Self::from_matrix(b.mat(), Some((b.d1(), b.d2())))
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.rows * self.cols != self.data.len() {
            return Err(Error::DimensionMismatch(format!(
                "rows*cols = {} but data has {} entries",
                self.rows * self.cols,
                self.data.len()
            )));
        }
        CMatrix::new(
            self.rows,
            self.cols,
            self.data.iter().map(|&[re, im]| C64::new(re, im)).collect(),
        )
    }

    /// Bipartite operator; factor dimensions fall back to an even split of
    /// a square matrix of size `n^2` when absent.
    pub fn to_bipartite(&self) -> Result<BipartiteOperator> {
        let m = self.to_matrix()?;
        match (self.d1, self.d2) {
            (Some(d1), Some(d2)) => BipartiteOperator::new(m, d1, d2),
            (None, None) => BipartiteOperator::square_split(m),
            _ => Err(Error::DimensionMismatch("d1 and d2 must be given together".into())),
        }
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.d1.zip(self.d2)
    }
}

pub fn parse_matrix_file(text: &str) -> Result<MatrixFile, ReadError> {
    let f: MatrixFile = serde_json::from_str(text).map_err(|e| ReadError::Parse(e.to_string()))?;
    if let (Some(d1), Some(d2)) = (f.d1, f.d2) {
        if d1 * d2 != f.rows || f.rows != f.cols {
            return Err(Error::DimensionMismatch(format!(
                "d1*d2 = {} does not match a {}x{} matrix",
                d1 * d2,
                f.rows,
                f.cols
            ))
            .into());
        }
    }
    Ok(f)
}

/// A list of matrices, used for Kraus operators.
pub fn parse_matrix_list(text: &str) -> Result<Vec<CMatrix>, ReadError> {
    let files: Vec<MatrixFile> =
        serde_json::from_str(text).map_err(|e| ReadError::Parse(e.to_string()))?;
    Ok(files.iter().map(MatrixFile::to_matrix).collect::<Result<_>>()?)
}

pub fn read_matrix_file(path: &std::path::Path) -> Result<MatrixFile, ReadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ReadError::Parse(format!("{}: {e}", path.display())))?;
    parse_matrix_file(&text)
}

pub fn to_json(f: &MatrixFile) -> String {
    serde_json::to_string(f).expect("matrix file serializes")
}

pub fn vector_value(v: &[C64]) -> Value {
    Value::Array(
        v.iter()
            .map(|z| serde_json::json!([z.re, z.im]))
            .collect(),
    )
}

pub fn matrix_value(m: &CMatrix, dims: Option<(usize, usize)>) -> Value {
    serde_json::to_value(MatrixFile::from_matrix(m, dims)).expect("matrix file serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_roundtrip() {
        let text = r#"{"rows":2,"cols":2,"data":[[1.0,0.0],[0.0,-0.5],[0.0,0.5],[2.0,0.0]]}"#;
        let f = parse_matrix_file(text).unwrap();
        let m = f.to_matrix().unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.0, -0.5));
        assert_eq!(to_json(&f), text);
    }

    #[test]
    fn shortest_roundtrip_numbers() {
        let m = CMatrix::new(1, 1, vec![C64::new(0.1 + 0.2, 1.0 / 3.0)]).unwrap();
        let text = to_json(&MatrixFile::from_matrix(&m, None));
        let back = parse_matrix_file(&text).unwrap().to_matrix().unwrap();
        assert_eq!(back, m);
        assert!(text.contains("0.30000000000000004"));
    }

    #[test]
    fn shape_errors() {
        let bad_len = r#"{"rows":2,"cols":2,"data":[[1,0]]}"#;
        let f = parse_matrix_file(bad_len).unwrap();
        assert!(f.to_matrix().is_err());
        let bad_dims = r#"{"rows":4,"cols":4,"d1":2,"d2":3,"data":[]}"#;
        assert!(matches!(parse_matrix_file(bad_dims), Err(ReadError::Shape(_))));
        assert!(matches!(parse_matrix_file("{"), Err(ReadError::Parse(_))));
    }

    #[test]
    fn bipartite_dims_inferred() {
        let m = CMatrix::identity(9);
        let f = MatrixFile::from_matrix(&m, None);
        let b = f.to_bipartite().unwrap();
        assert_eq!((b.d1(), b.d2()), (3, 3));
    }
}
