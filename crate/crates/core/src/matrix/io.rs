use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// On-disk matrix: `{"n": int, "entries": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let data = self.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::from_row_major(self.n, data)
    }
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixFile { n: m.n(), entries: m.as_slice().iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl ComplexMatrix {
    /// Parses the JSON matrix format. Syntax errors carry line and column.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: MatrixFile = serde_json::from_str(s).map_err(|e| Error::InvalidMatrix(e.to_string()))?;
        f.to_matrix()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&MatrixFile::from(self)).expect("matrix serialization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)],
            vec![Complex64::new(0.0, 1e-300), Complex64::new(-3.0, 4.0)],
        ])
        .unwrap();
        let s = m.to_json_string();
        assert_eq!(ComplexMatrix::from_json_str(&s).unwrap(), m);
    }

    #[test]
    fn malformed_inputs_are_rejected_with_position() {
        match ComplexMatrix::from_json_str("{\"n\": 2,\n \"entries\": [[1, 0], [2 0]]}") {
            Err(Error::InvalidMatrix(msg)) => assert!(msg.contains("line 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(ComplexMatrix::from_json_str("{\"n\": 2, \"entries\": [[1, 0]]}").is_err());
        assert!(ComplexMatrix::from_json_str("{\"n\": 0, \"entries\": []}").is_err());
    }
}
