//! JSON encodings shared by reports and the command line.
//!
//! Matrices are encoded as `{"re": [[…]], "im": [[…]]}`, row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (r, cols) = m.shape();
        let re = (0..r).map(|i| (0..cols).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..r).map(|i| (0..cols).map(|j| m[(i, j)].im).collect()).collect();
        MatrixJson { re, im }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let r = self.re.len();
        let cols = self.re.first().map_or(0, |row| row.len());
        let shape_ok = self.im.len() == r
            && self.re.iter().all(|row| row.len() == cols)
            && self.im.iter().all(|row| row.len() == cols);
        if !shape_ok {
            return Err(Error::Shape("\"re\" and \"im\" must be equally sized rectangular arrays".into()));
        }
        let m = CMatrix::from_fn(r, cols, |i, j| c(self.re[i][j], self.im[i][j]));
        crate::linalg::check_finite(&m)?;
        Ok(m)
    }
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson::from_matrix(m)
    }
}
