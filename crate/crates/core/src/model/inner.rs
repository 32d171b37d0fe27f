use crate::error::{Error, Result};
use crate::linalg::eigmin;
use crate::Matrix;

/// `<K1, K2>_Y = Tr(K1^T K2 Y)`.
pub fn weighted_inner(k1: &Matrix, k2: &Matrix, y: &Matrix) -> Result<f64> {
    if k1.shape() != k2.shape() {
        return Err(Error::DimensionMismatch {
            what: "inner product operands",
            expected: k1.shape(),
            found: k2.shape(),
        });
    }
    let n = k1.ncols();
    if y.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            what: "inner product weight",
            expected: (n, n),
            found: y.shape(),
        });
    }
    Ok(k1.dot(&(k2 * y)))
}

/// Inner product on `R^{m x n}` weighted by a fixed SPD matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedInner {
    y: Matrix,
}

impl WeightedInner {
    pub fn new(y: Matrix) -> Result<Self> {
        if !y.is_square() {
            return Err(Error::DimensionMismatch {
                what: "inner product weight",
                expected: (y.nrows(), y.nrows()),
                found: y.shape(),
            });
        }
        if !(eigmin(&y) > 0.0) {
            return Err(Error::NotPositiveDefinite("inner product weight"));
        }
        Ok(Self { y })
    }

    pub fn weight(&self) -> &Matrix {
        &self.y
    }

    pub fn inner(&self, k1: &Matrix, k2: &Matrix) -> Result<f64> {
        weighted_inner(k1, k2, &self.y)
    }

    pub fn norm_sq(&self, k: &Matrix) -> Result<f64> {
        weighted_inner(k, k, &self.y)
    }
}
