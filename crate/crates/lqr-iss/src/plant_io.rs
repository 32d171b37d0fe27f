//! Plant documents: `{"A": [[..]], "B": [[..]], "Q": [[..]], "R": [[..]]}`
//! with row-major nested arrays.

use std::fs;
use std::path::Path;

use lqr_iss_core::{Matrix, PlantModel, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantDocument {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
}

pub fn matrix_from_rows(name: &str, rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(CliError::config(format!("matrix {name} is empty")));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::config(format!("matrix {name} has ragged rows")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CliError::config(format!("matrix {name} has non-finite entries")));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl PlantDocument {
    pub fn from_plant(plant: &PlantModel) -> Self {
        Self {
            a: matrix_to_rows(plant.a()),
            b: matrix_to_rows(plant.b()),
            q: matrix_to_rows(plant.q()),
            r: matrix_to_rows(plant.r()),
        }
    }

    pub fn build(&self, tol: Tolerances) -> Result<PlantModel> {
        let a = matrix_from_rows("A", &self.a)?;
        let b = matrix_from_rows("B", &self.b)?;
        let q = matrix_from_rows("Q", &self.q)?;
        let r = matrix_from_rows("R", &self.r)?;
        PlantModel::with_tolerances(a, b, q, r, tol).map_err(|e| match e {
            lqr_iss_core::Error::DimensionMismatch { .. }
            | lqr_iss_core::Error::NotSymmetric(_)
            | lqr_iss_core::Error::NotPositiveDefinite(_)
            | lqr_iss_core::Error::TooLarge { .. } => CliError::config(format!("plant: {e}")),
            other => CliError::Numerical(other),
        })
    }
}

pub fn read_plant(path: &Path, tol: Tolerances) -> Result<PlantModel> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let doc: PlantDocument = serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    doc.build(tol)
}

pub fn write_plant(path: &Path, plant: &PlantModel) -> Result<()> {
    let text = serde_json::to_string_pretty(&PlantDocument::from_plant(plant)).map_err(|e| CliError::write(path, e))?;
    fs::write(path, text + "\n").map_err(|e| CliError::write(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_entries() {
        let plant = lqr_iss_core::sampling::random_plant(3, 2, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plant.json");
        write_plant(&path, &plant).unwrap();
        let back = read_plant(&path, Tolerances::default()).unwrap();
        assert_eq!(back.a(), plant.a());
        assert_eq!(back.b(), plant.b());
        assert_eq!(back.q(), plant.q());
        assert_eq!(back.r(), plant.r());
    }

    #[test]
    fn rows_are_row_major() {
        let m = matrix_from_rows("M", &[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(m[(0, 2)], 3.0);
        assert_eq!(m[(1, 0)], 4.0);
        assert_eq!(matrix_to_rows(&m), vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
    }

    #[test]
    fn ragged_and_unknown_fields_rejected() {
        assert!(matrix_from_rows("M", &[vec![1.0], vec![1.0, 2.0]]).is_err());
        let bad = r#"{"A": [[1]], "B": [[1]], "Q": [[1]], "R": [[1]], "S": [[1]]}"#;
        assert!(serde_json::from_str::<PlantDocument>(bad).is_err());
    }
}
