//! Measurement matrices and column normalization.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Columns with a Euclidean norm below this are treated as zero.
pub const ZERO_COLUMN_TOL: f64 = 1e-14;

/// Scalar field the matrix entries were produced in.
///
/// Storage is always complex; the field only decides how the matrix is
/// written to disk and whether real-only shortcuts apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

/// An `M x N` sensing matrix `A`, mapping length-`N` coefficient vectors to
/// `M` measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    data: DMatrix<C64>,
    field: Field,
    normalized: bool,
}

impl MeasurementMatrix {
    pub fn new(data: DMatrix<C64>, field: Field) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::EmptyMatrix {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        Ok(Self {
            data,
            field,
            normalized: false,
        })
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64], field: Field) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if entries.len() != rows * cols {
            return Err(Error::EntryCount {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries), field)
    }

    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_major(rows, cols, &c, Field::Real)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n), Field::Real).expect("n >= 1")
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn column(&self, k: usize) -> DVector<C64> {
        self.data.column(k).into_owned()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.data.column_iter().map(|c| c.norm()).collect()
    }

    /// The `M x |cols|` submatrix made of the given columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> DMatrix<C64> {
        self.data.select_columns(cols)
    }

    /// Scales every column to unit Euclidean norm.
    pub fn normalize_columns(&self) -> Result<Self> {
        let mut data = self.data.clone();
        for (k, mut col) in data.column_iter_mut().enumerate() {
            let norm = col.norm();
            if !(norm >= ZERO_COLUMN_TOL) {
                return Err(Error::ZeroColumn(k));
            }
            col.unscale_mut(norm);
        }
        Ok(Self {
            data,
            field: self.field,
            normalized: true,
        })
    }
}

pub fn normalize_columns(a: &MeasurementMatrix) -> Result<MeasurementMatrix> {
    a.normalize_columns()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_unchanged() {
        let a = MeasurementMatrix::identity(2);
        let n = a.normalize_columns().unwrap();
        assert!(n.is_normalized());
        assert_eq!(n.data(), a.data());
    }

    #[test]
    fn pythagorean_column() {
        let a = MeasurementMatrix::from_real_rows(2, 1, &[3.0, 4.0]).unwrap();
        let n = a.normalize_columns().unwrap();
        assert!((n.data()[(0, 0)].re - 0.6).abs() < 1e-15);
        assert!((n.data()[(1, 0)].re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_column_is_rejected() {
        let a = MeasurementMatrix::from_real_rows(2, 2, &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(a.normalize_columns(), Err(Error::ZeroColumn(1)));
    }

    #[test]
    fn nan_column_is_rejected() {
        let a = MeasurementMatrix::from_real_rows(1, 2, &[1.0, f64::NAN]).unwrap();
        assert_eq!(a.normalize_columns(), Err(Error::ZeroColumn(1)));
    }

    #[test]
    fn shape_checks() {
        assert!(matches!(
            MeasurementMatrix::from_real_rows(2, 2, &[1.0]),
            Err(Error::EntryCount { expected: 4, got: 1 })
        ));
        assert!(matches!(
            MeasurementMatrix::from_real_rows(0, 2, &[]),
            Err(Error::EmptyMatrix { .. })
        ));
    }
}
