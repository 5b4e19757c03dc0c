//! Dense row-major `f32` matrix used for feature tables and user initializations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix buffer",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row",
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> {
        // chunks_exact(0) panics, and a zero-column matrix still has `rows` rows
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.cols + col]
    }

    /// First non-finite entry, if any, as `(row, col, value)`.
    pub fn find_non_finite(&self) -> Option<(usize, usize, f32)> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|pos| (pos / self.cols.max(1), pos % self.cols.max(1), self.data[pos]))
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.find_non_finite() {
            Some((row, col, value)) => Err(Error::NonFinite { row, col, value }),
            None => Ok(()),
        }
    }

    /// Keep the first `cols` columns.
    pub fn truncate_cols(&self, cols: usize) -> Result<Matrix> {
        if cols > self.cols {
            return Err(Error::DimensionMismatch {
                context: "column truncation",
                expected: self.cols,
                found: cols,
            });
        }
        let mut data = Vec::with_capacity(self.rows * cols);
        for row in self.iter_rows() {
            data.extend_from_slice(&row[..cols]);
        }
        Ok(Matrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// `self · rhs` with `rhs` given as a `cols × out` row-major `f64` table; accumulates in `f64`.
    pub fn project(&self, rhs: &[f64], out: usize) -> Result<Matrix> {
        if rhs.len() != self.cols * out {
            return Err(Error::DimensionMismatch {
                context: "projection matrix",
                expected: self.cols * out,
                found: rhs.len(),
            });
        }
        let mut data = Vec::with_capacity(self.rows * out);
        let mut acc = vec![0.0f64; out];
        for row in self.iter_rows() {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for (j, &x) in row.iter().enumerate() {
                let w = &rhs[j * out..(j + 1) * out];
                for (a, &wk) in acc.iter_mut().zip(w) {
                    *a += x as f64 * wk;
                }
            }
            data.extend(acc.iter().map(|&a| a as f32));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: out,
            data,
        })
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f32 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }

    /// Bitwise equality, distinguishing `0.0` from `-0.0`.
    pub fn bitwise_eq(&self, other: &Matrix) -> bool {
        self.shape() == other.shape()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

pub(crate) fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

pub(crate) fn l2_norm(row: &[f32]) -> f64 {
    row.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_rejects_ragged() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn zero_column_matrix_has_rows() {
        let m = Matrix::zeros(3, 0);
        assert_eq!(m.iter_rows().count(), 3);
        assert!(m.ensure_finite().is_ok());
    }

    #[test]
    fn non_finite_reports_position() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, f32::NAN]]).unwrap();
        let (r, c, _) = m.find_non_finite().unwrap();
        assert_eq!((r, c), (1, 1));
    }

    #[test]
    fn truncate_and_project_agree_on_identity_prefix() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let t = m.truncate_cols(2).unwrap();
        let proj = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        assert!(t.bitwise_eq(&m.project(&proj, 2).unwrap()));
    }
}
