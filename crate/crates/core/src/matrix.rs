//! Dense row-major matrix of `f64`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Row-major matrix. Rows are feature vectors.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: alloc::vec![0.0; rows * cols],
        }
    }

    /// An empty matrix that still remembers its column count.
    pub fn empty(cols: usize) -> Self {
        Self::zeros(0, cols)
    }

    /// Builds a matrix from a flat row-major buffer.
    ///
    /// Panics if `data.len()` is not a multiple of `cols`.
    pub fn from_flat(cols: usize, data: Vec<f64>) -> Self {
        let rows = if cols == 0 {
            0
        } else {
            assert_eq!(data.len() % cols, 0, "buffer length is not a multiple of cols");
            data.len() / cols
        };
        Self { rows, cols, data }
    }

    /// Builds a matrix from rows, all of which must have length `cols`.
    pub fn from_rows<R: AsRef<[f64]>>(cols: usize, rows: &[R]) -> Self {
        let mut m = Self::with_capacity(rows.len(), cols);
        for r in rows {
            m.push_row(r.as_ref());
        }
        m
    }

    pub fn with_capacity(rows: usize, cols: usize) -> Self {
        Self {
            rows: 0,
            cols,
            data: Vec::with_capacity(rows * cols),
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New matrix containing the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut m = Self::with_capacity(indices.len(), self.cols);
        for &i in indices {
            m.push_row(self.row(i));
        }
        m
    }
}
