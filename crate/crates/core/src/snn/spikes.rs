use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary matrix, `rows × cols`, stored row-major. Rows are channels or
/// neurons, columns are time steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpikeMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl SpikeMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::contract(format!(
                    "row {r} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            if row.iter().any(|&v| v > 1) {
                return Err(Error::contract(format!("row {r} is not binary")));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
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

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.cols + col]
    }

    /// Sets entry `(row, col)` to `value != 0`.
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.data[row * self.cols + col] = u8::from(value != 0);
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column_into(&self, col: usize, out: &mut [u8]) {
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.data[r * self.cols + col];
        }
    }

    pub fn column(&self, col: usize) -> Vec<u8> {
        let mut out = vec![0; self.rows];
        self.column_into(col, &mut out);
        out
    }

    pub fn row_sum(&self, row: usize) -> usize {
        self.row(row).iter().map(|&v| v as usize).sum()
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }
}
