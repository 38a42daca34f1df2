use std::ops::Range;

use crate::error::{Error, Result};

/// Compressed sparse row matrix with `f64` values.
///
/// Columns within a row are strictly increasing; [`CsrMatrix::new`] rejects
/// anything else, so every consumer may rely on sorted, duplicate-free rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidMatrix("row_offsets[0] must be 0".into()));
        }
        if col_indices.len() != values.len() {
            return Err(Error::InvalidMatrix(format!(
                "{} column indices but {} values",
                col_indices.len(),
                values.len()
            )));
        }
        if row_offsets[n_rows] != col_indices.len() {
            return Err(Error::InvalidMatrix(format!(
                "row_offsets ends at {}, but nnz is {}",
                row_offsets[n_rows],
                col_indices.len()
            )));
        }
        for row in 0..n_rows {
            let (start, end) = (row_offsets[row], row_offsets[row + 1]);
            if start > end {
                return Err(Error::InvalidMatrix(format!(
                    "row_offsets decreases at row {row}"
                )));
            }
            let cols = &col_indices[start..end];
            if let Some(&c) = cols.iter().find(|&&c| c >= n_cols) {
                return Err(Error::InvalidMatrix(format!(
                    "column {c} in row {row} exceeds n_cols = {n_cols}"
                )));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidMatrix(format!(
                    "columns of row {row} are not strictly increasing"
                )));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from 0-based `(row, col, value)` triplets in any order.
    /// Duplicate coordinates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|t| t.0 >= n_rows || t.1 >= n_cols) {
            return Err(Error::InvalidMatrix(format!(
                "triplet ({r}, {c}) outside {n_rows}x{n_cols}"
            )));
        }
        // stable, so duplicates are summed in input order
        triplets.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((r, c));
            row_offsets[r + 1] += 1;
            col_indices.push(c);
            values.push(v);
        }
        for row in 0..n_rows {
            row_offsets[row + 1] += row_offsets[row];
        }
        Self::new(n_rows, n_cols, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds a matrix from dense rows, keeping only nonzero entries.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::InvalidMatrix(format!(
                    "dense row {i} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            triplets.extend(
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, &v)| (i, j, v)),
            );
        }
        Self::from_triplets(n_rows, n_cols, triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_range(&self, row: usize) -> Range<usize> {
        self.row_offsets[row]..self.row_offsets[row + 1]
    }

    pub fn row_nnz(&self, row: usize) -> usize {
        self.row_offsets[row + 1] - self.row_offsets[row]
    }

    /// Column indices and values of one row.
    pub fn row(&self, row: usize) -> (&[usize], &[f64]) {
        let range = self.row_range(row);
        (&self.col_indices[range.clone()], &self.values[range])
    }

    /// Nonzeros stored in rows `rows`.
    pub fn nnz_in_rows(&self, rows: Range<usize>) -> usize {
        self.row_offsets[rows.end] - self.row_offsets[rows.start]
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let (cols, vals) = self.row(row);
        cols.binary_search(&col).ok().map(|k| vals[k])
    }

    /// Diagonal entry of every row, `None` where it is not stored.
    pub fn diagonal(&self) -> Vec<Option<f64>> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Whether the matrix equals its transpose, pattern and values.
    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.n_rows).all(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .all(|(&j, &v)| self.get(j, i) == Some(v))
            })
    }

    /// Checks the structural requirements of the solvers: square, with every
    /// diagonal entry stored and strictly positive.
    pub fn check_solver_ready(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::InvalidMatrix(format!(
                "solver needs a square matrix, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        for (row, d) in self.diagonal().into_iter().enumerate() {
            match d {
                None => {
                    return Err(Error::Preconditioner {
                        row,
                        reason: "diagonal entry missing",
                    })
                }
                Some(v) if !(v > 0.0) => {
                    return Err(Error::Preconditioner {
                        row,
                        reason: "diagonal entry is not positive",
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// Copies rows `rows` into a standalone row block (same column space).
    pub fn row_block(&self, rows: Range<usize>) -> CsrMatrix {
        let start = self.row_offsets[rows.start];
        let end = self.row_offsets[rows.end];
        CsrMatrix {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            row_offsets: self.row_offsets[rows.start..=rows.end]
                .iter()
                .map(|o| o - start)
                .collect(),
            col_indices: self.col_indices[start..end].to_vec(),
            values: self.values[start..end].to_vec(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in dense.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        dense
    }
}
