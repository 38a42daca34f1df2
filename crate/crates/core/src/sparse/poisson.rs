//! 125-point Poisson-style test matrices on an `n × n × n` grid.
//!
//! Grid points `(ix, iy, iz)` and `(jx, jy, jz)` are coupled when every axis
//! differs by at most 2 (a 5×5×5 cube clipped at the boundary). Off-diagonal
//! entries are `-1` and each diagonal is its row's neighbour count plus one, so
//! the matrix is symmetric, strictly diagonally dominant and every row sums
//! to 1. Points are linearised x-fastest: `ix + n*(iy + n*iz)`.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Stencil half-width on each axis.
const REACH: usize = 2;

/// Default memory budget for materialised matrices (2 GiB).
pub const DEFAULT_BUDGET_BYTES: u128 = 2 << 30;

/// Row count and nonzero count of the `n`-sided grid, without materialising
/// the matrix. Each axis contributes `5n - 6` coupled index pairs.
pub fn poisson125_dims(n: usize) -> Result<(u64, u64)> {
    if n < 5 {
        return Err(Error::InvalidArgument(format!(
            "Poisson grid side must be at least 5, got {n}"
        )));
    }
    let n = n as u64;
    let per_axis = 5 * n - 6;
    Ok((n * n * n, per_axis * per_axis * per_axis))
}

/// Bytes needed by the CSR arrays of the `n`-sided grid matrix.
pub fn poisson125_bytes(n: usize) -> Result<u128> {
    let (rows, nnz) = poisson125_dims(n)?;
    let word = std::mem::size_of::<usize>() as u128;
    Ok((rows as u128 + 1) * word + nnz as u128 * (word + 8))
}

pub fn generate_poisson125(n: usize) -> Result<CsrMatrix> {
    generate_poisson125_with_budget(n, DEFAULT_BUDGET_BYTES)
}

pub fn generate_poisson125_with_budget(n: usize, budget_bytes: u128) -> Result<CsrMatrix> {
    let required = poisson125_bytes(n)?;
    if required > budget_bytes {
        return Err(Error::Capacity {
            required,
            budget: budget_bytes,
        });
    }
    let (rows, nnz) = poisson125_dims(n)?;
    let (rows, nnz) = (rows as usize, nnz as usize);

    let window = |i: usize| i.saturating_sub(REACH)..=(i + REACH).min(n - 1);

    let mut row_offsets = Vec::with_capacity(rows + 1);
    let mut col_indices = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    row_offsets.push(0);

    for iz in 0..n {
        for iy in 0..n {
            for ix in 0..n {
                let row = ix + n * (iy + n * iz);
                let row_start = col_indices.len();
                let mut diag_slot = 0;
                // z outermost, x innermost keeps columns ascending
                for jz in window(iz) {
                    for jy in window(iy) {
                        for jx in window(ix) {
                            let col = jx + n * (jy + n * jz);
                            if col == row {
                                diag_slot = col_indices.len();
                            }
                            col_indices.push(col);
                            values.push(-1.0);
                        }
                    }
                }
                let neighbours = col_indices.len() - row_start - 1;
                values[diag_slot] = neighbours as f64 + 1.0;
                row_offsets.push(col_indices.len());
            }
        }
    }
    debug_assert_eq!(col_indices.len(), nnz);
    CsrMatrix::new(rows, rows, row_offsets, col_indices, values)
}
