use std::ops::Range;

use crate::error::{check_len, Error, Result};
use crate::sparse::CsrMatrix;

/// Diagonal (Jacobi) preconditioner, `M^{-1} = diag(A)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiPreconditioner {
    inv_diag: Vec<f64>,
}

impl JacobiPreconditioner {
    /// Fails on the first row whose diagonal is missing or zero.
    pub fn setup(a: &CsrMatrix) -> Result<Self> {
        let n = a.n_rows().min(a.n_cols());
        let mut inv_diag = Vec::with_capacity(n);
        for (row, d) in a.diagonal().into_iter().enumerate() {
            let d = d.ok_or(Error::Preconditioner {
                row,
                reason: "diagonal entry missing",
            })?;
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Preconditioner {
                    row,
                    reason: "diagonal entry is zero or not finite",
                });
            }
            inv_diag.push(1.0 / d);
        }
        Ok(Self { inv_diag })
    }

    pub fn from_inv_diag(inv_diag: Vec<f64>) -> Self {
        Self { inv_diag }
    }

    pub fn inv_diag(&self) -> &[f64] {
        &self.inv_diag
    }

    pub fn len(&self) -> usize {
        self.inv_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_diag.is_empty()
    }

    /// The preconditioner restricted to the rows `rows`.
    pub fn restrict(&self, rows: Range<usize>) -> Self {
        Self {
            inv_diag: self.inv_diag[rows].to_vec(),
        }
    }

    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; r.len()];
        self.apply_into(r, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, r: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("jacobi input", self.inv_diag.len(), r.len())?;
        apply_diagonal(&self.inv_diag, r, out)
    }
}

/// `out[i] = inv_diag[i] * r[i]` over matching slices.
pub fn apply_diagonal(inv_diag: &[f64], r: &[f64], out: &mut [f64]) -> Result<()> {
    check_len("jacobi input", inv_diag.len(), r.len())?;
    check_len("jacobi output", inv_diag.len(), out.len())?;
    for ((o, d), v) in out.iter_mut().zip(inv_diag).zip(r) {
        *o = d * v;
    }
    Ok(())
}
