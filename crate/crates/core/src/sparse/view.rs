//! Row blocks whose rows are split into a local-column part and a
//! remote-column part, so SPMV can start on local data while the remote part
//! of the input vector is still in flight.

use std::ops::Range;

use crate::error::{check_len, Error, Result};
use crate::sparse::CsrMatrix;

/// Which half of a split row block to multiply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpmvPhase {
    /// Elements whose column lies in the view's local column range.
    Local,
    /// Elements whose column lies outside it.
    Remote,
}

/// A copied block of rows `first_row .. first_row + row_count` of a matrix,
/// with every row stably reordered so local-column elements come first.
/// Column indices stay global.
#[derive(Debug, Clone, PartialEq)]
pub struct RowRangeView {
    first_row: usize,
    n_cols: usize,
    local_cols: Range<usize>,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    /// Per row, the number of local elements (the split point within the row).
    split_offsets: Vec<usize>,
}

impl RowRangeView {
    pub fn new(a: &CsrMatrix, rows: Range<usize>, local_cols: Range<usize>) -> Result<Self> {
        if rows.start > rows.end || rows.end > a.n_rows() {
            return Err(Error::InvalidArgument(format!(
                "row range {rows:?} outside 0..{}",
                a.n_rows()
            )));
        }
        if local_cols.start > local_cols.end || local_cols.end > a.n_cols() {
            return Err(Error::InvalidArgument(format!(
                "local column range {local_cols:?} outside 0..{}",
                a.n_cols()
            )));
        }
        let nnz = a.nnz_in_rows(rows.clone());
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        let mut split_offsets = Vec::with_capacity(rows.len());
        row_offsets.push(0);
        for row in rows.clone() {
            let (cols, vals) = a.row(row);
            let is_local = |c: &usize| local_cols.contains(c);
            let mut local = 0;
            for (&c, &v) in cols.iter().zip(vals).filter(|(c, _)| is_local(c)) {
                col_indices.push(c);
                values.push(v);
                local += 1;
            }
            for (&c, &v) in cols.iter().zip(vals).filter(|(c, _)| !is_local(c)) {
                col_indices.push(c);
                values.push(v);
            }
            split_offsets.push(local);
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            first_row: rows.start,
            n_cols: a.n_cols(),
            local_cols,
            row_offsets,
            col_indices,
            values,
            split_offsets,
        })
    }

    pub fn first_row(&self) -> usize {
        self.first_row
    }

    pub fn row_count(&self) -> usize {
        self.split_offsets.len()
    }

    pub fn rows(&self) -> Range<usize> {
        self.first_row..self.first_row + self.row_count()
    }

    pub fn local_cols(&self) -> Range<usize> {
        self.local_cols.clone()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn nnz_local(&self) -> usize {
        self.split_offsets.iter().sum()
    }

    pub fn nnz_remote(&self) -> usize {
        self.nnz() - self.nnz_local()
    }

    pub fn split_offsets(&self) -> &[usize] {
        &self.split_offsets
    }

    /// Column indices and values of view row `i` (0-based within the view),
    /// local elements first.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    /// Element index range of one phase of view row `i`.
    fn phase_range(&self, i: usize, phase: SpmvPhase) -> Range<usize> {
        let start = self.row_offsets[i];
        let split = start + self.split_offsets[i];
        match phase {
            SpmvPhase::Local => start..split,
            SpmvPhase::Remote => split..self.row_offsets[i + 1],
        }
    }

    /// Multiplies one phase for view rows `rows` (0-based within the view).
    /// `Local` overwrites `y`, `Remote` adds to it. `x` is indexed by global
    /// column. Callers that need the phase ordering enforced use
    /// [`spmv_phase`] with a [`PhaseAccumulator`].
    pub fn multiply_phase_rows(
        &self,
        phase: SpmvPhase,
        rows: Range<usize>,
        x: &[f64],
        y: &mut [f64],
    ) -> Result<()> {
        check_len("spmv phase input", self.n_cols, x.len())?;
        check_len("spmv phase output", rows.len(), y.len())?;
        for (yi, i) in y.iter_mut().zip(rows) {
            let range = self.phase_range(i, phase);
            let mut acc = match phase {
                SpmvPhase::Local => 0.0,
                SpmvPhase::Remote => *yi,
            };
            for k in range {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yi = acc;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Fresh,
    LocalDone,
    Complete,
}

/// Output segment of a two-phase SPMV that tracks which phases have run.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAccumulator {
    values: Vec<f64>,
    stage: Stage,
}

impl PhaseAccumulator {
    pub fn new(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
            stage: Stage::Fresh,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_complete(&self) -> bool {
        self.stage == Stage::Complete
    }

    /// Zeroes the segment so a new local phase may start.
    pub fn reset(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
        self.stage = Stage::Fresh;
    }
}

/// Runs one phase of the split SPMV over all rows of `view`.
///
/// The local phase needs `x` only on the view's local columns; the remote
/// phase must follow it on the same accumulator.
pub fn spmv_phase(
    view: &RowRangeView,
    phase: SpmvPhase,
    x: &[f64],
    y: &mut PhaseAccumulator,
) -> Result<()> {
    check_len("spmv phase output", view.row_count(), y.values.len())?;
    let next = match (phase, y.stage) {
        (SpmvPhase::Local, Stage::Fresh) => Stage::LocalDone,
        (SpmvPhase::Remote, Stage::LocalDone) => Stage::Complete,
        (SpmvPhase::Local, _) => {
            return Err(Error::ContractViolation(
                "local SPMV phase needs a freshly zeroed segment".into(),
            ))
        }
        (SpmvPhase::Remote, _) => {
            return Err(Error::ContractViolation(
                "remote SPMV phase must follow the local phase on the same segment".into(),
            ))
        }
    };
    view.multiply_phase_rows(phase, 0..view.row_count(), x, &mut y.values)?;
    y.stage = next;
    Ok(())
}
