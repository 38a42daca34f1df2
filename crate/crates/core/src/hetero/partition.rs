use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, RowRangeView};

/// Largest row count `k` whose leading rows hold at most `target` nonzeros.
pub fn decompose_1d(a: &CsrMatrix, target: usize) -> usize {
    let offsets = a.row_offsets();
    // offsets is nondecreasing, so the count of entries <= target, minus the
    // leading zero, is the largest admissible k
    offsets.partition_point(|&o| o <= target).saturating_sub(1)
}

/// Rows `0..k` go to the host and `k..N` to the accelerator; each side's rows
/// are split into nonzeros whose column it owns and nonzeros it must wait for.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub host: RowRangeView,
    pub accel: RowRangeView,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub n: usize,
    pub k: usize,
    pub nnz1_host: usize,
    pub nnz2_host: usize,
    pub nnz1_accel: usize,
    pub nnz2_accel: usize,
}

impl Partition {
    pub fn k(&self) -> usize {
        self.host.row_count()
    }

    pub fn n(&self) -> usize {
        self.host.n_cols()
    }

    pub fn summary(&self) -> PartitionSummary {
        PartitionSummary {
            n: self.n(),
            k: self.k(),
            nnz1_host: self.host.nnz_local(),
            nnz2_host: self.host.nnz_remote(),
            nnz1_accel: self.accel.nnz_local(),
            nnz2_accel: self.accel.nnz_remote(),
        }
    }
}

pub fn decompose_2d(a: &CsrMatrix, k: usize) -> Result<Partition> {
    let n = a.n_rows();
    if !a.is_square() {
        return Err(Error::InvalidArgument(
            "decomposition needs a square matrix".into(),
        ));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "split row {k} exceeds {n} rows"
        )));
    }
    Ok(Partition {
        host: RowRangeView::new(a, 0..k, 0..k)?,
        accel: RowRangeView::new(a, k..n, k..n)?,
    })
}
