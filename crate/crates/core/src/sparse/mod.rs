//! CSR storage, matrix ingestion and generation, and the kernels shared by
//! every solver.

mod csr;
mod jacobi;
pub mod kernels;
mod matrix_market;
mod poisson;
mod view;

pub use csr::CsrMatrix;
pub use jacobi::{apply_diagonal, JacobiPreconditioner};
pub use kernels::{
    dot, fused_pipecg_update, norm2, norm_inf, residual_into, spmv, spmv_into, spmv_rows_into,
    PipecgSlices, PipecgVectors, SplitAt,
};
pub use matrix_market::{parse_matrix_market, read_matrix_market};
pub use poisson::{
    generate_poisson125, generate_poisson125_with_budget, poisson125_bytes, poisson125_dims,
    DEFAULT_BUDGET_BYTES,
};
pub use view::{spmv_phase, PhaseAccumulator, RowRangeView, SpmvPhase};
