//! Preconditioned conjugate gradient (PCG) and pipelined PCG (PIPECG) on CSR
//! matrices, plus an emulated two-device node that runs PIPECG in three
//! hybrid host/accelerator schedules.
//!
//! * [`sparse`] holds the CSR storage, Matrix Market ingestion, the 125-point
//!   Poisson generator and the numerical kernels.
//! * [`solvers`] holds the single-executor reference PCG and PIPECG.
//! * [`hetero`] holds the emulated devices, transfer channels, the SPMV
//!   performance model, 1-D/2-D decomposition and the hybrid orchestrators.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hetero;
pub mod solvers;
pub mod sparse;

pub use error::{Error, Result};
