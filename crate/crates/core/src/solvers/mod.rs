//! Single-executor reference PCG and PIPECG.

mod config;
mod exec;
mod pcg;
mod pipecg;
mod report;

pub use config::SolverConfig;
pub use exec::{Kernels, Sequential};
pub use pcg::pcg_solve;
pub use pipecg::{
    pipecg_scalars, pipecg_solve, pipecg_solve_with, true_residual_norm, PipecgState,
};
pub use report::{DriftSample, SolveReport, TransferSummary};
