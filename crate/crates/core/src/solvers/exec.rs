use crate::error::Result;
use crate::sparse::{self, CsrMatrix, JacobiPreconditioner, PipecgSlices};

/// The kernels a PIPECG loop needs, so one loop can run on the plain
/// sequential kernels or on an emulated device.
pub trait Kernels {
    fn spmv(&self, a: &CsrMatrix, x: &[f64], y: &mut [f64]) -> Result<()>;

    /// `r = b - A x`.
    fn residual(&self, a: &CsrMatrix, x: &[f64], b: &[f64], r: &mut [f64]) -> Result<()>;

    fn precondition(&self, pc: &JacobiPreconditioner, r: &[f64], out: &mut [f64]) -> Result<()>;

    fn fused_update(&self, v: PipecgSlices<'_>, alpha: f64, beta: f64) -> Result<()>;

    fn dot(&self, x: &[f64], y: &[f64]) -> Result<f64>;
}

/// Plain single-threaded kernels.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Kernels for Sequential {
    fn spmv(&self, a: &CsrMatrix, x: &[f64], y: &mut [f64]) -> Result<()> {
        sparse::spmv_into(a, x, y)
    }

    fn residual(&self, a: &CsrMatrix, x: &[f64], b: &[f64], r: &mut [f64]) -> Result<()> {
        sparse::residual_into(a, x, b, r)
    }

    fn precondition(&self, pc: &JacobiPreconditioner, r: &[f64], out: &mut [f64]) -> Result<()> {
        pc.apply_into(r, out)
    }

    fn fused_update(&self, v: PipecgSlices<'_>, alpha: f64, beta: f64) -> Result<()> {
        sparse::fused_pipecg_update(v, alpha, beta)
    }

    fn dot(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        sparse::dot(x, y)
    }
}
