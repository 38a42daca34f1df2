//! Preconditioned conjugate gradient.
//!
//! ```text
//! r = b - A x0;  u = M^{-1} r;  gamma = (u, r);  norm = sqrt((u, u))
//! for i = 0, 1, ...
//!     beta = i > 0 ? gamma / gamma_prev : 0
//!     p = u + beta p;  s = A p;  delta = (s, p);  alpha = gamma / delta
//!     x = x + alpha p;  r = r - alpha s;  u = M^{-1} r
//!     gamma = (u, r);  norm = sqrt((u, u))
//! ```

use std::time::Instant;

use crate::error::{check_len, Error, Result};
use crate::solvers::{SolveReport, SolverConfig};
use crate::sparse::{self, kernels, CsrMatrix, JacobiPreconditioner};

pub fn pcg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    pc: &JacobiPreconditioner,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let n = a.n_rows();
    check_len("pcg matrix", n, a.n_cols())?;
    check_len("pcg rhs", n, b.len())?;
    check_len("pcg initial guess", n, x0.len())?;
    check_len("pcg preconditioner", n, pc.len())?;

    let mut report = SolveReport::new("pcg");
    let setup = Instant::now();

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    sparse::residual_into(a, &x, b, &mut r)?;
    let mut u = pc.apply(&r)?;
    let mut gamma = sparse::dot(&u, &r)?;
    let mut norm = sparse::dot(&u, &u)?.sqrt();
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    report.record_norm(cfg.record_history, norm);
    report.add_time("setup", setup.elapsed().as_secs_f64());

    let start = Instant::now();
    let mut gamma_prev = 0.0;
    if norm < cfg.tolerance {
        report.converged = true;
    }
    for i in 0..cfg.max_iterations {
        if report.converged {
            break;
        }
        let beta = if i > 0 { gamma / gamma_prev } else { 0.0 };
        kernels::xpby(&u, beta, &mut p)?;
        sparse::spmv_into(a, &p, &mut s)?;
        let delta = sparse::dot(&s, &p)?;
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Breakdown {
                iteration: i,
                reason: format!("(s, p) = {delta} is not positive"),
            });
        }
        let alpha = gamma / delta;
        kernels::axpy(alpha, &p, &mut x)?;
        kernels::aymx(alpha, &s, &mut r)?;
        pc.apply_into(&r, &mut u)?;
        gamma_prev = gamma;
        gamma = sparse::dot(&u, &r)?;
        norm = sparse::dot(&u, &u)?.sqrt();
        if !gamma.is_finite() || gamma < 0.0 || !norm.is_finite() {
            return Err(Error::Breakdown {
                iteration: i,
                reason: format!("gamma = {gamma}, norm = {norm}"),
            });
        }
        report.iterations = i + 1;
        report.record_norm(cfg.record_history, norm);
        report.converged = norm < cfg.tolerance;
    }
    report.add_time("iterate", start.elapsed().as_secs_f64());
    Ok((x, report))
}
