//! Pipelined preconditioned conjugate gradient.
//!
//! The recurrences keep `w = A u`, `m = M^{-1} w`, `n = A m`, `z`, `q` and `s`
//! up to date so that the three dot products of an iteration do not depend on
//! that iteration's preconditioner application and SPMV:
//!
//! ```text
//! r = b - A x0;  u = M^{-1} r;  w = A u;  m = M^{-1} w;  n = A m
//! gamma = (r, u);  delta = (w, u);  norm = sqrt((u, u))
//! for i = 0, 1, ...
//!     i > 0:  beta = gamma / gamma_prev;  alpha = gamma / (delta - beta gamma / alpha_prev)
//!     i = 0:  beta = 0;                   alpha = gamma / delta
//!     z = n + beta z;  q = m + beta q;  s = w + beta s;  p = u + beta p
//!     x = x + alpha p;  r = r - alpha s;  u = u - alpha q;  w = w - alpha z
//!     gamma = (r, u);  delta = (w, u);  norm = sqrt((u, u))
//!     m = M^{-1} w;  n = A m
//! ```

use std::time::Instant;

use crate::error::{check_len, Error, Result};
use crate::solvers::{DriftSample, Kernels, Sequential, SolveReport, SolverConfig};
use crate::sparse::{self, CsrMatrix, JacobiPreconditioner, PipecgVectors};

/// Step length `alpha` and direction update `beta` for iteration `iteration`.
pub fn pipecg_scalars(
    gamma: f64,
    gamma_prev: f64,
    delta: f64,
    alpha_prev: f64,
    iteration: usize,
) -> Result<(f64, f64)> {
    let breakdown = |reason: String| Error::Breakdown { iteration, reason };
    if iteration == 0 {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(breakdown(format!("delta = {delta} is not positive")));
        }
        return Ok((gamma / delta, 0.0));
    }
    if gamma_prev == 0.0 || !gamma_prev.is_finite() {
        return Err(breakdown(format!("gamma_prev = {gamma_prev}")));
    }
    if alpha_prev == 0.0 || !alpha_prev.is_finite() {
        return Err(breakdown(format!("alpha_prev = {alpha_prev}")));
    }
    let beta = gamma / gamma_prev;
    let denom = delta - beta * gamma / alpha_prev;
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(breakdown(format!(
            "step denominator delta - beta gamma / alpha_prev = {denom} is not positive"
        )));
    }
    Ok((gamma / denom, beta))
}

/// Vectors and scalars of a PIPECG run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipecgState {
    pub vectors: PipecgVectors,
    pub gamma: f64,
    pub gamma_prev: f64,
    pub delta: f64,
    pub alpha: f64,
    pub alpha_prev: f64,
    pub beta: f64,
    pub norm: f64,
    /// Completed iterations.
    pub iteration: usize,
}

impl PipecgState {
    /// Runs the initialisation block; `z`, `q`, `s` and `p` start at zero.
    pub fn init<K: Kernels>(
        k: &K,
        a: &CsrMatrix,
        b: &[f64],
        x0: &[f64],
        pc: &JacobiPreconditioner,
    ) -> Result<Self> {
        let n = a.n_rows();
        check_len("pipecg matrix", n, a.n_cols())?;
        check_len("pipecg rhs", n, b.len())?;
        check_len("pipecg initial guess", n, x0.len())?;
        check_len("pipecg preconditioner", n, pc.len())?;

        let mut v = PipecgVectors::zeros(n);
        v.x.copy_from_slice(x0);
        k.residual(a, &v.x, b, &mut v.r)?;
        k.precondition(pc, &v.r, &mut v.u)?;
        k.spmv(a, &v.u, &mut v.w)?;
        k.precondition(pc, &v.w, &mut v.m)?;
        k.spmv(a, &v.m, &mut v.n)?;
        let gamma = k.dot(&v.r, &v.u)?;
        let delta = k.dot(&v.w, &v.u)?;
        let norm = k.dot(&v.u, &v.u)?.sqrt();
        Ok(Self {
            vectors: v,
            gamma,
            gamma_prev: 0.0,
            delta,
            alpha: 0.0,
            alpha_prev: 0.0,
            beta: 0.0,
            norm,
            iteration: 0,
        })
    }

    /// `(alpha, beta)` for the next iteration.
    pub fn next_scalars(&self) -> Result<(f64, f64)> {
        pipecg_scalars(
            self.gamma,
            self.gamma_prev,
            self.delta,
            self.alpha_prev,
            self.iteration,
        )
    }

    /// Scalars, fused vector updates and the three dot products of one
    /// iteration. Leaves `m` and `n` stale until [`Self::operator_step`].
    pub fn vector_step<K: Kernels>(&mut self, k: &K) -> Result<()> {
        let (alpha, beta) = self.next_scalars()?;
        k.fused_update(self.vectors.slices(), alpha, beta)?;
        let v = &self.vectors;
        let gamma = k.dot(&v.r, &v.u)?;
        let delta = k.dot(&v.w, &v.u)?;
        let norm = k.dot(&v.u, &v.u)?.sqrt();
        self.record_step(alpha, beta, gamma, delta, norm)
    }

    /// Installs the scalars of a finished iteration, checking them for
    /// breakdown.
    pub fn record_step(
        &mut self,
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        norm: f64,
    ) -> Result<()> {
        if !gamma.is_finite() || gamma < 0.0 || !norm.is_finite() || !delta.is_finite() {
            return Err(Error::Breakdown {
                iteration: self.iteration,
                reason: format!("gamma = {gamma}, delta = {delta}, norm = {norm}"),
            });
        }
        self.alpha_prev = alpha;
        self.alpha = alpha;
        self.beta = beta;
        self.gamma_prev = self.gamma;
        self.gamma = gamma;
        self.delta = delta;
        self.norm = norm;
        self.iteration += 1;
        Ok(())
    }

    /// `m = M^{-1} w` and `n = A m`.
    pub fn operator_step<K: Kernels>(
        &mut self,
        k: &K,
        a: &CsrMatrix,
        pc: &JacobiPreconditioner,
    ) -> Result<()> {
        let v = &mut self.vectors;
        k.precondition(pc, &v.w, &mut v.m)?;
        k.spmv(a, &v.m, &mut v.n)
    }
}

/// `||b - A x||_2`.
pub fn true_residual_norm(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<f64> {
    let mut r = vec![0.0; a.n_rows()];
    sparse::residual_into(a, x, b, &mut r)?;
    Ok(sparse::norm2(&r))
}

fn relative_drift(a: &CsrMatrix, b: &[f64], v: &PipecgVectors) -> Result<f64> {
    let mut true_r = vec![0.0; a.n_rows()];
    sparse::residual_into(a, &v.x, b, &mut true_r)?;
    let gap = true_r
        .iter()
        .zip(&v.r)
        .fold(0.0, |acc, (t, r)| acc + (t - r) * (t - r))
        .sqrt();
    let scale = sparse::norm2(b);
    Ok(if scale > 0.0 { gap / scale } else { gap })
}

pub fn pipecg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    pc: &JacobiPreconditioner,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    pipecg_solve_with(&Sequential, a, b, x0, pc, cfg)
}

/// PIPECG on the given kernel executor.
pub fn pipecg_solve_with<K: Kernels>(
    k: &K,
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    pc: &JacobiPreconditioner,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let mut report = SolveReport::new("pipecg");
    let setup = Instant::now();
    let mut state = PipecgState::init(k, a, b, x0, pc)?;
    report.record_norm(cfg.record_history, state.norm);
    report.converged = state.norm < cfg.tolerance;
    report.add_time("setup", setup.elapsed().as_secs_f64());

    let start = Instant::now();
    while !report.converged && state.iteration < cfg.max_iterations {
        state.vector_step(k)?;
        report.iterations = state.iteration;
        report.record_norm(cfg.record_history, state.norm);
        if cfg.drift_check_interval > 0 && state.iteration % cfg.drift_check_interval == 0 {
            report.drift.push(DriftSample {
                iteration: state.iteration,
                relative_drift: relative_drift(a, b, &state.vectors)?,
            });
        }
        if state.norm < cfg.tolerance {
            report.converged = true;
            break;
        }
        state.operator_step(k, a, pc)?;
    }
    report.add_time("iterate", start.elapsed().as_secs_f64());
    Ok((state.vectors.x, report))
}
