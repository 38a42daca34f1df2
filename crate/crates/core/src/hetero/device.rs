use std::fmt;
use std::ops::Range;
use std::sync::atomic::{AtomicI64, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::solvers::Kernels;
use crate::sparse::kernels::{self, DependentSlices, IndependentSlices, PipecgSlices, SplitAt};
use crate::sparse::{apply_diagonal, CsrMatrix, JacobiPreconditioner, RowRangeView, SpmvPhase};

/// Pauses shorter than this are deferred and merged with later ones, since
/// the OS sleep granularity would swamp them.
const MIN_PAUSE: Duration = Duration::from_micros(200);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceId {
    Host,
    Accel,
}

impl DeviceId {
    pub fn as_str(self) -> &'static str {
        match self {
            DeviceId::Host => "host",
            DeviceId::Accel => "accel",
        }
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub workers: usize,
    /// Every kernel is stretched to `throttle` times its measured duration.
    pub throttle: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            workers: 1,
            throttle: 1.0,
        }
    }
}

impl DeviceConfig {
    pub fn new(workers: usize, throttle: f64) -> Self {
        Self { workers, throttle }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidArgument(
                "device needs at least one worker".into(),
            ));
        }
        if !(self.throttle >= 1.0) || !self.throttle.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "throttle must be a finite value >= 1, got {}",
                self.throttle
            )));
        }
        Ok(())
    }
}

/// One emulated executor: a pool of `workers` threads whose kernels are
/// artificially slowed by `throttle`.
///
/// Elementwise and row-parallel kernels are split across the workers; dot
/// products run on a single worker in index order, so results never depend on
/// the worker count.
pub struct Device {
    id: DeviceId,
    config: DeviceConfig,
    pool: Option<rayon::ThreadPool>,
    throttle_debt_ns: AtomicI64,
}

impl fmt::Debug for Device {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Device")
            .field("id", &self.id)
            .field("config", &self.config)
            .finish()
    }
}

impl Device {
    pub fn new(id: DeviceId, config: DeviceConfig) -> Result<Self> {
        config.validate()?;
        let pool = if config.workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .thread_name(move |i| format!("{id}-worker-{i}"))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot start {id} workers: {e}")))?;
            Some(pool)
        } else {
            None
        };
        Ok(Self {
            id,
            config,
            pool,
            throttle_debt_ns: AtomicI64::new(0),
        })
    }

    pub fn host(config: DeviceConfig) -> Result<Self> {
        Self::new(DeviceId::Host, config)
    }

    pub fn accel(config: DeviceConfig) -> Result<Self> {
        Self::new(DeviceId::Accel, config)
    }

    pub fn id(&self) -> DeviceId {
        self.id
    }

    pub fn config(&self) -> DeviceConfig {
        self.config
    }

    /// Sleeps off any deferred throttle time and forgets sleep overshoot.
    pub fn settle(&self) {
        let debt = self.throttle_debt_ns.swap(0, Ordering::AcqRel);
        if debt > 0 {
            thread::sleep(Duration::from_nanos(debt as u64));
        }
    }

    fn extra_for(&self, elapsed: Duration) -> i64 {
        (elapsed.as_nanos() as f64 * (self.config.throttle - 1.0)) as i64
    }

    fn throttled<R>(&self, kernel: impl FnOnce() -> R) -> R {
        if self.config.throttle <= 1.0 {
            return kernel();
        }
        let start = Instant::now();
        let out = kernel();
        let extra = self.extra_for(start.elapsed());
        let debt = self.throttle_debt_ns.fetch_add(extra, Ordering::AcqRel) + extra;
        if debt >= MIN_PAUSE.as_nanos() as i64 {
            let pause = Instant::now();
            thread::sleep(Duration::from_nanos(debt as u64));
            let slept = pause.elapsed().as_nanos() as i64;
            self.throttle_debt_ns.fetch_sub(slept, Ordering::AcqRel);
        }
        out
    }

    /// Runs `kernel` and pauses for exactly its throttle share, with no
    /// deferral. Used where single kernels are timed.
    fn throttled_exact<R>(&self, kernel: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let out = kernel();
        let extra = self.extra_for(start.elapsed());
        if extra > 0 {
            thread::sleep(Duration::from_nanos(extra as u64));
        }
        out
    }

    fn run_split<T, F>(&self, items: T, f: F) -> Result<()>
    where
        T: SplitAt + Send,
        F: Fn(T) -> Result<()> + Sync + Send,
    {
        match &self.pool {
            None => f(items),
            Some(pool) => {
                let parts = items.split_even(self.config.workers);
                pool.install(|| parts.into_par_iter().try_for_each(&f))
            }
        }
    }

    fn spmv_rows_unthrottled(
        &self,
        a: &CsrMatrix,
        rows: Range<usize>,
        x: &[f64],
        y: &mut [f64],
    ) -> Result<()> {
        check_len("device spmv output", rows.len(), y.len())?;
        self.run_split(
            RowChunk {
                first: rows.start,
                y,
            },
            |chunk| {
                let rows = chunk.first..chunk.first + chunk.y.len();
                kernels::spmv_rows_into(a, rows, x, chunk.y)
            },
        )
    }

    /// `y = A[rows, :] x`.
    pub fn spmv_rows(
        &self,
        a: &CsrMatrix,
        rows: Range<usize>,
        x: &[f64],
        y: &mut [f64],
    ) -> Result<()> {
        self.throttled(|| self.spmv_rows_unthrottled(a, rows, x, y))
    }

    /// One full-throttle SPMV over `rows`, timed on its own.
    pub fn timed_spmv_rows(
        &self,
        a: &CsrMatrix,
        rows: Range<usize>,
        x: &[f64],
        y: &mut [f64],
    ) -> Result<Duration> {
        self.settle();
        let start = Instant::now();
        self.throttled_exact(|| self.spmv_rows_unthrottled(a, rows, x, y))?;
        Ok(start.elapsed())
    }

    /// One phase of the split SPMV over every row of `view`.
    pub fn spmv_phase(
        &self,
        view: &RowRangeView,
        phase: SpmvPhase,
        x: &[f64],
        y: &mut [f64],
    ) -> Result<()> {
        check_len("device spmv phase output", view.row_count(), y.len())?;
        self.throttled(|| {
            self.run_split(RowChunk { first: 0, y }, |chunk| {
                let rows = chunk.first..chunk.first + chunk.y.len();
                view.multiply_phase_rows(phase, rows, x, chunk.y)
            })
        })
    }

    /// `out = diag(inv_diag) r`.
    pub fn apply_diagonal(&self, inv_diag: &[f64], r: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("device jacobi", inv_diag.len(), r.len())?;
        check_len("device jacobi", inv_diag.len(), out.len())?;
        self.throttled(|| {
            self.run_split(
                Triple {
                    a: inv_diag,
                    b: r,
                    out,
                },
                |t| apply_diagonal(t.a, t.b, t.out),
            )
        })
    }

    /// `y = x + beta y`.
    pub fn xpby(&self, x: &[f64], beta: f64, y: &mut [f64]) -> Result<()> {
        check_len("device xpby", x.len(), y.len())?;
        self.throttled(|| self.run_split(Pair { x, y }, |p| kernels::xpby(p.x, beta, p.y)))
    }

    /// `y = y - alpha x`.
    pub fn aymx(&self, alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_len("device aymx", x.len(), y.len())?;
        self.throttled(|| self.run_split(Pair { x, y }, |p| kernels::aymx(alpha, p.x, p.y)))
    }

    pub fn update_independent(
        &self,
        v: IndependentSlices<'_>,
        alpha: f64,
        beta: f64,
    ) -> Result<()> {
        self.throttled(|| {
            self.run_split(v, |chunk| {
                kernels::pipecg_update_independent(chunk, alpha, beta)
            })
        })
    }

    pub fn update_dependent(&self, v: DependentSlices<'_>, alpha: f64, beta: f64) -> Result<()> {
        self.throttled(|| {
            self.run_split(v, |chunk| {
                kernels::pipecg_update_dependent(chunk, alpha, beta)
            })
        })
    }
}

impl Kernels for Device {
    fn spmv(&self, a: &CsrMatrix, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_len("device spmv input", a.n_cols(), x.len())?;
        self.spmv_rows(a, 0..a.n_rows(), x, y)
    }

    fn residual(&self, a: &CsrMatrix, x: &[f64], b: &[f64], r: &mut [f64]) -> Result<()> {
        check_len("device residual rhs", a.n_rows(), b.len())?;
        check_len("device residual output", a.n_rows(), r.len())?;
        self.throttled(|| {
            self.run_split(RowChunk { first: 0, y: r }, |chunk| {
                let rows = chunk.first..chunk.first + chunk.y.len();
                kernels::spmv_rows_into(a, rows.clone(), x, chunk.y)?;
                for (ri, bi) in chunk.y.iter_mut().zip(&b[rows]) {
                    *ri = bi - *ri;
                }
                Ok(())
            })
        })
    }

    fn precondition(&self, pc: &JacobiPreconditioner, r: &[f64], out: &mut [f64]) -> Result<()> {
        self.apply_diagonal(pc.inv_diag(), r, out)
    }

    fn fused_update(&self, v: PipecgSlices<'_>, alpha: f64, beta: f64) -> Result<()> {
        self.throttled(|| {
            self.run_split(v, |chunk| kernels::fused_pipecg_update(chunk, alpha, beta))
        })
    }

    fn dot(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.throttled(|| kernels::dot(x, y))
    }
}

struct RowChunk<'a> {
    first: usize,
    y: &'a mut [f64],
}

impl SplitAt for RowChunk<'_> {
    fn len(&self) -> usize {
        self.y.len()
    }

    fn split_at(self, mid: usize) -> (Self, Self) {
        let (y0, y1) = self.y.split_at_mut(mid);
        (
            RowChunk {
                first: self.first,
                y: y0,
            },
            RowChunk {
                first: self.first + mid,
                y: y1,
            },
        )
    }
}

struct Pair<'a> {
    x: &'a [f64],
    y: &'a mut [f64],
}

impl SplitAt for Pair<'_> {
    fn len(&self) -> usize {
        self.y.len()
    }

    fn split_at(self, mid: usize) -> (Self, Self) {
        let (x0, x1) = self.x.split_at(mid);
        let (y0, y1) = self.y.split_at_mut(mid);
        (Pair { x: x0, y: y0 }, Pair { x: x1, y: y1 })
    }
}

struct Triple<'a> {
    a: &'a [f64],
    b: &'a [f64],
    out: &'a mut [f64],
}

impl SplitAt for Triple<'_> {
    fn len(&self) -> usize {
        self.out.len()
    }

    fn split_at(self, mid: usize) -> (Self, Self) {
        let (a0, a1) = self.a.split_at(mid);
        let (b0, b1) = self.b.split_at(mid);
        let (o0, o1) = self.out.split_at_mut(mid);
        (
            Triple {
                a: a0,
                b: b0,
                out: o0,
            },
            Triple {
                a: a1,
                b: b1,
                out: o1,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{generate_poisson125, spmv};

    #[test]
    fn config_validation() {
        assert!(Device::host(DeviceConfig::new(0, 1.0)).is_err());
        assert!(Device::host(DeviceConfig::new(1, 0.5)).is_err());
        assert!(Device::host(DeviceConfig::new(1, f64::INFINITY)).is_err());
        assert!(Device::host(DeviceConfig::new(3, 2.0)).is_ok());
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let a = generate_poisson125(6).unwrap();
        let x: Vec<f64> = (0..a.n_rows()).map(|i| (i as f64 * 0.37).sin()).collect();
        let reference = spmv(&a, &x).unwrap();
        for workers in [1, 2, 3, 7] {
            let dev = Device::accel(DeviceConfig::new(workers, 1.0)).unwrap();
            let mut y = vec![0.0; a.n_rows()];
            dev.spmv(&a, &x, &mut y).unwrap();
            assert_eq!(y, reference);
            let mut r = vec![0.0; a.n_rows()];
            dev.residual(&a, &x, &reference, &mut r).unwrap();
            assert!(r.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn throttle_stretches_kernels() {
        let a = generate_poisson125(12).unwrap();
        let x = vec![1.0; a.n_rows()];
        let mut y = vec![0.0; a.n_rows()];
        let plain = Device::host(DeviceConfig::default()).unwrap();
        let slow = Device::accel(DeviceConfig::new(1, 4.0)).unwrap();
        let fast = (0..3)
            .map(|_| {
                plain
                    .timed_spmv_rows(&a, 0..a.n_rows(), &x, &mut y)
                    .unwrap()
            })
            .min()
            .unwrap();
        let slowed = (0..3)
            .map(|_| slow.timed_spmv_rows(&a, 0..a.n_rows(), &x, &mut y).unwrap())
            .min()
            .unwrap();
        let ratio = slowed.as_secs_f64() / fast.as_secs_f64();
        assert!(ratio > 2.5, "throttle ratio {ratio}");
    }
}
