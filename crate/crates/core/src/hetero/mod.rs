//! An emulated host + accelerator node and the hybrid PIPECG schedules that
//! run on it.
//!
//! Each device is a worker pool with an optional slowdown factor. The host is
//! the calling thread; the accelerator executes an in-order job stream on its
//! own thread. Data crosses between them only through [`TransferChannel`]s,
//! which add latency and bandwidth delays and count what they carry.

mod channel;
mod device;
mod hybrid1;
mod hybrid2;
mod hybrid3;
mod partition;
mod profile;
mod store;
mod stream;

pub use channel::{ChannelPair, CopyHandle, TransferChannel};
pub use device::{Device, DeviceConfig, DeviceId};
pub use hybrid1::hybrid1_solve;
pub use hybrid2::{hybrid2_solve, hybrid2_solve_checked};
pub use hybrid3::{hybrid3_solve, Hybrid3Options};
pub use partition::{decompose_1d, decompose_2d, Partition, PartitionSummary};
pub use profile::{derive_split, profile_devices, DeviceProfile, ProfileSource, TIMER_RESOLUTION};
pub use store::{Span, Store, VecName};
pub use stream::{DeviceStream, Pending};

use crate::error::{check_len, Error, Result};
use crate::solvers::{pipecg_scalars, SolverConfig};
use crate::sparse::{CsrMatrix, JacobiPreconditioner};

#[derive(Debug)]
pub struct Devices {
    pub host: Device,
    pub accel: Device,
}

impl Devices {
    pub fn new(host: DeviceConfig, accel: DeviceConfig) -> Result<Self> {
        Ok(Self {
            host: Device::host(host)?,
            accel: Device::accel(accel)?,
        })
    }

    /// Single-worker, unthrottled devices.
    pub fn plain() -> Self {
        Self::new(DeviceConfig::default(), DeviceConfig::default())
            .expect("default device config is valid")
    }
}

fn check_problem(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    pc: &JacobiPreconditioner,
    cfg: &SolverConfig,
) -> Result<()> {
    cfg.validate()?;
    let n = a.n_rows();
    check_len("hybrid matrix", n, a.n_cols())?;
    check_len("hybrid rhs", n, b.len())?;
    check_len("hybrid initial guess", n, x0.len())?;
    check_len("hybrid preconditioner", n, pc.len())
}

/// The scalar half of the PIPECG recurrence, kept by the orchestrator while
/// the vectors live on the devices.
#[derive(Debug, Clone, Copy)]
struct Recurrence {
    gamma: f64,
    gamma_prev: f64,
    delta: f64,
    alpha_prev: f64,
    norm: f64,
    /// Completed iterations.
    iteration: usize,
}

impl Recurrence {
    fn new(gamma: f64, delta: f64, norm: f64) -> Self {
        Self {
            gamma,
            gamma_prev: 0.0,
            delta,
            alpha_prev: 0.0,
            norm,
            iteration: 0,
        }
    }

    fn next(&self) -> Result<(f64, f64)> {
        pipecg_scalars(
            self.gamma,
            self.gamma_prev,
            self.delta,
            self.alpha_prev,
            self.iteration,
        )
    }

    /// Installs `gamma` and the residual norm of the iteration that used
    /// `alpha`.
    fn advance(&mut self, alpha: f64, gamma: f64, norm: f64) -> Result<()> {
        if !gamma.is_finite() || gamma < 0.0 || !norm.is_finite() {
            return Err(Error::Breakdown {
                iteration: self.iteration,
                reason: format!("gamma = {gamma}, norm = {norm}"),
            });
        }
        self.alpha_prev = alpha;
        self.gamma_prev = self.gamma;
        self.gamma = gamma;
        self.norm = norm;
        self.iteration += 1;
        Ok(())
    }

    fn set_delta(&mut self, delta: f64) -> Result<()> {
        if !delta.is_finite() {
            return Err(Error::Breakdown {
                iteration: self.iteration.saturating_sub(1),
                reason: format!("delta = {delta}"),
            });
        }
        self.delta = delta;
        Ok(())
    }
}
