use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hetero::device::Device;
use crate::sparse::CsrMatrix;

/// Times below this are treated as unmeasurable and clamped.
pub const TIMER_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileSource {
    Measured,
    Injected,
    Pinned,
}

/// SPMV speeds of the two devices and the nonzero share each should receive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub source: ProfileSource,
    /// Seconds for one SPMV over the profiled rows.
    pub t_host: f64,
    pub t_accel: f64,
    /// Nonzeros per second.
    pub s_host: f64,
    pub s_accel: f64,
    pub r_host: f64,
    pub r_accel: f64,
    pub profiled_nnz: usize,
    pub profiled_rows: usize,
    /// Set when a time had to be clamped to the timer resolution.
    pub degenerate: bool,
}

impl DeviceProfile {
    pub fn from_times(
        t_host: f64,
        t_accel: f64,
        profiled_nnz: usize,
        profiled_rows: usize,
    ) -> Result<Self> {
        for (name, t) in [("host", t_host), ("accel", t_accel)] {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} SPMV time {t} is invalid"
                )));
            }
        }
        if profiled_nnz == 0 {
            return Err(Error::InvalidArgument(
                "profiled rows hold no nonzeros".into(),
            ));
        }
        let degenerate = t_host < TIMER_RESOLUTION || t_accel < TIMER_RESOLUTION;
        let t_host = t_host.max(TIMER_RESOLUTION);
        let t_accel = t_accel.max(TIMER_RESOLUTION);
        let s_host = profiled_nnz as f64 / t_host;
        let s_accel = profiled_nnz as f64 / t_accel;
        let r_host = s_host / (s_host + s_accel);
        Ok(Self {
            source: ProfileSource::Injected,
            t_host,
            t_accel,
            s_host,
            s_accel,
            r_host,
            r_accel: 1.0 - r_host,
            profiled_nnz,
            profiled_rows,
            degenerate,
        })
    }

    /// A fixed host share, bypassing measurement.
    pub fn pinned(r_host: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r_host) {
            return Err(Error::InvalidArgument(format!(
                "pinned host ratio must lie in [0, 1], got {r_host}"
            )));
        }
        Ok(Self {
            source: ProfileSource::Pinned,
            t_host: 0.0,
            t_accel: 0.0,
            s_host: 0.0,
            s_accel: 0.0,
            r_host,
            r_accel: 1.0 - r_host,
            profiled_nnz: 0,
            profiled_rows: 0,
            degenerate: false,
        })
    }
}

/// Times `runs` SPMVs over the first `rows` rows (all rows by default) on
/// each device in turn and keeps the fastest run of each.
pub fn profile_devices(
    a: &CsrMatrix,
    host: &Device,
    accel: &Device,
    runs: usize,
    rows: Option<usize>,
) -> Result<DeviceProfile> {
    if runs == 0 {
        return Err(Error::InvalidArgument(
            "profiling needs at least one run".into(),
        ));
    }
    let rows = rows.unwrap_or(a.n_rows()).min(a.n_rows());
    if rows == 0 {
        return Err(Error::InvalidArgument(
            "profiling needs at least one row".into(),
        ));
    }
    let x = vec![1.0; a.n_cols()];
    let mut y = vec![0.0; rows];
    let mut fastest = |dev: &Device| -> Result<Duration> {
        let mut best = Duration::MAX;
        for _ in 0..runs {
            best = best.min(dev.timed_spmv_rows(a, 0..rows, &x, &mut y)?);
        }
        Ok(best)
    };
    let t_host = fastest(host)?;
    let t_accel = fastest(accel)?;
    let mut profile = DeviceProfile::from_times(
        t_host.as_secs_f64(),
        t_accel.as_secs_f64(),
        a.nnz_in_rows(0..rows),
        rows,
    )?;
    profile.source = ProfileSource::Measured;
    Ok(profile)
}

/// Host nonzero target `floor(nnz * r_host)`.
pub fn derive_split(profile: &DeviceProfile, nnz: usize) -> usize {
    ((nnz as f64 * profile.r_host).floor() as usize).min(nnz)
}
