use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::hetero::{DeviceProfile, PartitionSummary};

/// Values moved across transfer channels during the iteration loop.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferSummary {
    pub copies: u64,
    pub values: u64,
}

/// `||b - A x - r||_2 / ||b||_2` observed after an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSample {
    pub iteration: usize,
    pub relative_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub strategy: String,
    pub converged: bool,
    pub iterations: usize,
    pub final_norm: f64,
    /// Preconditioned residual norm before the first iteration and after each
    /// one; empty unless history recording was requested.
    #[serde(default)]
    pub history: Vec<f64>,
    /// Wall time in seconds per named phase.
    #[serde(default)]
    pub phase_times: BTreeMap<String, f64>,
    #[serde(default)]
    pub verification_error: Option<f64>,
    #[serde(default)]
    pub drift: Vec<DriftSample>,
    #[serde(default)]
    pub transfers: TransferSummary,
    #[serde(default)]
    pub profile: Option<DeviceProfile>,
    #[serde(default)]
    pub partition: Option<PartitionSummary>,
    /// Largest host/accelerator replica mismatch seen, when checked.
    #[serde(default)]
    pub replica_divergence: Option<f64>,
}

impl SolveReport {
    pub fn new(strategy: impl Into<String>) -> Self {
        Self {
            strategy: strategy.into(),
            converged: false,
            iterations: 0,
            final_norm: f64::INFINITY,
            history: Vec::new(),
            phase_times: BTreeMap::new(),
            verification_error: None,
            drift: Vec::new(),
            transfers: TransferSummary::default(),
            profile: None,
            partition: None,
            replica_divergence: None,
        }
    }

    pub fn add_time(&mut self, phase: &str, seconds: f64) {
        *self.phase_times.entry(phase.to_owned()).or_insert(0.0) += seconds;
    }

    pub fn phase_time(&self, phase: &str) -> f64 {
        self.phase_times.get(phase).copied().unwrap_or(0.0)
    }

    /// Iteration-loop wall time divided by the iteration count.
    pub fn seconds_per_iteration(&self) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            self.phase_time("iterate") / self.iterations as f64
        }
    }

    pub(crate) fn record_norm(&mut self, record: bool, norm: f64) {
        self.final_norm = norm;
        if record {
            self.history.push(norm);
        }
    }
}
