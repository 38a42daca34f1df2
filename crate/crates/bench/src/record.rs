use std::time::{SystemTime, UNIX_EPOCH};

use hybrid_pipecg::hetero::{DeviceConfig, PartitionSummary};
use hybrid_pipecg::solvers::SolveReport;
use serde::{Deserialize, Serialize};

/// Device and link settings a run was made with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceSnapshot {
    pub host: DeviceConfig,
    pub accel: DeviceConfig,
    pub xfer_latency_us: u64,
    /// Megabytes per second; 0 means unlimited.
    pub xfer_bandwidth_mbps: f64,
}

impl Default for DeviceSnapshot {
    fn default() -> Self {
        Self {
            host: DeviceConfig::default(),
            accel: DeviceConfig::default(),
            xfer_latency_us: 0,
            xfer_bandwidth_mbps: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub n: usize,
    pub nnz: usize,
    pub strategy: String,
    pub report: SolveReport,
    pub devices: DeviceSnapshot,
    #[serde(default)]
    pub partition: Option<PartitionSummary>,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
}

impl RunRecord {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Iteration-loop wall time.
    pub fn wall_ms(&self) -> f64 {
        self.report.phase_time("iterate") * 1e3
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub problem: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub nnz: usize,
    pub strategy: String,
    pub iterations: Option<usize>,
    /// `true`, `false`, or `failed` when the run aborted.
    pub converged: String,
    pub final_norm: Option<f64>,
    pub wall_ms: Option<f64>,
    pub transfer_values: Option<u64>,
    pub verify_inf_err: Option<f64>,
    pub speedup: Option<f64>,
}

impl CompareRow {
    pub fn from_record(rec: &RunRecord) -> Self {
        Self {
            problem: rec.problem.clone(),
            n: rec.n,
            nnz: rec.nnz,
            strategy: rec.strategy.clone(),
            iterations: Some(rec.report.iterations),
            converged: rec.report.converged.to_string(),
            final_norm: Some(rec.report.final_norm),
            wall_ms: Some(rec.wall_ms()),
            transfer_values: Some(rec.report.transfers.values),
            verify_inf_err: rec.report.verification_error,
            speedup: None,
        }
    }

    pub fn failed(problem: &str, n: usize, nnz: usize, strategy: &str) -> Self {
        Self {
            problem: problem.to_string(),
            n,
            nnz,
            strategy: strategy.to_string(),
            iterations: None,
            converged: "failed".to_string(),
            final_norm: None,
            wall_ms: None,
            transfer_values: None,
            verify_inf_err: None,
            speedup: None,
        }
    }

    pub fn is_success(&self) -> bool {
        self.converged == "true"
    }
}

/// Fills `speedup = baseline wall / row wall` for every row that has a time.
pub fn fill_speedups(rows: &mut [CompareRow], baseline: &str) {
    let base = rows
        .iter()
        .find(|r| r.strategy == baseline)
        .and_then(|r| r.wall_ms);
    for row in rows.iter_mut() {
        row.speedup = match (base, row.wall_ms) {
            (Some(_), Some(_)) if row.strategy == baseline => Some(1.0),
            (Some(b), Some(w)) if w > 0.0 => Some(b / w),
            _ => None,
        };
    }
}
