use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use hybrid_pipecg::hetero::{
    hybrid1_solve, hybrid2_solve, hybrid3_solve, ChannelPair, Devices, Hybrid3Options,
    TransferChannel,
};
use hybrid_pipecg::solvers::{pcg_solve, pipecg_solve, SolverConfig};
use hybrid_pipecg::Result;
use serde::{Deserialize, Serialize};

use crate::problem::Problem;
use crate::record::{now_ms, DeviceSnapshot, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Pcg,
    Pipecg,
    Hybrid1,
    Hybrid2,
    Hybrid3,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Pcg,
        Strategy::Pipecg,
        Strategy::Hybrid1,
        Strategy::Hybrid2,
        Strategy::Hybrid3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Pcg => "pcg",
            Strategy::Pipecg => "pipecg",
            Strategy::Hybrid1 => "hybrid1",
            Strategy::Hybrid2 => "hybrid2",
            Strategy::Hybrid3 => "hybrid3",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim())
            .ok_or_else(|| {
                format!(
                    "unknown strategy `{s}` (expected pcg, pipecg, hybrid1, hybrid2 or hybrid3)"
                )
            })
    }
}

/// Everything besides the problem that a run depends on.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub devices: DeviceSnapshot,
    pub hybrid3: Hybrid3Options,
}

impl RunConfig {
    fn channel(&self) -> Result<TransferChannel> {
        TransferChannel::new(
            Duration::from_micros(self.devices.xfer_latency_us),
            self.devices.xfer_bandwidth_mbps * 1e6,
        )
    }

    pub fn build_devices(&self) -> Result<Devices> {
        Devices::new(self.devices.host, self.devices.accel)
    }
}

pub fn run_strategy(problem: &Problem, strategy: Strategy, cfg: &RunConfig) -> Result<RunRecord> {
    let p = problem;
    let solver = &cfg.solver;
    let (x, mut report) = match strategy {
        Strategy::Pcg => pcg_solve(&p.a, &p.b, &p.x0, &p.pc, solver)?,
        Strategy::Pipecg => pipecg_solve(&p.a, &p.b, &p.x0, &p.pc, solver)?,
        Strategy::Hybrid1 => {
            let devices = cfg.build_devices()?;
            hybrid1_solve(&p.a, &p.b, &p.x0, &p.pc, solver, &devices, &cfg.channel()?)?
        }
        Strategy::Hybrid2 => {
            let devices = cfg.build_devices()?;
            hybrid2_solve(&p.a, &p.b, &p.x0, &p.pc, solver, &devices, &cfg.channel()?)?
        }
        Strategy::Hybrid3 => {
            let devices = cfg.build_devices()?;
            let channels = ChannelPair {
                to_accel: cfg.channel()?,
                to_host: cfg.channel()?,
            };
            hybrid3_solve(
                &p.a,
                &p.b,
                &p.x0,
                &p.pc,
                solver,
                &devices,
                &channels,
                &cfg.hybrid3,
            )?
        }
    };
    report.verification_error = Some(p.verify(&x));
    Ok(RunRecord {
        problem: p.id.clone(),
        n: p.n(),
        nnz: p.a.nnz(),
        strategy: strategy.as_str().to_string(),
        partition: report.partition,
        report,
        devices: cfg.devices,
        timestamp_ms: now_ms(),
    })
}
