use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use hybrid_pipecg::hetero::{
    decompose_1d, decompose_2d, derive_split, profile_devices, DeviceProfile, Devices,
    PartitionSummary,
};
use serde::Serialize;

use crate::cli::{run_config, CompareArgs, Format, ProfileArgs, SolveArgs};
use crate::error::{exit, CliError};
use crate::problem::build_problem;
use crate::record::{fill_speedups, CompareRow, DeviceSnapshot};
use crate::run::run_strategy;

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut out = open_out(path)?;
    out.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn write_csv(path: Option<&Path>, rows: &[CompareRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(open_out(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<u8, CliError> {
    let problem = build_problem(&args.source.spec(Some(&args.solver)))?;
    let cfg = run_config(&args.solver, &args.devices, &args.split)?;
    let record = run_strategy(&problem, args.strategy, &cfg)?;
    let out = args.output.out.as_deref();
    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => write_text(out, &record.to_json()?)?,
        Format::Csv => {
            let mut rows = vec![CompareRow::from_record(&record)];
            fill_speedups(&mut rows, &record.strategy);
            write_csv(out, &rows)?;
        }
    }
    Ok(if record.report.converged {
        exit::CONVERGED
    } else {
        exit::NOT_CONVERGED
    })
}

pub fn cmd_compare(args: &CompareArgs) -> Result<u8, CliError> {
    if args.strategies.is_empty() {
        return Err(CliError::Usage(
            "--strategies needs at least one entry".into(),
        ));
    }
    let baseline = args.baseline.unwrap_or(args.strategies[0]);
    if !args.strategies.contains(&baseline) {
        return Err(CliError::Usage(format!(
            "baseline `{baseline}` is not among --strategies"
        )));
    }
    let problem = build_problem(&args.source.spec(Some(&args.solver)))?;
    let cfg = run_config(&args.solver, &args.devices, &args.split)?;
    let mut rows = Vec::with_capacity(args.strategies.len());
    for &strategy in &args.strategies {
        let row = match run_strategy(&problem, strategy, &cfg) {
            Ok(record) => CompareRow::from_record(&record),
            Err(e) => {
                eprintln!("{strategy}: {e}");
                CompareRow::failed(&problem.id, problem.n(), problem.a.nnz(), strategy.as_str())
            }
        };
        rows.push(row);
    }
    fill_speedups(&mut rows, baseline.as_str());
    let out = args.output.out.as_deref();
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => write_csv(out, &rows)?,
        Format::Json => write_text(out, &serde_json::to_string_pretty(&rows)?)?,
    }
    Ok(if rows.iter().all(CompareRow::is_success) {
        exit::CONVERGED
    } else {
        exit::NOT_CONVERGED
    })
}

#[derive(Debug, Serialize)]
struct SplitReport {
    target_nnz: usize,
    n_host: usize,
    n_accel: usize,
    #[serde(flatten)]
    partition: PartitionSummary,
}

#[derive(Debug, Serialize)]
struct ProfileReport {
    problem: String,
    n: usize,
    nnz: usize,
    devices: DeviceSnapshot,
    profile: DeviceProfile,
    split: SplitReport,
}

pub fn cmd_profile(args: &ProfileArgs) -> Result<u8, CliError> {
    let problem = build_problem(&args.source.spec(None))?;
    let devices_cfg = args.devices.snapshot();
    let a = &problem.a;
    let profile = match args.split.pin_ratio {
        Some(r) => DeviceProfile::pinned(r)?,
        None => {
            let devices = Devices::new(devices_cfg.host, devices_cfg.accel)?;
            profile_devices(
                a,
                &devices.host,
                &devices.accel,
                args.runs as usize,
                args.split.profile_rows.map(|r| r as usize),
            )?
        }
    };
    let target_nnz = derive_split(&profile, a.nnz());
    let k = decompose_1d(a, target_nnz);
    let partition = decompose_2d(a, k)?.summary();
    let report = ProfileReport {
        problem: problem.id.clone(),
        n: problem.n(),
        nnz: a.nnz(),
        devices: devices_cfg,
        profile,
        split: SplitReport {
            target_nnz,
            n_host: k,
            n_accel: problem.n() - k,
            partition,
        },
    };
    write_text(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(exit::CONVERGED)
}
