//! Both devices carry the full vector state; only `n` crosses the link.
//!
//! At the top of each iteration the accelerator ships its `n` and runs the
//! fused update, `m = M^{-1} w` and `n = A m`. The host meanwhile repeats the
//! `q, s, r, u` updates, reduces `gamma` and the norm, decides convergence,
//! and only then waits for `n` to finish `z, w`, its own `m` and `delta`.

use std::thread;
use std::time::{Duration, Instant};

use crate::error::Result;
use crate::hetero::channel::transfers_since;
use crate::hetero::{
    check_problem, DeviceStream, Devices, Recurrence, Span, Store, TransferChannel, VecName,
};
use crate::solvers::{Kernels, PipecgState, SolveReport, SolverConfig};
use crate::sparse::{norm_inf, CsrMatrix, JacobiPreconditioner};

/// Vectors the host keeps a replica of.
const REPLICATED: [VecName; 5] = [VecName::W, VecName::U, VecName::R, VecName::M, VecName::N];

pub fn hybrid2_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    pc: &JacobiPreconditioner,
    cfg: &SolverConfig,
    devices: &Devices,
    to_host: &TransferChannel,
) -> Result<(Vec<f64>, SolveReport)> {
    solve(a, b, x0, pc, cfg, devices, to_host, false)
}

/// As [`hybrid2_solve`], additionally comparing the host replicas with the
/// accelerator's vectors after every iteration. The largest elementwise gap
/// is reported as `replica_divergence`. The comparison synchronises the two
/// devices, so timings from this variant are not representative.
pub fn hybrid2_solve_checked(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    pc: &JacobiPreconditioner,
    cfg: &SolverConfig,
    devices: &Devices,
    to_host: &TransferChannel,
) -> Result<(Vec<f64>, SolveReport)> {
    solve(a, b, x0, pc, cfg, devices, to_host, true)
}

#[allow(clippy::too_many_arguments)]
fn solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    pc: &JacobiPreconditioner,
    cfg: &SolverConfig,
    devices: &Devices,
    to_host: &TransferChannel,
    check_replicas: bool,
) -> Result<(Vec<f64>, SolveReport)> {
    check_problem(a, b, x0, pc, cfg)?;
    let mut report = SolveReport::new("hybrid2");
    let host = &devices.host;
    let before = to_host.stats();

    let x = thread::scope(|scope| -> Result<Vec<f64>> {
        let setup = Instant::now();
        let accel = DeviceStream::spawn(scope, &devices.accel, Store::new());
        let init = accel.submit(move |dev, store| {
            let state = PipecgState::init(dev, a, b, x0, pc)?;
            let scalars = (state.gamma, state.delta, state.norm);
            store.install(state.vectors);
            Ok((scalars, snapshot(store)?))
        });
        let ((gamma, delta, norm), replicas) = init.wait()?;
        let mut hs = Store::new();
        let len = a.n_rows();
        for (name, values) in REPLICATED.into_iter().zip(replicas) {
            hs.insert(name, values);
        }
        for name in [VecName::Z, VecName::Q, VecName::S] {
            hs.insert(name, vec![0.0; len]);
        }
        let mut rec = Recurrence::new(gamma, delta, norm);
        report.record_norm(cfg.record_history, norm);
        report.converged = norm < cfg.tolerance;
        report.add_time("setup", setup.elapsed().as_secs_f64());

        let start = Instant::now();
        let busy_start = accel.busy_time();
        let mut waited = Duration::ZERO;
        let mut divergence: f64 = 0.0;
        while !report.converged && rec.iteration < cfg.max_iterations {
            let (alpha, beta) = rec.next()?;
            let copy =
                accel.submit(move |_, store| to_host.copy_async(store, &[Span::whole(VecName::N)]));
            accel.launch(move |dev, store| dev.fused_update(store.pipecg_slices()?, alpha, beta));
            accel.launch(move |dev, store| {
                let mut m = store.take(VecName::M)?;
                let mut n = store.take(VecName::N)?;
                dev.precondition(pc, store.get(VecName::W)?, &mut m)?;
                dev.spmv(a, &m, &mut n)?;
                store.insert(VecName::M, m);
                store.insert(VecName::N, n);
                Ok(())
            });

            let mut q = hs.take(VecName::Q)?;
            let mut s = hs.take(VecName::S)?;
            let mut r = hs.take(VecName::R)?;
            let mut u = hs.take(VecName::U)?;
            host.xpby(hs.get(VecName::M)?, beta, &mut q)?;
            host.xpby(hs.get(VecName::W)?, beta, &mut s)?;
            host.aymx(alpha, &s, &mut r)?;
            host.aymx(alpha, &q, &mut u)?;
            let gamma = host.dot(&r, &u)?;
            let norm = host.dot(&u, &u)?.sqrt();
            for (name, v) in [
                (VecName::Q, q),
                (VecName::S, s),
                (VecName::R, r),
                (VecName::U, u),
            ] {
                hs.insert(name, v);
            }
            rec.advance(alpha, gamma, norm)?;
            report.iterations = rec.iteration;
            report.record_norm(cfg.record_history, norm);
            if norm < cfg.tolerance {
                report.converged = true;
                break;
            }

            let (handle, blocked) = copy.wait_timed()?;
            waited += blocked + handle.wait(&mut hs)?;
            host.update_dependent(hs.dependent_slices()?, alpha, beta)?;
            let mut m = hs.take(VecName::M)?;
            host.precondition(pc, hs.get(VecName::W)?, &mut m)?;
            hs.insert(VecName::M, m);
            let delta = host.dot(hs.get(VecName::W)?, hs.get(VecName::U)?)?;
            rec.set_delta(delta)?;

            if check_replicas {
                let remote = accel.submit(|_, store| snapshot(store)).wait()?;
                for (name, theirs) in REPLICATED.into_iter().zip(remote) {
                    if name == VecName::N {
                        // the host never refreshes n past the last copy
                        continue;
                    }
                    let gap: Vec<f64> = hs
                        .get(name)?
                        .iter()
                        .zip(&theirs)
                        .map(|(h, t)| h - t)
                        .collect();
                    divergence = divergence.max(norm_inf(&gap));
                }
            }
        }
        accel.synchronize()?;
        report.add_time("iterate", start.elapsed().as_secs_f64());
        report.add_time("host_wait", waited.as_secs_f64());
        report.add_time(
            "accel_compute",
            (accel.busy_time() - busy_start).as_secs_f64(),
        );
        if check_replicas {
            report.replica_divergence = Some(divergence);
        }
        accel.submit(|_, store| store.take(VecName::X)).wait()
    })?;

    report.transfers = transfers_since(before, to_host.stats());
    Ok((x, report))
}

fn snapshot(store: &Store) -> Result<Vec<Vec<f64>>> {
    REPLICATED
        .iter()
        .map(|&name| store.get(name).map(<[f64]>::to_vec))
        .collect()
}
