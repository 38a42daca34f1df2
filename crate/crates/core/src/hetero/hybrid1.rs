//! Vector work, preconditioning and SPMV on the accelerator; the three dot
//! products on the host.
//!
//! Per iteration the accelerator runs the fused update, ships `w`, `r` and `u`
//! to the host in one copy, and goes straight on to `m = M^{-1} w`,
//! `n = A m` while the host reduces the dots and decides convergence.

use std::thread;
use std::time::{Duration, Instant};

use crate::error::Result;
use crate::hetero::channel::transfers_since;
use crate::hetero::{check_problem, Devices, Recurrence, Span, Store, TransferChannel, VecName};
use crate::solvers::{Kernels, PipecgState, SolveReport, SolverConfig};
use crate::sparse::{CsrMatrix, JacobiPreconditioner};

pub fn hybrid1_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    pc: &JacobiPreconditioner,
    cfg: &SolverConfig,
    devices: &Devices,
    to_host: &TransferChannel,
) -> Result<(Vec<f64>, SolveReport)> {
    check_problem(a, b, x0, pc, cfg)?;
    let mut report = SolveReport::new("hybrid1");
    let host = &devices.host;
    let before = to_host.stats();

    let x = thread::scope(|scope| -> Result<Vec<f64>> {
        let setup = Instant::now();
        let accel = crate::hetero::DeviceStream::spawn(scope, &devices.accel, Store::new());
        let init = accel.submit(move |dev, store| {
            let state = PipecgState::init(dev, a, b, x0, pc)?;
            let scalars = (state.gamma, state.delta, state.norm);
            store.install(state.vectors);
            Ok(scalars)
        });
        let (gamma, delta, norm) = init.wait()?;
        let mut rec = Recurrence::new(gamma, delta, norm);
        report.record_norm(cfg.record_history, norm);
        report.converged = norm < cfg.tolerance;
        report.add_time("setup", setup.elapsed().as_secs_f64());

        let start = Instant::now();
        let busy_start = accel.busy_time();
        let mut waited = Duration::ZERO;
        let mut local = Store::new();
        while !report.converged && rec.iteration < cfg.max_iterations {
            let (alpha, beta) = rec.next()?;
            accel.launch(move |dev, store| dev.fused_update(store.pipecg_slices()?, alpha, beta));
            let copy = accel.submit(move |_, store| {
                to_host.copy_async(
                    store,
                    &[
                        Span::whole(VecName::W),
                        Span::whole(VecName::R),
                        Span::whole(VecName::U),
                    ],
                )
            });
            accel.launch(move |dev, store| {
                let mut m = store.take(VecName::M)?;
                let mut n = store.take(VecName::N)?;
                dev.precondition(pc, store.get(VecName::W)?, &mut m)?;
                dev.spmv(a, &m, &mut n)?;
                store.insert(VecName::M, m);
                store.insert(VecName::N, n);
                Ok(())
            });

            let (handle, blocked) = copy.wait_timed()?;
            waited += blocked + handle.wait(&mut local)?;
            let (w, r, u) = (
                local.get(VecName::W)?,
                local.get(VecName::R)?,
                local.get(VecName::U)?,
            );
            let gamma = host.dot(r, u)?;
            let delta = host.dot(w, u)?;
            let norm = host.dot(u, u)?.sqrt();
            rec.advance(alpha, gamma, norm)?;
            rec.set_delta(delta)?;
            report.iterations = rec.iteration;
            report.record_norm(cfg.record_history, norm);
            report.converged = norm < cfg.tolerance;
        }
        accel.synchronize()?;
        report.add_time("iterate", start.elapsed().as_secs_f64());
        report.add_time("host_wait", waited.as_secs_f64());
        report.add_time(
            "accel_compute",
            (accel.busy_time() - busy_start).as_secs_f64(),
        );
        accel.submit(|_, store| store.take(VecName::X)).wait()
    })?;

    report.transfers = transfers_since(before, to_host.stats());
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::pipecg_solve;
    use crate::sparse::generate_poisson125;

    #[test]
    fn matches_reference_bitwise() {
        let a = generate_poisson125(6).unwrap();
        let pc = JacobiPreconditioner::setup(&a).unwrap();
        let b: Vec<f64> = (0..a.n_rows()).map(|i| 1.0 + (i % 7) as f64).collect();
        let x0 = vec![0.0; a.n_rows()];
        let cfg = SolverConfig::default().with_history();
        let (x_ref, r_ref) = pipecg_solve(&a, &b, &x0, &pc, &cfg).unwrap();
        let ch = TransferChannel::instant();
        let (x, r) = hybrid1_solve(&a, &b, &x0, &pc, &cfg, &Devices::plain(), &ch).unwrap();
        assert_eq!(x, x_ref);
        assert_eq!(r.history, r_ref.history);
        assert_eq!(r.iterations, r_ref.iterations);
        assert_eq!(r.transfers.copies, r.iterations as u64);
        assert_eq!(r.transfers.values, 3 * (a.n_rows() * r.iterations) as u64);
    }
}
