//! Row-split PIPECG: the host owns rows `0..k`, the accelerator rows `k..N`.
//!
//! `k` comes from a measured (or injected) SPMV speed ratio. Each device
//! keeps its own slices of every vector plus a full-length `m` buffer in which
//! only its own segment is authoritative. Per iteration each side ships its
//! `m` segment to the other, does the updates that do not need `n`, reduces
//! its share of `gamma` and the norm, and multiplies the part of its rows
//! whose columns it owns. Once the remote segment arrives it finishes the
//! SPMV, updates `z` and `w`, applies the preconditioner and reduces `delta`.

use std::ops::Range;
use std::thread;
use std::time::{Duration, Instant};

use crate::error::Result;
use crate::hetero::channel::transfers_since;
use crate::hetero::{
    check_problem, decompose_1d, decompose_2d, derive_split, profile_devices, ChannelPair, Device,
    DeviceProfile, DeviceStream, Devices, Recurrence, Span, Store, VecName,
};
use crate::solvers::{pipecg_solve_with, Kernels, SolveReport, SolverConfig};
use crate::sparse::{CsrMatrix, JacobiPreconditioner, RowRangeView, SpmvPhase};

#[derive(Debug, Clone, PartialEq)]
pub struct Hybrid3Options {
    /// Skips measurement and splits by this profile.
    pub profile_override: Option<DeviceProfile>,
    pub profile_runs: usize,
    /// Profile on the leading rows only.
    pub profile_rows: Option<usize>,
}

impl Default for Hybrid3Options {
    fn default() -> Self {
        Self {
            profile_override: None,
            profile_runs: 5,
            profile_rows: None,
        }
    }
}

impl Hybrid3Options {
    pub fn with_profile(profile: DeviceProfile) -> Self {
        Self {
            profile_override: Some(profile),
            ..Self::default()
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn hybrid3_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    pc: &JacobiPreconditioner,
    cfg: &SolverConfig,
    devices: &Devices,
    channels: &ChannelPair,
    options: &Hybrid3Options,
) -> Result<(Vec<f64>, SolveReport)> {
    check_problem(a, b, x0, pc, cfg)?;
    let mut report = SolveReport::new("hybrid3");

    let clock = Instant::now();
    let profile = match &options.profile_override {
        Some(p) => p.clone(),
        None => profile_devices(
            a,
            &devices.host,
            &devices.accel,
            options.profile_runs,
            options.profile_rows,
        )?,
    };
    report.add_time("profile", clock.elapsed().as_secs_f64());

    let clock = Instant::now();
    let k = decompose_1d(a, derive_split(&profile, a.nnz()));
    let partition = decompose_2d(a, k)?;
    report.add_time("decompose", clock.elapsed().as_secs_f64());
    report.profile = Some(profile);
    report.partition = Some(partition.summary());

    let n = a.n_rows();
    if k == 0 || k == n {
        let device = if k == 0 {
            &devices.accel
        } else {
            &devices.host
        };
        let (x, single) = pipecg_solve_with(device, a, b, x0, pc, cfg)?;
        report.converged = single.converged;
        report.iterations = single.iterations;
        report.final_norm = single.final_norm;
        report.history = single.history;
        for (phase, t) in single.phase_times {
            report.add_time(&phase, t);
        }
        return Ok((x, report));
    }

    let host_owned = Side::new(&partition.host, pc);
    let accel_owned = Side::new(&partition.accel, pc);
    let (host_side, accel_side) = (&host_owned, &accel_owned);
    let summary = partition.summary();
    let host_needs_copy = summary.nnz2_host > 0;
    let accel_needs_copy = summary.nnz2_accel > 0;
    let host = &devices.host;
    let before = channels.stats();

    let x = thread::scope(|scope| -> Result<Vec<f64>> {
        let clock = Instant::now();
        let accel = DeviceStream::spawn(scope, &devices.accel, Store::new());
        let mut hs = Store::new();

        // setup exchanges u in full; this staging is not charged to the channels
        let accel_u = accel.submit(move |dev, st| accel_side.init_local(dev, st, b, x0));
        let mut u_full = host_side.init_local(host, &mut hs, b, x0)?;
        u_full.extend(accel_u.wait()?);
        let u_accel = u_full.clone();
        let accel_init = accel.submit(move |dev, st| accel_side.init_operator(dev, st, &u_accel));
        let host_init = host_side.init_operator(host, &mut hs, &u_full)?;
        let accel_init = accel_init.wait()?;
        let gamma = host_init.gamma + accel_init.gamma;
        let delta = host_init.delta + accel_init.delta;
        let norm = (host_init.norm_sq + accel_init.norm_sq).sqrt();
        drop(u_full);

        let mut rec = Recurrence::new(gamma, delta, norm);
        report.record_norm(cfg.record_history, norm);
        report.converged = norm < cfg.tolerance;
        report.add_time("setup", clock.elapsed().as_secs_f64());

        let start = Instant::now();
        let busy_start = accel.busy_time();
        let mut host_wait = Duration::ZERO;
        let mut accel_wait = Duration::ZERO;
        while !report.converged && rec.iteration < cfg.max_iterations {
            let (alpha, beta) = rec.next()?;
            let host_m = host_side.own();
            let accel_m = accel_side.own();
            let to_accel = if accel_needs_copy {
                Some(
                    channels
                        .to_accel
                        .copy_async(&hs, &[Span::range(VecName::M, host_m)])?,
                )
            } else {
                None
            };
            let to_host = host_needs_copy.then(|| {
                accel.submit(move |_, st| {
                    channels
                        .to_host
                        .copy_async(st, &[Span::range(VecName::M, accel_m)])
                })
            });
            let accel_first =
                accel.submit(move |dev, st| accel_side.independent_step(dev, st, alpha, beta));
            accel.launch(move |dev, st| accel_side.local_phase(dev, st));

            let (gamma_h, norm_sq_h) = host_side.independent_step(host, &mut hs, alpha, beta)?;
            host_side.local_phase(host, &mut hs)?;
            let ((gamma_a, norm_sq_a), blocked) = accel_first.wait_timed()?;
            host_wait += blocked;

            let gamma = gamma_h + gamma_a;
            let norm = (norm_sq_h + norm_sq_a).sqrt();
            rec.advance(alpha, gamma, norm)?;
            report.iterations = rec.iteration;
            report.record_norm(cfg.record_history, norm);
            if norm < cfg.tolerance {
                report.converged = true;
                break;
            }

            let accel_second = accel.submit(move |dev, st| {
                let blocked = match to_accel {
                    Some(copy) => {
                        let blocked = copy.wait(st)?;
                        accel_side.remote_phase(dev, st)?;
                        blocked
                    }
                    None => Duration::ZERO,
                };
                let delta = accel_side.dependent_step(dev, st, alpha, beta)?;
                Ok((delta, blocked))
            });
            if let Some(pending) = to_host {
                let (copy, blocked) = pending.wait_timed()?;
                host_wait += blocked + copy.wait(&mut hs)?;
                host_side.remote_phase(host, &mut hs)?;
            }
            let delta_h = host_side.dependent_step(host, &mut hs, alpha, beta)?;
            let ((delta_a, blocked_a), blocked) = accel_second.wait_timed()?;
            host_wait += blocked;
            accel_wait += blocked_a;
            rec.set_delta(delta_h + delta_a)?;
        }
        accel.synchronize()?;
        report.add_time("iterate", start.elapsed().as_secs_f64());
        report.add_time("host_wait", host_wait.as_secs_f64());
        report.add_time("accel_wait", accel_wait.as_secs_f64());
        report.add_time(
            "accel_compute",
            (accel.busy_time() - busy_start)
                .saturating_sub(accel_wait)
                .as_secs_f64(),
        );

        let mut x = hs.take(VecName::X)?;
        x.extend(accel.submit(|_, st| st.take(VecName::X)).wait()?);
        Ok(x)
    })?;

    report.transfers = transfers_since(before, channels.stats());
    Ok((x, report))
}

struct Partials {
    gamma: f64,
    delta: f64,
    norm_sq: f64,
}

/// One device's rows and the kernels it runs on them.
struct Side<'p> {
    view: &'p RowRangeView,
    pc: JacobiPreconditioner,
}

impl<'p> Side<'p> {
    fn new(view: &'p RowRangeView, pc: &JacobiPreconditioner) -> Self {
        Self {
            view,
            pc: pc.restrict(view.rows()),
        }
    }

    fn own(&self) -> Range<usize> {
        self.view.rows()
    }

    fn spmv_full(&self, dev: &Device, x: &[f64], y: &mut [f64]) -> Result<()> {
        dev.spmv_phase(self.view, SpmvPhase::Local, x, y)?;
        dev.spmv_phase(self.view, SpmvPhase::Remote, x, y)
    }

    /// `x`, `r = b - A x0` and `u = M^{-1} r` on the own rows; returns `u`.
    fn init_local(&self, dev: &Device, st: &mut Store, b: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
        let rows = self.own();
        let mut r = vec![0.0; rows.len()];
        self.spmv_full(dev, x0, &mut r)?;
        for (ri, bi) in r.iter_mut().zip(&b[rows.clone()]) {
            *ri = bi - *ri;
        }
        let mut u = vec![0.0; rows.len()];
        dev.precondition(&self.pc, &r, &mut u)?;
        st.insert(VecName::X, x0[rows].to_vec());
        st.insert(VecName::R, r);
        st.insert(VecName::U, u.clone());
        Ok(u)
    }

    /// `w = A u` and the own segment of `m = M^{-1} w`, given the full `u`.
    fn init_operator(&self, dev: &Device, st: &mut Store, u_full: &[f64]) -> Result<Partials> {
        let len = self.view.row_count();
        let mut w = vec![0.0; len];
        self.spmv_full(dev, u_full, &mut w)?;
        let mut m = vec![0.0; self.view.n_cols()];
        dev.precondition(&self.pc, &w, &mut m[self.own()])?;
        st.insert(VecName::W, w);
        st.insert(VecName::M, m);
        for name in [VecName::N, VecName::Z, VecName::Q, VecName::S, VecName::P] {
            st.insert(name, vec![0.0; len]);
        }
        let (r, u, w) = (
            st.get(VecName::R)?,
            st.get(VecName::U)?,
            st.get(VecName::W)?,
        );
        Ok(Partials {
            gamma: dev.dot(r, u)?,
            delta: dev.dot(w, u)?,
            norm_sq: dev.dot(u, u)?,
        })
    }

    /// The `q, s, p, x, r, u` updates and the partial `gamma` and `(u, u)`.
    fn independent_step(
        &self,
        dev: &Device,
        st: &mut Store,
        alpha: f64,
        beta: f64,
    ) -> Result<(f64, f64)> {
        let m = st.take(VecName::M)?;
        let updated = st
            .independent_slices(&m[self.own()])
            .and_then(|v| dev.update_independent(v, alpha, beta));
        st.insert(VecName::M, m);
        updated?;
        let (r, u) = (st.get(VecName::R)?, st.get(VecName::U)?);
        Ok((dev.dot(r, u)?, dev.dot(u, u)?))
    }

    fn local_phase(&self, dev: &Device, st: &mut Store) -> Result<()> {
        let mut n = st.take(VecName::N)?;
        let done = dev.spmv_phase(self.view, SpmvPhase::Local, st.get(VecName::M)?, &mut n);
        st.insert(VecName::N, n);
        done
    }

    fn remote_phase(&self, dev: &Device, st: &mut Store) -> Result<()> {
        let mut n = st.take(VecName::N)?;
        let done = dev.spmv_phase(self.view, SpmvPhase::Remote, st.get(VecName::M)?, &mut n);
        st.insert(VecName::N, n);
        done
    }

    /// `z`, `w`, the own segment of `m = M^{-1} w`, and the partial `delta`.
    fn dependent_step(&self, dev: &Device, st: &mut Store, alpha: f64, beta: f64) -> Result<f64> {
        dev.update_dependent(st.dependent_slices()?, alpha, beta)?;
        let mut m = st.take(VecName::M)?;
        let applied = st
            .get(VecName::W)
            .and_then(|w| dev.precondition(&self.pc, w, &mut m[self.own()]));
        st.insert(VecName::M, m);
        applied?;
        dev.dot(st.get(VecName::W)?, st.get(VecName::U)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::pipecg_solve;
    use crate::sparse::generate_poisson125;

    fn problem() -> (CsrMatrix, JacobiPreconditioner, Vec<f64>, Vec<f64>) {
        let a = generate_poisson125(7).unwrap();
        let pc = JacobiPreconditioner::setup(&a).unwrap();
        let b: Vec<f64> = (0..a.n_rows())
            .map(|i| 1.0 + ((i * 7) % 5) as f64)
            .collect();
        let x0 = vec![0.0; a.n_rows()];
        (a, pc, b, x0)
    }

    #[test]
    fn split_run_tracks_reference() {
        let (a, pc, b, x0) = problem();
        let cfg = SolverConfig::default().with_tolerance(1e-8);
        let (x_ref, r_ref) = pipecg_solve(&a, &b, &x0, &pc, &cfg).unwrap();
        let channels = ChannelPair::instant();
        let opts = Hybrid3Options::with_profile(DeviceProfile::pinned(0.4).unwrap());
        let (x, r) =
            hybrid3_solve(&a, &b, &x0, &pc, &cfg, &Devices::plain(), &channels, &opts).unwrap();
        assert!(r.converged);
        assert!(r.iterations.abs_diff(r_ref.iterations) <= 1);
        let scale = crate::sparse::norm_inf(&x_ref);
        for (xi, yi) in x.iter().zip(&x_ref) {
            assert!((xi - yi).abs() <= 1e-6 * scale);
        }
        assert_eq!(r.transfers.values, (a.n_rows() * r.iterations) as u64);
        assert_eq!(r.transfers.copies, 2 * r.iterations as u64);
    }

    #[test]
    fn whole_problem_on_one_side_moves_nothing() {
        let (a, pc, b, x0) = problem();
        let cfg = SolverConfig::default();
        let (x_ref, _) = pipecg_solve(&a, &b, &x0, &pc, &cfg).unwrap();
        for r_host in [0.0, 1.0] {
            let channels = ChannelPair::instant();
            let opts = Hybrid3Options::with_profile(DeviceProfile::pinned(r_host).unwrap());
            let (x, r) =
                hybrid3_solve(&a, &b, &x0, &pc, &cfg, &Devices::plain(), &channels, &opts).unwrap();
            assert_eq!(x, x_ref);
            assert_eq!(r.transfers.copies, 0);
            assert_eq!(
                r.partition.unwrap().k,
                if r_host == 0.0 { 0 } else { a.n_rows() }
            );
        }
    }
}
