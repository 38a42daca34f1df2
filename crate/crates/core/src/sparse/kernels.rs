//! Single-threaded numerical kernels.
//!
//! Every reduction accumulates left to right, so a kernel returns the same
//! bits no matter how the caller splits the surrounding work into chunks.

use std::ops::Range;

use crate::error::{check_len, Result};
use crate::sparse::CsrMatrix;

/// `y = A x`.
pub fn spmv(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; a.n_rows()];
    spmv_into(a, x, &mut y)?;
    Ok(y)
}

pub fn spmv_into(a: &CsrMatrix, x: &[f64], y: &mut [f64]) -> Result<()> {
    spmv_rows_into(a, 0..a.n_rows(), x, y)
}

/// `y = A[rows, :] x`, with `y` holding one entry per row of `rows`.
pub fn spmv_rows_into(a: &CsrMatrix, rows: Range<usize>, x: &[f64], y: &mut [f64]) -> Result<()> {
    check_len("spmv input", a.n_cols(), x.len())?;
    check_len("spmv output", rows.len(), y.len())?;
    let offsets = a.row_offsets();
    let cols = a.col_indices();
    let vals = a.values();
    for (yi, row) in y.iter_mut().zip(rows) {
        let mut acc = 0.0;
        for k in offsets[row]..offsets[row + 1] {
            acc += vals[k] * x[cols[k]];
        }
        *yi = acc;
    }
    Ok(())
}

/// `r = b - A x`.
pub fn residual_into(a: &CsrMatrix, x: &[f64], b: &[f64], r: &mut [f64]) -> Result<()> {
    check_len("residual rhs", a.n_rows(), b.len())?;
    spmv_into(a, x, r)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    Ok(())
}

pub fn dot(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len("dot", x.len(), y.len())?;
    Ok(x.iter().zip(y).fold(0.0, |acc, (a, b)| acc + a * b))
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, v| acc + v * v).sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// `y = x + beta * y`.
pub fn xpby(x: &[f64], beta: f64, y: &mut [f64]) -> Result<()> {
    check_len("xpby", x.len(), y.len())?;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = xi + beta * *yi;
    }
    Ok(())
}

/// `y = y + alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
    check_len("axpy", x.len(), y.len())?;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
    Ok(())
}

/// `y = y - alpha * x`.
pub fn aymx(alpha: f64, x: &[f64], y: &mut [f64]) -> Result<()> {
    check_len("aymx", x.len(), y.len())?;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= alpha * xi;
    }
    Ok(())
}

/// Something that can be cut into two independent halves at an index, so a
/// worker pool can hand disjoint pieces to different threads.
pub trait SplitAt: Sized {
    fn len(&self) -> usize;
    fn split_at(self, mid: usize) -> (Self, Self);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cuts into `parts` pieces of near-equal length (fewer when short).
    fn split_even(self, parts: usize) -> Vec<Self> {
        let parts = parts.max(1).min(self.len().max(1));
        let mut out = Vec::with_capacity(parts);
        let mut rest = self;
        for remaining in (1..=parts).rev() {
            let take = rest.len().div_ceil(remaining);
            let (head, tail) = rest.split_at(take);
            out.push(head);
            rest = tail;
        }
        out
    }
}

impl SplitAt for &mut [f64] {
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }

    fn split_at(self, mid: usize) -> (Self, Self) {
        self.split_at_mut(mid)
    }
}

/// Owned storage for the ten PIPECG vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipecgVectors {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
    pub z: Vec<f64>,
    pub q: Vec<f64>,
    pub s: Vec<f64>,
    pub p: Vec<f64>,
}

impl PipecgVectors {
    pub fn zeros(len: usize) -> Self {
        let z = || vec![0.0; len];
        Self {
            x: z(),
            r: z(),
            u: z(),
            w: z(),
            m: z(),
            n: z(),
            z: z(),
            q: z(),
            s: z(),
            p: z(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn slices(&mut self) -> PipecgSlices<'_> {
        PipecgSlices {
            x: &mut self.x,
            r: &mut self.r,
            u: &mut self.u,
            w: &mut self.w,
            z: &mut self.z,
            q: &mut self.q,
            s: &mut self.s,
            p: &mut self.p,
            m: &self.m,
            n: &self.n,
        }
    }
}

/// Borrowed view of the PIPECG vectors for one fused update. `m` and `n` are
/// only read.
#[derive(Debug)]
pub struct PipecgSlices<'a> {
    pub x: &'a mut [f64],
    pub r: &'a mut [f64],
    pub u: &'a mut [f64],
    pub w: &'a mut [f64],
    pub z: &'a mut [f64],
    pub q: &'a mut [f64],
    pub s: &'a mut [f64],
    pub p: &'a mut [f64],
    pub m: &'a [f64],
    pub n: &'a [f64],
}

impl PipecgSlices<'_> {
    fn check(&self) -> Result<()> {
        let len = self.x.len();
        for other in [
            self.r.len(),
            self.u.len(),
            self.w.len(),
            self.z.len(),
            self.q.len(),
            self.s.len(),
            self.p.len(),
            self.m.len(),
            self.n.len(),
        ] {
            check_len("pipecg vector set", len, other)?;
        }
        Ok(())
    }
}

impl SplitAt for PipecgSlices<'_> {
    fn len(&self) -> usize {
        self.x.len()
    }

    fn split_at(self, mid: usize) -> (Self, Self) {
        let (x0, x1) = self.x.split_at_mut(mid);
        let (r0, r1) = self.r.split_at_mut(mid);
        let (u0, u1) = self.u.split_at_mut(mid);
        let (w0, w1) = self.w.split_at_mut(mid);
        let (z0, z1) = self.z.split_at_mut(mid);
        let (q0, q1) = self.q.split_at_mut(mid);
        let (s0, s1) = self.s.split_at_mut(mid);
        let (p0, p1) = self.p.split_at_mut(mid);
        let (m0, m1) = self.m.split_at(mid);
        let (n0, n1) = self.n.split_at(mid);
        (
            PipecgSlices {
                x: x0,
                r: r0,
                u: u0,
                w: w0,
                z: z0,
                q: q0,
                s: s0,
                p: p0,
                m: m0,
                n: n0,
            },
            PipecgSlices {
                x: x1,
                r: r1,
                u: u1,
                w: w1,
                z: z1,
                q: q1,
                s: s1,
                p: p1,
                m: m1,
                n: n1,
            },
        )
    }
}

/// The eight PIPECG vector updates in one pass over the index range:
///
/// ```text
/// z = n + beta z    q = m + beta q    s = w + beta s    p = u + beta p
/// x = x + alpha p   r = r - alpha s   u = u - alpha q   w = w - alpha z
/// ```
///
/// Bitwise equal to running the eight updates as separate loops in that order.
pub fn fused_pipecg_update(v: PipecgSlices<'_>, alpha: f64, beta: f64) -> Result<()> {
    v.check()?;
    let PipecgSlices {
        x,
        r,
        u,
        w,
        z,
        q,
        s,
        p,
        m,
        n,
    } = v;
    for i in 0..x.len() {
        let zi = n[i] + beta * z[i];
        let qi = m[i] + beta * q[i];
        let si = w[i] + beta * s[i];
        let pi = u[i] + beta * p[i];
        z[i] = zi;
        q[i] = qi;
        s[i] = si;
        p[i] = pi;
        x[i] += alpha * pi;
        r[i] -= alpha * si;
        u[i] -= alpha * qi;
        w[i] -= alpha * zi;
    }
    Ok(())
}

/// The updates that do not read `n`: q, s, p, x, r and u.
#[derive(Debug)]
pub struct IndependentSlices<'a> {
    pub x: &'a mut [f64],
    pub r: &'a mut [f64],
    pub u: &'a mut [f64],
    pub q: &'a mut [f64],
    pub s: &'a mut [f64],
    pub p: &'a mut [f64],
    pub w: &'a [f64],
    pub m: &'a [f64],
}

impl SplitAt for IndependentSlices<'_> {
    fn len(&self) -> usize {
        self.x.len()
    }

    fn split_at(self, mid: usize) -> (Self, Self) {
        let (x0, x1) = self.x.split_at_mut(mid);
        let (r0, r1) = self.r.split_at_mut(mid);
        let (u0, u1) = self.u.split_at_mut(mid);
        let (q0, q1) = self.q.split_at_mut(mid);
        let (s0, s1) = self.s.split_at_mut(mid);
        let (p0, p1) = self.p.split_at_mut(mid);
        let (w0, w1) = self.w.split_at(mid);
        let (m0, m1) = self.m.split_at(mid);
        (
            IndependentSlices {
                x: x0,
                r: r0,
                u: u0,
                q: q0,
                s: s0,
                p: p0,
                w: w0,
                m: m0,
            },
            IndependentSlices {
                x: x1,
                r: r1,
                u: u1,
                q: q1,
                s: s1,
                p: p1,
                w: w1,
                m: m1,
            },
        )
    }
}

pub fn pipecg_update_independent(v: IndependentSlices<'_>, alpha: f64, beta: f64) -> Result<()> {
    let len = v.x.len();
    for other in [
        v.r.len(),
        v.u.len(),
        v.q.len(),
        v.s.len(),
        v.p.len(),
        v.w.len(),
        v.m.len(),
    ] {
        check_len("pipecg independent update", len, other)?;
    }
    let IndependentSlices {
        x,
        r,
        u,
        q,
        s,
        p,
        w,
        m,
    } = v;
    for i in 0..len {
        let qi = m[i] + beta * q[i];
        let si = w[i] + beta * s[i];
        let pi = u[i] + beta * p[i];
        q[i] = qi;
        s[i] = si;
        p[i] = pi;
        x[i] += alpha * pi;
        r[i] -= alpha * si;
        u[i] -= alpha * qi;
    }
    Ok(())
}

/// The updates that need the fresh `n`: z and then w.
#[derive(Debug)]
pub struct DependentSlices<'a> {
    pub z: &'a mut [f64],
    pub w: &'a mut [f64],
    pub n: &'a [f64],
}

impl SplitAt for DependentSlices<'_> {
    fn len(&self) -> usize {
        self.z.len()
    }

    fn split_at(self, mid: usize) -> (Self, Self) {
        let (z0, z1) = self.z.split_at_mut(mid);
        let (w0, w1) = self.w.split_at_mut(mid);
        let (n0, n1) = self.n.split_at(mid);
        (
            DependentSlices {
                z: z0,
                w: w0,
                n: n0,
            },
            DependentSlices {
                z: z1,
                w: w1,
                n: n1,
            },
        )
    }
}

pub fn pipecg_update_dependent(v: DependentSlices<'_>, alpha: f64, beta: f64) -> Result<()> {
    check_len("pipecg dependent update", v.z.len(), v.w.len())?;
    check_len("pipecg dependent update", v.z.len(), v.n.len())?;
    let DependentSlices { z, w, n } = v;
    for i in 0..z.len() {
        let zi = n[i] + beta * z[i];
        z[i] = zi;
        w[i] -= alpha * zi;
    }
    Ok(())
}
