#![allow(dead_code, clippy::needless_range_loop)]

use hybrid_pipecg::sparse::CsrMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - tail) / m[i][i];
    }
    x
}

pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// `Q diag(eigs) Q^T` with `Q` a product of random Householder reflections.
pub fn random_spd_linear(n: usize, cond: f64, rng: &mut StdRng) -> Vec<Vec<f64>> {
    let eigs: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                1.0
            } else {
                1.0 + (cond - 1.0) * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    rotate(eigs, rng)
}

pub fn random_spd(n: usize, cond: f64, rng: &mut StdRng) -> Vec<Vec<f64>> {
    let eigs: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                1.0
            } else {
                cond.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect();
    rotate(eigs, rng)
}

fn rotate(eigs: Vec<f64>, rng: &mut StdRng) -> Vec<Vec<f64>> {
    let n = eigs.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { eigs[i] } else { 0.0 }).collect())
        .collect();
    for _ in 0..3 {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        // A <- H A H with H = I - 2 v v^T / (v^T v)
        let h: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (if i == j { 1.0 } else { 0.0 }) - 2.0 * v[i] * v[j] / vv)
                    .collect()
            })
            .collect();
        a = matmul(&matmul(&h, &a), &h);
    }
    // exact symmetry
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    a
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Every (row, col, value) of the clipped 5x5x5-stencil operator on an
/// `n^3` grid, by direct enumeration of point pairs.
pub fn poisson_brute_force(n: usize) -> Vec<(usize, usize, f64)> {
    let idx = |x: usize, y: usize, z: usize| x + n * (y + n * z);
    let mut out = Vec::new();
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                let mut neighbours = Vec::new();
                for zz in 0..n {
                    for yy in 0..n {
                        for xx in 0..n {
                            let near =
                                x.abs_diff(xx) <= 2 && y.abs_diff(yy) <= 2 && z.abs_diff(zz) <= 2;
                            if near && (xx, yy, zz) != (x, y, z) {
                                neighbours.push(idx(xx, yy, zz));
                            }
                        }
                    }
                }
                let row = idx(x, y, z);
                out.push((row, row, neighbours.len() as f64 + 1.0));
                out.extend(neighbours.into_iter().map(|c| (row, c, -1.0)));
            }
        }
    }
    out.sort_by_key(|&(r, c, _)| (r, c));
    out
}

pub fn triplets_of(a: &CsrMatrix) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(a.nnz());
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        out.extend(cols.iter().zip(vals).map(|(&c, &v)| (i, c, v)));
    }
    out
}

pub fn random_vec(len: usize, rng: &mut StdRng) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random square matrix with a full positive diagonal and `per_row` extra
/// entries per row on average.
pub fn random_sparse(n: usize, per_row: f64, rng: &mut StdRng) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, rng.gen_range(1.0..4.0)));
        for j in 0..n {
            if j != i && rng.gen_bool((per_row / n as f64).min(1.0)) {
                t.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, t).unwrap()
}

pub fn max_rel_inf(x: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = x
        .iter()
        .zip(reference)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    gap / scale
}
