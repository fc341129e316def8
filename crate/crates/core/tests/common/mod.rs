//! Dense reference helpers shared by the oracle tests. Everything here is
//! written against plain `Vec<Vec<f64>>` so it stays independent of the
//! crate's own matrix and Kronecker-free code paths.

#![allow(dead_code)]

pub mod protocol;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = (a.len(), a[0].len());
    let (br, bc) = (b.len(), b[0].len());
    let mut out = zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[i * br + k][j * bc + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matvec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let mut out = zeros(a.len(), b[0].len());
    for i in 0..a.len() {
        for k in 0..b.len() {
            for j in 0..b[0].len() {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn transpose(a: &Mat) -> Mat {
    let mut out = zeros(a[0].len(), a.len());
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[j][i] = v;
        }
    }
    out
}

pub fn quad(a: &Mat, x: &[f64]) -> f64 {
    matvec(a, x).iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Laplacian from an adjacency list, straight from `l_ii = deg`, `l_ij = -a_ij`.
pub fn laplacian_from_edges(n: usize, edges: &[(usize, usize)]) -> Mat {
    let mut l = zeros(n, n);
    for &(a, b) in edges {
        l[a][b] = -1.0;
        l[b][a] = -1.0;
    }
    for i in 0..n {
        l[i][i] = -l[i].iter().sum::<f64>();
    }
    l
}

/// Centering matrix `M = I - 11^T / n`.
pub fn centering(n: usize) -> Mat {
    let mut m = identity(n);
    for row in &mut m {
        for v in row.iter_mut() {
            *v -= 1.0 / n as f64;
        }
    }
    m
}

pub fn sgn(y: f64) -> f64 {
    if y > 0.0 {
        1.0
    } else if y < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal form
/// `(diagonal, off_diagonal)` by explicit reflections `A <- H A H`.
pub fn tridiagonalize(a: &Mat) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut m = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = ((k + 1)..n).map(|i| m[i][k]).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        let mut h = identity(n);
        for i in 0..v.len() {
            for j in 0..v.len() {
                h[k + 1 + i][k + 1 + j] -= 2.0 * v[i] * v[j] / (vn * vn);
            }
        }
        m = matmul(&matmul(&h, &m), &h);
    }
    let d = (0..n).map(|i| m[i][i]).collect();
    let e = (1..n).map(|i| m[i][i - 1]).collect();
    (d, e)
}

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` strictly below
/// `x`: sign changes of the Sturm sequence formed by the characteristic
/// polynomials of its leading blocks, evaluated as ratios.
pub fn count_below(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let coupling = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues (with multiplicity) of a symmetric matrix by bisection on
/// the Sturm count; accurate to `tol`.
pub fn eigenvalues_by_bisection(a: &Mat, tol: f64) -> Vec<f64> {
    let n = a.len();
    let (d, e) = tridiagonalize(a);
    // Gershgorin enclosure, padded with irrational offsets so midpoints never
    // land on the small integers typical of Laplacian spectra.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| a[i][j].abs()).sum();
        lo = lo.min(a[i][i] - radius);
        hi = hi.max(a[i][i] + radius);
    }
    lo -= 0.1 * std::f64::consts::PI;
    hi += 0.1 * std::f64::consts::E;
    (1..=n)
        .map(|k| {
            // smallest x with count_below(x) >= k
            let (mut a_lo, mut a_hi) = (lo, hi);
            while a_hi - a_lo > tol {
                let mid = 0.5 * (a_lo + a_hi);
                if count_below(&d, &e, mid) >= k {
                    a_hi = mid;
                } else {
                    a_lo = mid;
                }
            }
            0.5 * (a_lo + a_hi)
        })
        .collect()
}
