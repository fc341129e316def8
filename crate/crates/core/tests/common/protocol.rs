//! Stacked vector forms of the per-agent protocol laws, built from dense
//! Kronecker products.

use dat_core::protocol::{
    control_bounded, control_lipschitz, filter_accel_bounded, filter_accel_lipschitz,
};
use dat_core::{GainSetLipschitz, Graph, SignumPolicy};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::*;

pub struct Config {
    pub n: usize,
    pub p: usize,
    pub edges: Vec<(usize, usize)>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub pf: Vec<f64>,
    pub qf: Vec<f64>,
    pub r: Vec<f64>,
    pub vr: Vec<f64>,
}

/// Random connected graph (a random spanning path plus extra edges) and
/// random stacked states.
pub fn random_config(rng: &mut ChaCha8Rng) -> Config {
    let n = rng.gen_range(2..=6);
    let p = rng.gen_range(1..=3);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if !edges.contains(&(i, j)) && rng.gen_bool(0.3) {
                edges.push((i, j));
            }
        }
    }
    let len = n * p;
    Config {
        n,
        p,
        edges,
        x: uniform_vec(rng, len, -2.0, 2.0),
        v: uniform_vec(rng, len, -2.0, 2.0),
        pf: uniform_vec(rng, len, -2.0, 2.0),
        qf: uniform_vec(rng, len, -2.0, 2.0),
        r: uniform_vec(rng, len, -2.0, 2.0),
        vr: uniform_vec(rng, len, -2.0, 2.0),
    }
}

pub fn diag_kron(weights: &[f64], p: usize) -> Mat {
    let mut d = zeros(weights.len(), weights.len());
    for (i, w) in weights.iter().enumerate() {
        d[i][i] = *w;
    }
    kron(&d, &identity(p))
}

pub fn stacked_filter_lipschitz(
    c: &Config,
    g: &GainSetLipschitz,
    policy: SignumPolicy,
) -> Vec<f64> {
    let (n, p) = (c.n, c.p);
    let lk = kron(&laplacian_from_edges(n, &c.edges), &identity(p));
    let mk = kron(&centering(n), &identity(p));
    // L M = L, so the disagreement argument may be built from p~ + q~
    let pt = matvec(&mk, &c.pf);
    let qt = matvec(&mk, &c.qf);
    let arg: Vec<f64> = matvec(
        &lk,
        &pt.iter().zip(&qt).map(|(a, b)| a + b).collect::<Vec<_>>(),
    );
    let psi: Vec<f64> = (0..n)
        .map(|i| {
            c.r[i * p..(i + 1) * p].iter().map(|v| v.abs()).sum::<f64>()
                + c.vr[i * p..(i + 1) * p]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
                + g.gamma
        })
        .collect();
    let switched = matvec(
        &diag_kron(&psi, p),
        &arg.iter().map(|&y| policy.apply(y)).collect::<Vec<_>>(),
    );
    (0..n * p)
        .map(|k| {
            -g.kappa * (c.pf[k] - c.r[k]) - g.kappa * (c.qf[k] - c.vr[k]) - g.alpha * switched[k]
        })
        .collect()
}

pub fn stacked_control_lipschitz(
    c: &Config,
    zddot: &[f64],
    g: &GainSetLipschitz,
    policy: SignumPolicy,
) -> Vec<f64> {
    let (n, p) = (c.n, c.p);
    let phi: Vec<f64> = (0..n)
        .map(|i| {
            (i * p..(i + 1) * p)
                .map(|k| (c.x[k] - c.r[k]).abs() + (c.v[k] - c.vr[k]).abs())
                .sum::<f64>()
                + g.gamma
        })
        .collect();
    let s: Vec<f64> = (0..n * p)
        .map(|k| policy.apply((c.x[k] - c.pf[k]) + (c.v[k] - c.qf[k])))
        .collect();
    let switched = matvec(&diag_kron(&phi, p), &s);
    (0..n * p)
        .map(|k| {
            -g.eta * (c.x[k] - c.pf[k]) - g.eta * (c.v[k] - c.qf[k]) - g.eta * switched[k]
                + zddot[k]
        })
        .collect()
}

/// `zddot = -alpha (D ⊗ I) sgn((D^T ⊗ I)(p + q))` with `D` oriented from the
/// lower to the higher node.
pub fn stacked_filter_bounded(c: &Config, alpha: f64, policy: SignumPolicy) -> Vec<f64> {
    let (n, p) = (c.n, c.p);
    let mut d = zeros(n, c.edges.len());
    for (k, &(a, b)) in c.edges.iter().enumerate() {
        d[a.min(b)][k] = -1.0;
        d[a.max(b)][k] = 1.0;
    }
    let dk = kron(&d, &identity(p));
    let w: Vec<f64> = c.pf.iter().zip(&c.qf).map(|(a, b)| a + b).collect();
    let diffs = matvec(&transpose(&dk), &w);
    let s: Vec<f64> = diffs.iter().map(|&y| policy.apply(y)).collect();
    matvec(&dk, &s).iter().map(|v| -alpha * v).collect()
}

pub fn per_agent<F: Fn(usize) -> Vec<f64>>(n: usize, f: F) -> Vec<f64> {
    (0..n).flat_map(f).collect()
}

pub fn assert_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
    assert_eq!(a.len(), b.len());
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= tol, "{what}[{k}]: {x} vs {y}");
    }
}

/// Largest absolute difference between the per-agent laws and their stacked
/// forms over all four laws on configuration `c`.
pub fn max_mismatch(c: &Config, gains: &GainSetLipschitz, policy: SignumPolicy) -> f64 {
    let g = Graph::from_edges(c.n, &c.edges).unwrap();
    let p = c.p;
    let blk = |i: usize| i * p..(i + 1) * p;
    let diff = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };

    let zddot = per_agent(c.n, |i| {
        filter_accel_lipschitz(
            &g,
            i,
            &c.pf,
            &c.qf,
            &c.r[blk(i)],
            &c.vr[blk(i)],
            gains,
            policy,
        )
        .unwrap()
    });
    let u = per_agent(c.n, |i| {
        control_lipschitz(
            &c.x[blk(i)],
            &c.v[blk(i)],
            &c.pf[blk(i)],
            &c.qf[blk(i)],
            &c.r[blk(i)],
            &c.vr[blk(i)],
            &zddot[blk(i)],
            gains,
            policy,
        )
    });
    let zb = per_agent(c.n, |i| {
        filter_accel_bounded(&g, i, &c.pf, &c.qf, p, gains.alpha, policy).unwrap()
    });
    let ub = per_agent(c.n, |i| {
        control_bounded(
            &c.x[blk(i)],
            &c.v[blk(i)],
            &c.pf[blk(i)],
            &c.qf[blk(i)],
            &zb[blk(i)],
            gains.eta,
            policy,
        )
    });
    let ub_stacked: Vec<f64> = (0..c.n * p)
        .map(|k| -gains.eta * policy.apply((c.x[k] - c.pf[k]) + (c.v[k] - c.qf[k])) + zb[k])
        .collect();

    [
        diff(&zddot, &stacked_filter_lipschitz(c, gains, policy)),
        diff(&u, &stacked_control_lipschitz(c, &zddot, gains, policy)),
        diff(&zb, &stacked_filter_bounded(c, gains.alpha, policy)),
        diff(&ub, &ub_stacked),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}
