//! The nonlinear term `f(x, v, t)` shared by every agent and every reference,
//! together with sampling validators for its declared Lipschitz constants
//! `(rho1, rho2)` and 1-norm bound `fbar`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::vector::norm1;
use crate::{Error, Result};

/// Relative slack allowed when comparing empirical constants to declared ones.
pub const CONFORMANCE_SLACK: f64 = 1e-6;
/// Minimum sample count for the empirical validators.
pub const MIN_SAMPLES: usize = 1000;
const DEGENERATE_DISTANCE: f64 = 1e-12;

/// Built-in families with analytically known constants. All act
/// component-wise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DynamicsKind {
    /// `f = 0`.
    Zero,
    /// `f = -a x - b v`.
    LinearDamped { a: f64, b: f64 },
    /// `f = -a sin(x) - b v`.
    Pendulum { a: f64, b: f64 },
    /// `f = c sin(x) + d cos(omega t)`. Bounded, but `f(0, 0, t) != 0`.
    BoundedWave { c: f64, d: f64, omega: f64 },
}

impl DynamicsKind {
    pub fn name(&self) -> &'static str {
        match self {
            DynamicsKind::Zero => "zero",
            DynamicsKind::LinearDamped { .. } => "linear_damped",
            DynamicsKind::Pendulum { .. } => "pendulum",
            DynamicsKind::BoundedWave { .. } => "bounded_wave",
        }
    }

    /// Lipschitz constants implied by the closed form, if the family has them
    /// and satisfies `f(0, 0, t) = 0`.
    pub fn analytic_lipschitz(&self) -> Option<(f64, f64)> {
        match *self {
            DynamicsKind::Zero => Some((0.0, 0.0)),
            DynamicsKind::LinearDamped { a, b } | DynamicsKind::Pendulum { a, b } => {
                Some((a.abs(), b.abs()))
            }
            DynamicsKind::BoundedWave { .. } => None,
        }
    }

    /// Supremum of `|f|_1` over all arguments, if finite.
    pub fn analytic_bound(&self, dim: usize) -> Option<f64> {
        match *self {
            DynamicsKind::Zero => Some(0.0),
            DynamicsKind::BoundedWave { c, d, .. } => Some(dim as f64 * (c.abs() + d.abs())),
            _ => None,
        }
    }
}

/// A dynamics family plus the constants the user declares for it.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsSpec {
    pub kind: DynamicsKind,
    pub dim: usize,
    /// Declared `(rho1, rho2)`.
    pub lipschitz: Option<(f64, f64)>,
    /// Declared `fbar`.
    pub bound: Option<f64>,
}

/// Sampling ranges for positions, velocities and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub x: (f64, f64),
    pub v: (f64, f64),
    pub t: (f64, f64),
}

impl SampleBox {
    /// Same range for positions and velocities.
    pub fn symmetric(half_width: f64, t_max: f64) -> Self {
        Self {
            x: (-half_width, half_width),
            v: (-half_width, half_width),
            t: (0.0, t_max),
        }
    }
}

impl Default for SampleBox {
    fn default() -> Self {
        Self::symmetric(5.0, 100.0)
    }
}

impl DynamicsSpec {
    /// Declares the family's own analytic constants.
    pub fn canonical(kind: DynamicsKind, dim: usize) -> Self {
        Self {
            kind,
            dim,
            lipschitz: kind.analytic_lipschitz(),
            bound: kind.analytic_bound(dim),
        }
    }

    pub fn eval(&self, x: &[f64], v: &[f64], t: f64) -> Result<Vec<f64>> {
        for len in [x.len(), v.len()] {
            if len != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: len,
                });
            }
        }
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, v, t, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into `out`; all slices must have length `dim`.
    pub fn eval_into(&self, x: &[f64], v: &[f64], t: f64, out: &mut [f64]) {
        match self.kind {
            DynamicsKind::Zero => out.fill(0.0),
            DynamicsKind::LinearDamped { a, b } => {
                for ((o, xi), vi) in out.iter_mut().zip(x).zip(v) {
                    *o = -a * xi - b * vi;
                }
            }
            DynamicsKind::Pendulum { a, b } => {
                for ((o, xi), vi) in out.iter_mut().zip(x).zip(v) {
                    *o = -a * libm::sin(*xi) - b * vi;
                }
            }
            DynamicsKind::BoundedWave { c, d, omega } => {
                let wave = d * libm::cos(omega * t);
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = c * libm::sin(*xi) + wave;
                }
            }
        }
    }

    /// Checks that at least one constant is declared and that, when Lipschitz
    /// constants are declared, `f(0, 0, t) = 0` at 100 times across `[0, t_max]`.
    pub fn check_declaration(&self, t_max: f64) -> Result<()> {
        if self.lipschitz.is_none() && self.bound.is_none() {
            return Err(Error::Undeclared("rho1/rho2 or fbar"));
        }
        if self.lipschitz.is_some() && !self.vanishes_at_origin(t_max) {
            return Err(Error::Undeclared(
                "f(0, 0, t) = 0 required by the Lipschitz condition",
            ));
        }
        Ok(())
    }

    pub fn vanishes_at_origin(&self, t_max: f64) -> bool {
        let zero = vec![0.0; self.dim];
        let mut out = vec![0.0; self.dim];
        (0..100).all(|k| {
            let t = t_max * k as f64 / 99.0;
            self.eval_into(&zero, &zero, t, &mut out);
            out.iter().all(|&y| y == 0.0)
        })
    }
}

/// Empirical Lipschitz constants from random difference quotients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate {
    pub rho1: f64,
    pub rho2: f64,
}

impl LipschitzEstimate {
    pub fn conforms(&self, rho1: f64, rho2: f64) -> bool {
        self.rho1 <= rho1 * (1.0 + CONFORMANCE_SLACK)
            && self.rho2 <= rho2 * (1.0 + CONFORMANCE_SLACK)
    }
}

fn draw(rng: &mut ChaCha8Rng, range: (f64, f64), out: &mut [f64]) {
    for o in out {
        *o = sample(rng, range);
    }
}

fn sample(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Largest observed `|f(x,v,t) - f(y,v,t)|_1 / |x - y|_1` (position varied) and
/// `|f(x,v,t) - f(x,z,t)|_1 / |v - z|_1` (velocity varied) over `samples`
/// random pairs drawn from `bounds`.
///
/// Pairs closer than `1e-12` in 1-norm are redrawn.
pub fn estimate_lipschitz(
    spec: &DynamicsSpec,
    bounds: &SampleBox,
    samples: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    if spec.lipschitz.is_none() {
        return Err(Error::Undeclared("rho1/rho2"));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_SAMPLES,
            got: samples,
        });
    }
    let p = spec.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut x, mut y, mut v, mut z) = (vec![0.0; p], vec![0.0; p], vec![0.0; p], vec![0.0; p]);
    let (mut fa, mut fb) = (vec![0.0; p], vec![0.0; p]);
    let mut est = LipschitzEstimate {
        rho1: 0.0,
        rho2: 0.0,
    };

    for _ in 0..samples {
        let t = sample(&mut rng, bounds.t);
        draw(&mut rng, bounds.x, &mut x);
        draw(&mut rng, bounds.v, &mut v);

        let dx = loop {
            draw(&mut rng, bounds.x, &mut y);
            let d: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
            if d >= DEGENERATE_DISTANCE {
                break d;
            }
        };
        spec.eval_into(&x, &v, t, &mut fa);
        spec.eval_into(&y, &v, t, &mut fb);
        let num: f64 = fa.iter().zip(&fb).map(|(a, b)| (a - b).abs()).sum();
        est.rho1 = est.rho1.max(num / dx);

        let dv = loop {
            draw(&mut rng, bounds.v, &mut z);
            let d: f64 = v.iter().zip(&z).map(|(a, b)| (a - b).abs()).sum();
            if d >= DEGENERATE_DISTANCE {
                break d;
            }
        };
        spec.eval_into(&x, &z, t, &mut fb);
        let num: f64 = fa.iter().zip(&fb).map(|(a, b)| (a - b).abs()).sum();
        est.rho2 = est.rho2.max(num / dv);
    }
    Ok(est)
}

/// Largest observed `|f(x, v, t)|_1` over `samples` random draws.
pub fn check_bounded(
    spec: &DynamicsSpec,
    bounds: &SampleBox,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if spec.bound.is_none() {
        return Err(Error::Undeclared("fbar"));
    }
    let p = spec.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut x, mut v, mut out) = (vec![0.0; p], vec![0.0; p], vec![0.0; p]);
    let mut max = 0.0f64;
    for _ in 0..samples {
        let t = sample(&mut rng, bounds.t);
        draw(&mut rng, bounds.x, &mut x);
        draw(&mut rng, bounds.v, &mut v);
        spec.eval_into(&x, &v, t, &mut out);
        max = max.max(norm1(&out));
    }
    Ok(max)
}

/// Whether an empirical bound respects the declared `fbar`.
pub fn bound_conforms(observed: f64, fbar: f64) -> bool {
    observed <= fbar * (1.0 + CONFORMANCE_SLACK)
}
