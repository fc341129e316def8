//! Stacked state of agents, filters and references.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::vector::{add, all_finite};
use crate::{Error, Result};

/// Positions/velocities of agents (`x`, `v`), filter auxiliaries (`z`,
/// `zdot`) and references (`r`, `vr`), each stacked agent-major with `n`
/// blocks of dimension `dim`.
///
/// Filter outputs `p = z + r` and `q = zdot + vr` are always derived, never
/// stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub n: usize,
    pub dim: usize,
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub z: Vec<f64>,
    pub zdot: Vec<f64>,
    pub r: Vec<f64>,
    pub vr: Vec<f64>,
}

/// Time derivative of a [`SystemState`], field by field.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub z: Vec<f64>,
    pub zdot: Vec<f64>,
    pub r: Vec<f64>,
    pub vr: Vec<f64>,
}

impl SystemState {
    pub fn zeros(n: usize, dim: usize) -> Self {
        let len = n * dim;
        Self {
            n,
            dim,
            t: 0.0,
            x: vec![0.0; len],
            v: vec![0.0; len],
            z: vec![0.0; len],
            zdot: vec![0.0; len],
            r: vec![0.0; len],
            vr: vec![0.0; len],
        }
    }

    fn fields(&self) -> [&Vec<f64>; 6] {
        [&self.x, &self.v, &self.z, &self.zdot, &self.r, &self.vr]
    }

    fn fields_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.x,
            &mut self.v,
            &mut self.z,
            &mut self.zdot,
            &mut self.r,
            &mut self.vr,
        ]
    }

    pub fn check_shape(&self) -> Result<()> {
        let expected = self.n * self.dim;
        for field in self.fields() {
            if field.len() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    found: field.len(),
                });
            }
        }
        Ok(())
    }

    /// Filter position outputs `p = z + r`.
    pub fn filter_p(&self) -> Vec<f64> {
        add(&self.z, &self.r)
    }

    /// Filter velocity outputs `q = zdot + vr`.
    pub fn filter_q(&self) -> Vec<f64> {
        add(&self.zdot, &self.vr)
    }

    /// `self + h * d`, with time left for the caller to set.
    pub fn advanced(&self, h: f64, d: &StateDerivative) -> Self {
        let mut out = self.clone();
        for (dst, src) in out.fields_mut().into_iter().zip(d.fields()) {
            for (a, b) in dst.iter_mut().zip(src) {
                *a += h * b;
            }
        }
        out
    }

    /// Index of the first agent carrying a non-finite value, if any.
    pub fn first_non_finite_agent(&self) -> Option<usize> {
        (0..self.n).find(|&i| {
            let range = i * self.dim..(i + 1) * self.dim;
            self.fields().iter().any(|f| !all_finite(&f[range.clone()]))
        })
    }

    /// Overwrites `r` and `vr` with independent uniform draws from
    /// `[lo, hi)`, all of `r` first, then all of `vr`.
    pub fn draw_references(&mut self, lo: f64, hi: f64, seed: u64) -> Result<()> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InitialCondition(alloc::format!(
                "reference box [{lo}, {hi}] must be finite with lo < hi"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for value in self.r.iter_mut().chain(self.vr.iter_mut()) {
            *value = rng.gen_range(lo..hi);
        }
        Ok(())
    }

    /// All fields flattened in the order `x, v, z, zdot, r, vr`.
    pub fn flatten(&self) -> Vec<f64> {
        self.fields()
            .iter()
            .flat_map(|f| f.iter().copied())
            .collect()
    }
}

impl StateDerivative {
    pub fn zeros(len: usize) -> Self {
        Self {
            x: vec![0.0; len],
            v: vec![0.0; len],
            z: vec![0.0; len],
            zdot: vec![0.0; len],
            r: vec![0.0; len],
            vr: vec![0.0; len],
        }
    }

    fn fields(&self) -> [&Vec<f64>; 6] {
        [&self.x, &self.v, &self.z, &self.zdot, &self.r, &self.vr]
    }

    /// Weighted sum `sum_k w_k d_k`, used by the Runge-Kutta combination.
    pub fn combine(terms: &[(f64, &StateDerivative)]) -> Self {
        let len = terms.first().map_or(0, |(_, d)| d.x.len());
        let mut out = Self::zeros(len);
        for (w, d) in terms {
            for (dst, src) in [
                (&mut out.x, &d.x),
                (&mut out.v, &d.v),
                (&mut out.z, &d.z),
                (&mut out.zdot, &d.zdot),
                (&mut out.r, &d.r),
                (&mut out.vr, &d.vr),
            ] {
                for (a, b) in dst.iter_mut().zip(src.iter()) {
                    *a += w * b;
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.fields().iter().all(|f| f.iter().all(|&x| x == 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_draws_are_seeded_and_in_range() {
        let mut a = SystemState::zeros(4, 2);
        let mut b = SystemState::zeros(4, 2);
        a.draw_references(-1.0, 1.0, 7).unwrap();
        b.draw_references(-1.0, 1.0, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.r.iter().chain(&a.vr).all(|v| (-1.0..1.0).contains(v)));
        assert_ne!(a.r, a.vr);
        b.draw_references(-1.0, 1.0, 8).unwrap();
        assert_ne!(a.r, b.r);
        assert!(a.draw_references(1.0, 1.0, 0).is_err());
    }
}
