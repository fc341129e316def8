//! Small helpers over `&[f64]` vectors and agent-major stacked buffers.
//!
//! A stacked buffer holds `n` agents of dimension `p` contiguously:
//! agent `i` occupies `[i * p, (i + 1) * p)`.

use alloc::vec::Vec;

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `a - b` component-wise.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + b` component-wise.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Slice for agent `i` in a stacked buffer of dimension `p`.
pub fn block(stacked: &[f64], i: usize, p: usize) -> &[f64] {
    &stacked[i * p..(i + 1) * p]
}

pub fn block_mut(stacked: &mut [f64], i: usize, p: usize) -> &mut [f64] {
    &mut stacked[i * p..(i + 1) * p]
}

/// Component-wise mean over the `n = len / p` agents of a stacked buffer.
pub fn agent_mean(stacked: &[f64], p: usize) -> Vec<f64> {
    let n = stacked.len() / p;
    let mut mean = agent_sum(stacked, p);
    for m in &mut mean {
        *m /= n as f64;
    }
    mean
}

/// Component-wise sum over agents of a stacked buffer.
pub fn agent_sum(stacked: &[f64], p: usize) -> Vec<f64> {
    let mut sum = alloc::vec![0.0; p];
    for chunk in stacked.chunks_exact(p) {
        for (s, x) in sum.iter_mut().zip(chunk) {
            *s += x;
        }
    }
    sum
}

/// Applies the consensus-orthogonal projection `(I - 11^T/n) ⊗ I_p`.
pub fn project_disagreement(stacked: &[f64], p: usize) -> Vec<f64> {
    let mean = agent_mean(stacked, p);
    stacked
        .chunks_exact(p)
        .flat_map(|chunk| chunk.iter().zip(&mean).map(|(x, m)| x - m))
        .collect()
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_annihilates_consensus() {
        let stacked = [1.5, -2.0, 1.5, -2.0, 1.5, -2.0];
        assert!(project_disagreement(&stacked, 2).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn projected_sum_is_zero() {
        let stacked = [1.0, 4.0, -3.0, 0.5, 2.0, 7.0];
        let proj = project_disagreement(&stacked, 2);
        for s in agent_sum(&proj, 2) {
            assert!(s.abs() < 1e-14);
        }
    }
}
