//! Filter and controller laws for both protocol variants, the signum policy
//! and the gain validators.
//!
//! Per-agent quantities follow the filter construction
//! `p_i = z_i + r_i`, `q_i = zdot_i + v^r_i`; tracking errors are
//! `x~_i = x_i - p_i` and `v~_i = v_i - q_i`. Stacked buffers are agent-major
//! (see [`crate::vector`]).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::CONNECTIVITY_EPS;
use crate::linalg::DenseMatrix;
use crate::vector::norm1;
use crate::{Error, Graph, Result};

/// Default boundary-layer width for [`SignumPolicy::Smoothed`].
pub const DEFAULT_EPSILON: f64 = 1e-2;

/// How `sgn` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SignumPolicy {
    /// `-1`, `0` or `+1` per component; `sgn(0) = sgn(-0) = 0`.
    #[default]
    Exact,
    /// `y / (|y| + epsilon)` per component: odd, continuous, `|.| < 1`.
    Smoothed { epsilon: f64 },
}

impl SignumPolicy {
    pub fn smoothed() -> Self {
        SignumPolicy::Smoothed {
            epsilon: DEFAULT_EPSILON,
        }
    }

    #[inline]
    pub fn apply(&self, y: f64) -> f64 {
        match *self {
            SignumPolicy::Exact => {
                if y > 0.0 {
                    1.0
                } else if y < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            SignumPolicy::Smoothed { epsilon } => y / (y.abs() + epsilon),
        }
    }

    pub fn is_smoothed(&self) -> bool {
        matches!(self, SignumPolicy::Smoothed { .. })
    }
}

/// Component-wise signum.
pub fn signum(y: &[f64], policy: SignumPolicy) -> Vec<f64> {
    y.iter().map(|&c| policy.apply(c)).collect()
}

/// State-dependent filter gain `psi_i = |r_i|_1 + |v^r_i|_1 + gamma`.
pub fn psi_gain(r_i: &[f64], vr_i: &[f64], gamma: f64) -> f64 {
    norm1(r_i) + norm1(vr_i) + gamma
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSetLipschitz {
    pub kappa: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSetBounded {
    pub alpha: f64,
    pub eta: f64,
    /// The user has seen the (partial) gain bound advisory and accepts it.
    pub acknowledged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gains {
    Lipschitz(GainSetLipschitz),
    Bounded(GainSetBounded),
}

fn agent_block(stacked: &[f64], j: usize, p: usize, agent: usize) -> Result<&[f64]> {
    stacked
        .get(j * p..(j + 1) * p)
        .ok_or(Error::MissingNeighborState { agent, neighbor: j })
}

/// Filter acceleration of the Lipschitz variant:
///
/// `zddot_i = -kappa (p_i - r_i) - kappa (q_i - v^r_i)
///            - alpha psi_i sgn[ sum_j a_ij ((p_i + q_i) - (p_j + q_j)) ]`
///
/// The signum is applied to the whole neighbor sum. `p` and `q` are the
/// stacked filter outputs of all agents; their dimension is `r_i.len()`.
#[allow(clippy::too_many_arguments)]
pub fn filter_accel_lipschitz(
    graph: &Graph,
    i: usize,
    p: &[f64],
    q: &[f64],
    r_i: &[f64],
    vr_i: &[f64],
    gains: &GainSetLipschitz,
    policy: SignumPolicy,
) -> Result<Vec<f64>> {
    let dim = r_i.len();
    let p_i = agent_block(p, i, dim, i)?;
    let q_i = agent_block(q, i, dim, i)?;
    let mut y = vec![0.0; dim];
    for &j in graph.neighbors(i) {
        let p_j = agent_block(p, j, dim, i)?;
        let q_j = agent_block(q, j, dim, i)?;
        for c in 0..dim {
            y[c] += (p_i[c] + q_i[c]) - (p_j[c] + q_j[c]);
        }
    }
    let psi = psi_gain(r_i, vr_i, gains.gamma);
    Ok((0..dim)
        .map(|c| {
            -gains.kappa * (p_i[c] - r_i[c])
                - gains.kappa * (q_i[c] - vr_i[c])
                - gains.alpha * psi * policy.apply(y[c])
        })
        .collect())
}

/// Control input of the Lipschitz variant:
///
/// `u_i = -eta x~_i - eta v~_i
///        - eta (|x_i - r_i|_1 + |v_i - v^r_i|_1 + gamma) sgn(x~_i + v~_i) + zddot_i`
#[allow(clippy::too_many_arguments)]
pub fn control_lipschitz(
    x_i: &[f64],
    v_i: &[f64],
    p_i: &[f64],
    q_i: &[f64],
    r_i: &[f64],
    vr_i: &[f64],
    zddot_i: &[f64],
    gains: &GainSetLipschitz,
    policy: SignumPolicy,
) -> Vec<f64> {
    let eta = gains.eta;
    let mut dist = gains.gamma;
    for c in 0..x_i.len() {
        dist += (x_i[c] - r_i[c]).abs() + (v_i[c] - vr_i[c]).abs();
    }
    (0..x_i.len())
        .map(|c| {
            let xt = x_i[c] - p_i[c];
            let vt = v_i[c] - q_i[c];
            -eta * xt - eta * vt - eta * dist * policy.apply(xt + vt) + zddot_i[c]
        })
        .collect()
}

/// Filter acceleration of the bounded variant:
///
/// `zddot_i = -alpha sum_j a_ij sgn[(p_i + q_i) - (p_j + q_j)]`
///
/// Here the signum sits inside the neighbor sum, so contributions cancel
/// pairwise across each undirected edge.
pub fn filter_accel_bounded(
    graph: &Graph,
    i: usize,
    p: &[f64],
    q: &[f64],
    dim: usize,
    alpha: f64,
    policy: SignumPolicy,
) -> Result<Vec<f64>> {
    let p_i = agent_block(p, i, dim, i)?;
    let q_i = agent_block(q, i, dim, i)?;
    let mut acc = vec![0.0; dim];
    for &j in graph.neighbors(i) {
        let p_j = agent_block(p, j, dim, i)?;
        let q_j = agent_block(q, j, dim, i)?;
        for c in 0..dim {
            acc[c] += policy.apply((p_i[c] + q_i[c]) - (p_j[c] + q_j[c]));
        }
    }
    Ok(acc.into_iter().map(|s| -alpha * s).collect())
}

/// Control input of the bounded variant: `u_i = -eta sgn(x~_i + v~_i) + zddot_i`.
pub fn control_bounded(
    x_i: &[f64],
    v_i: &[f64],
    p_i: &[f64],
    q_i: &[f64],
    zddot_i: &[f64],
    eta: f64,
    policy: SignumPolicy,
) -> Vec<f64> {
    (0..x_i.len())
        .map(|c| {
            let s = (x_i[c] - p_i[c]) + (v_i[c] - q_i[c]);
            -eta * policy.apply(s) + zddot_i[c]
        })
        .collect()
}

/// One strict inequality `lhs > rhs` from a gain condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    /// The inequality as written, e.g. `alpha > max{rho1, rho2} + kappa`.
    pub statement: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl ConditionCheck {
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn passed(&self) -> bool {
        self.lhs > self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub conditions: Vec<ConditionCheck>,
}

impl GainReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(ConditionCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.conditions.iter().filter(|c| !c.passed())
    }
}

pub const KAPPA_CONDITION: &str = "kappa > 1";
pub const ALPHA_CONDITION: &str = "alpha > max{rho1, rho2} + kappa";
pub const ETA_CONDITION: &str = "eta > max{1, rho1, rho2}";
pub const GAMMA_CONDITION: &str = "gamma > 0";

/// Checks the Lipschitz-variant gain conditions. All inequalities are strict,
/// so boundary values fail.
pub fn validate_gains_lipschitz(gains: &GainSetLipschitz, rho1: f64, rho2: f64) -> GainReport {
    let rho = rho1.max(rho2);
    GainReport {
        conditions: vec![
            ConditionCheck {
                name: "kappa",
                statement: KAPPA_CONDITION,
                lhs: gains.kappa,
                rhs: 1.0,
            },
            ConditionCheck {
                name: "alpha",
                statement: ALPHA_CONDITION,
                lhs: gains.alpha,
                rhs: rho + gains.kappa,
            },
            ConditionCheck {
                name: "eta",
                statement: ETA_CONDITION,
                lhs: gains.eta,
                rhs: rho.max(1.0),
            },
            ConditionCheck {
                name: "gamma",
                statement: GAMMA_CONDITION,
                lhs: gains.gamma,
                rhs: 0.0,
            },
        ],
    }
}

/// What can be computed of the bounded-variant gain bounds.
///
/// The full lower bounds also contain `2 |s(0)|_1` (for alpha) and
/// `2 |s~(0)|_1 + |x~(0)|_1` (for eta), whose symbols have no available
/// definition. They are left out, so passing the partial bounds is necessary
/// information only, never a guarantee.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedGainAdvisory {
    pub alpha: f64,
    pub eta: f64,
    pub lambda2: f64,
    /// `|(D^T ⊗ I_p) x(0)|_1`.
    pub edge_disagreement: f64,
    /// `n * fbar`.
    pub n_fbar: f64,
    /// `2 * fbar`.
    pub two_fbar: f64,
    /// `(n fbar + |(D^T ⊗ I_p) x(0)|_1) / lambda_2`.
    pub alpha_partial_bound: f64,
    pub eta_partial_bound: f64,
}

pub const OMITTED_TERMS_NOTE: &str = "partial bounds only: the terms 2|s(0)|_1 (alpha) and \
     2|s~(0)|_1 + |x~(0)|_1 (eta) are omitted because s and s~ are undefined";

impl BoundedGainAdvisory {
    pub fn alpha_exceeds_partial(&self) -> bool {
        self.alpha > self.alpha_partial_bound
    }

    pub fn eta_exceeds_partial(&self) -> bool {
        self.eta > self.eta_partial_bound
    }

    pub fn describe(&self) -> String {
        format!(
            "alpha = {} vs partial bound (n*fbar + |(D^T x I)x(0)|_1)/lambda2 = ({} + {})/{} = {} [{}]\n\
             eta = {} vs partial bound 2*fbar = {} [{}]\n{}",
            self.alpha,
            self.n_fbar,
            self.edge_disagreement,
            self.lambda2,
            self.alpha_partial_bound,
            if self.alpha_exceeds_partial() { "above" } else { "NOT above" },
            self.eta,
            self.eta_partial_bound,
            if self.eta_exceeds_partial() { "above" } else { "NOT above" },
            OMITTED_TERMS_NOTE,
        )
    }
}

/// Computes the partial bounded-variant gain bounds. `x0` is the stacked
/// initial position of the `n` agents; `incidence` is the `n x m` matrix `D`.
pub fn validate_gains_bounded(
    alpha: f64,
    eta: f64,
    lambda2: f64,
    fbar: f64,
    n: usize,
    x0: &[f64],
    incidence: &DenseMatrix,
) -> Result<BoundedGainAdvisory> {
    if lambda2 <= CONNECTIVITY_EPS {
        return Err(Error::Disconnected { lambda2 });
    }
    if incidence.rows() != n {
        return Err(Error::AgentCountMismatch {
            expected: incidence.rows(),
            found: n,
        });
    }
    if n == 0 || !x0.len().is_multiple_of(n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    let p = x0.len() / n;
    let mut edge_disagreement = 0.0;
    for k in 0..incidence.cols() {
        for c in 0..p {
            let s: f64 = (0..n).map(|i| incidence[(i, k)] * x0[i * p + c]).sum();
            edge_disagreement += s.abs();
        }
    }
    let n_fbar = n as f64 * fbar;
    Ok(BoundedGainAdvisory {
        alpha,
        eta,
        lambda2,
        edge_disagreement,
        n_fbar,
        two_fbar: 2.0 * fbar,
        alpha_partial_bound: (n_fbar + edge_disagreement) / lambda2,
        eta_partial_bound: 2.0 * fbar,
    })
}
