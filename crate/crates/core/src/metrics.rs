//! Diagnostics implied by the convergence analysis: tracking errors against
//! the reference average, Lyapunov values `V1` (filter disagreement) and `V2`
//! (agent-to-filter tracking), the sum residuals `S1`, `S2`, and an
//! exponential-decay fit.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::vector::{agent_mean, agent_sum, block, dot, norm2, project_disagreement, sub};
use crate::{Error, Gains, Graph, Result, SystemState};

/// Default trailing-median window (in samples) applied before thresholding.
pub const MEDIAN_WINDOW: usize = 50;
/// Samples with total error below this end a decay-fit window.
pub const DECAY_FLOOR: f64 = 1e-14;

/// Per-agent 2-norm errors `|x_i - mean(r)|` and `|v_i - mean(vr)|`.
pub fn tracking_errors(state: &SystemState) -> (Vec<f64>, Vec<f64>) {
    errors_against_average(&state.x, &state.v, state)
}

/// Per-agent 2-norm errors of the filter outputs against the reference
/// average.
pub fn filter_errors(state: &SystemState) -> (Vec<f64>, Vec<f64>) {
    errors_against_average(&state.filter_p(), &state.filter_q(), state)
}

fn errors_against_average(pos: &[f64], vel: &[f64], state: &SystemState) -> (Vec<f64>, Vec<f64>) {
    let p = state.dim;
    let r_bar = agent_mean(&state.r, p);
    let vr_bar = agent_mean(&state.vr, p);
    (0..state.n)
        .map(|i| {
            (
                norm2(&sub(block(pos, i, p), &r_bar)),
                norm2(&sub(block(vel, i, p), &vr_bar)),
            )
        })
        .unzip()
}

/// `V1 = 1/2 [p~; q~]^T (L ⊗ [[2 kappa, 1], [1, 1]] ⊗ I) [p~; q~]` with
/// `p~ = (M ⊗ I) p`, `q~ = (M ⊗ I) q`, `M = I - 11^T / n`.
///
/// Evaluated block-wise as
/// `1/2 (2 kappa p~^T L p~ + 2 p~^T L q~ + q~^T L q~)` using the sparse
/// Laplacian action.
pub fn lyapunov_v1(p: &[f64], q: &[f64], graph: &Graph, kappa: f64, dim: usize) -> f64 {
    let pt = project_disagreement(p, dim);
    let qt = project_disagreement(q, dim);
    let lp = graph.laplacian_apply(&pt, dim);
    let lq = graph.laplacian_apply(&qt, dim);
    0.5 * (2.0 * kappa * dot(&pt, &lp) + 2.0 * dot(&pt, &lq) + dot(&qt, &lq))
}

/// `V2 = 1/2 [x~; v~]^T [[2 eta I, I], [I, I]] [x~; v~]` with `x~ = x - p`,
/// `v~ = v - q`.
pub fn lyapunov_v2(x: &[f64], v: &[f64], p: &[f64], q: &[f64], eta: f64) -> f64 {
    let xt = sub(x, p);
    let vt = sub(v, q);
    0.5 * (2.0 * eta * dot(&xt, &xt) + 2.0 * dot(&xt, &vt) + dot(&vt, &vt))
}

/// `S1 = sum_i (p_i - r_i)`, `S2 = sum_i (q_i - vr_i)`.
pub fn sum_residuals(state: &SystemState) -> (Vec<f64>, Vec<f64>) {
    let p = state.filter_p();
    let q = state.filter_q();
    (
        agent_sum(&sub(&p, &state.r), state.dim),
        agent_sum(&sub(&q, &state.vr), state.dim),
    )
}

/// One recorded sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub t: f64,
    pub position_errors: Vec<f64>,
    pub velocity_errors: Vec<f64>,
    pub filter_position_errors: Vec<f64>,
    pub filter_velocity_errors: Vec<f64>,
    /// Only defined for the Lipschitz variant (needs `kappa`); NaN otherwise.
    pub v1: f64,
    pub v2: f64,
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub sum_z: Vec<f64>,
}

impl MetricsRecord {
    pub fn from_state(state: &SystemState, graph: &Graph, gains: &Gains) -> Self {
        let (position_errors, velocity_errors) = tracking_errors(state);
        let (filter_position_errors, filter_velocity_errors) = filter_errors(state);
        let p = state.filter_p();
        let q = state.filter_q();
        let (v1, eta) = match gains {
            Gains::Lipschitz(g) => (lyapunov_v1(&p, &q, graph, g.kappa, state.dim), g.eta),
            Gains::Bounded(g) => (f64::NAN, g.eta),
        };
        let (s1, s2) = sum_residuals(state);
        Self {
            t: state.t,
            position_errors,
            velocity_errors,
            filter_position_errors,
            filter_velocity_errors,
            v1,
            v2: lyapunov_v2(&state.x, &state.v, &p, &q, eta),
            s1,
            s2,
            sum_z: agent_sum(&state.z, state.dim),
        }
    }

    /// `max_i (e_x,i + e_v,i)`.
    pub fn max_agent_error(&self) -> f64 {
        self.position_errors
            .iter()
            .zip(&self.velocity_errors)
            .map(|(a, b)| a + b)
            .fold(0.0, f64::max)
    }

    /// `sum_i (e_x,i + e_v,i)`.
    pub fn total_error(&self) -> f64 {
        self.position_errors.iter().sum::<f64>() + self.velocity_errors.iter().sum::<f64>()
    }
}

/// Recorded run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub n: usize,
    pub dim: usize,
    /// Strictly increasing in `t`.
    pub records: Vec<MetricsRecord>,
    /// Full states at each record, when requested.
    pub states: Vec<SystemState>,
    pub final_state: SystemState,
    pub steps_taken: u64,
    /// Set when the run stopped on a non-finite state.
    pub abort: Option<Error>,
}

impl TrajectoryLog {
    pub fn new(n: usize, dim: usize) -> Self {
        Self {
            n,
            dim,
            records: Vec::new(),
            states: Vec::new(),
            final_state: SystemState::zeros(n, dim),
            steps_taken: 0,
            abort: None,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.abort.is_none()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn max_agent_errors(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(MetricsRecord::max_agent_error)
            .collect()
    }

    /// Trailing-median-filtered max-agent error at the last record.
    pub fn terminal_error(&self, window: usize) -> Option<f64> {
        trailing_median(&self.max_agent_errors(), window)
            .last()
            .copied()
    }
}

/// Median of the last `window` samples (fewer at the start) for every index.
pub fn trailing_median(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut buf = Vec::with_capacity(window);
    (0..values.len())
        .map(|k| {
            buf.clear();
            buf.extend_from_slice(&values[(k + 1).saturating_sub(window)..=k]);
            buf.sort_by(f64::total_cmp);
            let m = buf.len();
            if m % 2 == 1 {
                buf[m / 2]
            } else {
                0.5 * (buf[m / 2 - 1] + buf[m / 2])
            }
        })
        .collect()
}

/// Increase counts for a monitored Lyapunov series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonotonicityStats {
    /// Consecutive pairs where `V_k - V_{k-1} > rel_tol * (1 + V_{k-1})`.
    pub increases: usize,
    /// Consecutive pairs considered.
    pub pairs: usize,
}

impl MonotonicityStats {
    pub fn fraction(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.increases as f64 / self.pairs as f64
        }
    }
}

/// Counts increases in `values` over consecutive pairs whose earlier sample
/// is at or after `after`.
pub fn monotonicity(times: &[f64], values: &[f64], after: f64, rel_tol: f64) -> MonotonicityStats {
    let mut stats = MonotonicityStats {
        increases: 0,
        pairs: 0,
    };
    for k in 1..values.len().min(times.len()) {
        if times[k - 1] < after {
            continue;
        }
        stats.pairs += 1;
        if values[k] - values[k - 1] > rel_tol * (1.0 + values[k - 1]) {
            stats.increases += 1;
        }
    }
    stats
}

/// Least-squares line through `ln(total error)` over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub t0: f64,
    /// End of the window actually used (may be truncated at the error floor).
    pub t1: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
    pub samples: usize,
}

/// Fits `ln(sum_i (e_x,i + e_v,i))` against `t` on `[t0, t1]`.
///
/// The window is cut at the first sample whose error falls below `1e-14`.
pub fn decay_fit(records: &[MetricsRecord], t0: f64, t1: f64) -> Result<DecayFit> {
    let (first, last) = match (records.first(), records.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::InvalidWindow(String::from("empty log"))),
    };
    let slack = 1e-9 * (1.0 + last.abs());
    if t0.partial_cmp(&t1) != Some(core::cmp::Ordering::Less)
        || t0 < first - slack
        || t1 > last + slack
    {
        return Err(Error::InvalidWindow(format!(
            "[{t0}, {t1}] is not inside the log range [{first}, {last}]"
        )));
    }
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.t >= t0 - slack && r.t <= t1 + slack)
        .map(|r| (r.t, r.total_error()))
        .take_while(|&(_, e)| e >= DECAY_FLOOR)
        .map(|(t, e)| (t, libm::log(e)))
        .collect();
    if points.len() < 2 {
        return Err(Error::InvalidWindow(format!(
            "need at least two samples above {DECAY_FLOOR:e} in [{t0}, {t1}]"
        )));
    }
    let (slope, intercept, r_squared) = least_squares(&points);
    Ok(DecayFit {
        t0: points[0].0,
        t1: points[points.len() - 1].0,
        slope,
        intercept,
        r_squared,
        samples: points.len(),
    })
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in points {
        stt += (t - mean_t) * (t - mean_t);
        sty += (t - mean_t) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let intercept = mean_y - slope * mean_t;
    let r_squared = if syy > 0.0 {
        (sty * sty) / (stt * syy)
    } else {
        1.0
    };
    (slope, intercept, r_squared)
}
