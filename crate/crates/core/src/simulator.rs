//! Fixed-step propagation of the coupled agent/filter/reference system.
//!
//! Every coupling term in a derivative evaluation reads one frozen input
//! state. Time is always `step * dt`, never an accumulated sum.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::DynamicsSpec;
use crate::graph::CONNECTIVITY_EPS;
use crate::metrics::{MetricsRecord, TrajectoryLog};
use crate::protocol::{
    control_bounded, control_lipschitz, filter_accel_bounded, filter_accel_lipschitz,
    validate_gains_bounded, validate_gains_lipschitz, BoundedGainAdvisory, GainReport,
};
use crate::vector::{agent_sum, block, block_mut, norm1};
use crate::{Error, Gains, Graph, Result, SignumPolicy, StateDerivative, SystemState};

/// Tolerance on `|sum_i z_i(0)|_1` and `|sum_i zdot_i(0)|_1` for the bounded
/// variant's zero-sum filter initialization.
pub const ZERO_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Lipschitz,
    Bounded,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Lipschitz => "lipschitz",
            Variant::Bounded => "bounded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Euler,
    /// Classical fourth-order Runge-Kutta; only meaningful with a smoothed
    /// signum.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub duration: f64,
    pub signum: SignumPolicy,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Euler,
            dt: 1e-3,
            duration: 10.0,
            signum: SignumPolicy::Exact,
        }
    }
}

impl IntegratorConfig {
    /// Number of steps covering `duration`; errors unless `duration` is a
    /// whole number of steps.
    pub fn steps(&self) -> Result<u64> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidIntegrator(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidIntegrator(format!(
                "duration must be non-negative, got {}",
                self.duration
            )));
        }
        if self.duration > 0.0 && self.duration < self.dt {
            return Err(Error::InvalidIntegrator(format!(
                "duration {} is shorter than one step dt = {}",
                self.duration, self.dt
            )));
        }
        let steps = libm::round(self.duration / self.dt);
        if libm::fabs(steps * self.dt - self.duration) > 1e-9 * self.duration.max(self.dt) {
            return Err(Error::InvalidIntegrator(format!(
                "duration {} is not a whole number of steps of dt = {}",
                self.duration, self.dt
            )));
        }
        Ok(steps as u64)
    }

    pub fn check(&self) -> Result<()> {
        self.steps()?;
        if let SignumPolicy::Smoothed { epsilon } = self.signum {
            if !(epsilon > 0.0 && epsilon.is_finite()) {
                return Err(Error::InvalidIntegrator(format!(
                    "smoothed signum needs epsilon > 0, got {epsilon}"
                )));
            }
        }
        if self.scheme == Scheme::Rk4 && !self.signum.is_smoothed() {
            return Err(Error::InvalidIntegrator(String::from(
                "rk4 requires the smoothed signum; stages straddling the switching surface are meaningless",
            )));
        }
        Ok(())
    }

    pub fn time_at(&self, step: u64) -> f64 {
        step as f64 * self.dt
    }
}

/// Everything needed to integrate one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub graph: Graph,
    pub dynamics: DynamicsSpec,
    pub gains: Gains,
    pub integrator: IntegratorConfig,
    pub initial: SystemState,
    /// Metrics are recorded every this many steps (and at the final step).
    pub record_every: u64,
    /// Keep a copy of the full state at each recorded step.
    pub keep_states: bool,
}

/// Outcome of the pre-integration checks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub lambda2: f64,
    pub gain_report: Option<GainReport>,
    pub bounded_advisory: Option<BoundedGainAdvisory>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Problem {
    pub fn variant(&self) -> Variant {
        match self.gains {
            Gains::Lipschitz(_) => Variant::Lipschitz,
            Gains::Bounded(_) => Variant::Bounded,
        }
    }

    /// Runs every validator and collects all violations rather than stopping
    /// at the first.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let v = &mut report.violations;

        if let Err(e) = self.integrator.check() {
            v.push(format!("{e}"));
        }
        if self.record_every == 0 {
            v.push(String::from("record_every must be at least 1"));
        }
        let n = self.graph.node_count();
        if self.initial.n != n {
            v.push(format!(
                "{}",
                Error::AgentCountMismatch {
                    expected: n,
                    found: self.initial.n
                }
            ));
        }
        if let Err(e) = self.initial.check_shape() {
            v.push(format!("initial state: {e}"));
        }
        if self.initial.dim != self.dynamics.dim {
            v.push(format!(
                "state dimension {} does not match dynamics dimension {}",
                self.initial.dim, self.dynamics.dim
            ));
        }
        if self.initial.first_non_finite_agent().is_some() {
            v.push(String::from("initial state contains non-finite values"));
        }
        if !self.graph.is_connected() {
            v.push(String::from(
                "graph is not connected (connectivity is required)",
            ));
        }
        report.lambda2 = self.graph.algebraic_connectivity();

        match self.gains {
            Gains::Lipschitz(gains) => match self.dynamics.lipschitz {
                None => v.push(String::from(
                    "lipschitz variant requires declared rho1 and rho2 for the dynamics",
                )),
                Some((rho1, rho2)) => {
                    if !self
                        .dynamics
                        .vanishes_at_origin(self.integrator.duration.max(1.0))
                    {
                        v.push(String::from(
                            "lipschitz variant requires f(0, 0, t) = 0 for the declared dynamics",
                        ));
                    }
                    let gain_report = validate_gains_lipschitz(&gains, rho1, rho2);
                    for c in gain_report.failures() {
                        v.push(format!(
                            "gain condition violated: {} (have {} vs bound {}, margin {})",
                            c.statement,
                            c.lhs,
                            c.rhs,
                            c.margin()
                        ));
                    }
                    report.gain_report = Some(gain_report);
                }
            },
            Gains::Bounded(gains) => {
                if !(gains.alpha > 0.0 && gains.eta > 0.0) {
                    v.push(format!(
                        "bounded variant requires alpha > 0 and eta > 0 (alpha = {}, eta = {})",
                        gains.alpha, gains.eta
                    ));
                }
                let sz = norm1(&agent_sum(&self.initial.z, self.initial.dim.max(1)));
                let szd = norm1(&agent_sum(&self.initial.zdot, self.initial.dim.max(1)));
                if sz > ZERO_SUM_TOLERANCE || szd > ZERO_SUM_TOLERANCE {
                    v.push(format!(
                        "filter initialization must satisfy sum_i z_i(0) = 0 and sum_i zdot_i(0) = 0 \
                         (have |sum z|_1 = {sz:e}, |sum zdot|_1 = {szd:e})"
                    ));
                }
                match self.dynamics.bound {
                    None => v.push(String::from(
                        "bounded variant requires a declared fbar for the dynamics",
                    )),
                    Some(fbar) => {
                        if report.lambda2 > CONNECTIVITY_EPS
                            && self.initial.x.len() == n * self.initial.dim
                        {
                            match validate_gains_bounded(
                                gains.alpha,
                                gains.eta,
                                report.lambda2,
                                fbar,
                                n,
                                &self.initial.x,
                                &self.graph.incidence(),
                            ) {
                                Ok(adv) => report.bounded_advisory = Some(adv),
                                Err(e) => v.push(format!("{e}")),
                            }
                        }
                    }
                }
                if !gains.acknowledged {
                    v.push(String::from(
                        "bounded variant gain bounds are advisory only; set acknowledged = true to proceed",
                    ));
                }
            }
        }
        report
    }
}

/// Right-hand side of the closed loop at `state`, evaluated at time `t`.
///
/// `xdot = v`, `vdot = f(x, v, t) + u`, `zdot' = zddot`, `rdot = vr`,
/// `vrdot = f(r, vr, t)`.
pub fn derivative(
    state: &SystemState,
    t: f64,
    graph: &Graph,
    dynamics: &DynamicsSpec,
    gains: &Gains,
    policy: SignumPolicy,
) -> Result<StateDerivative> {
    let n = graph.node_count();
    let dim = state.dim;
    if state.n != n {
        return Err(Error::AgentCountMismatch {
            expected: n,
            found: state.n,
        });
    }
    if dynamics.dim != dim {
        return Err(Error::DimensionMismatch {
            expected: dynamics.dim,
            found: dim,
        });
    }
    state.check_shape()?;

    let p = state.filter_p();
    let q = state.filter_q();
    let mut d = StateDerivative::zeros(n * dim);
    d.x.copy_from_slice(&state.v);
    d.z.copy_from_slice(&state.zdot);
    d.r.copy_from_slice(&state.vr);
    let mut f_agent = vec![0.0; dim];

    for i in 0..n {
        let x_i = block(&state.x, i, dim);
        let v_i = block(&state.v, i, dim);
        let r_i = block(&state.r, i, dim);
        let vr_i = block(&state.vr, i, dim);
        let p_i = block(&p, i, dim);
        let q_i = block(&q, i, dim);

        let (zddot, u) = match gains {
            Gains::Lipschitz(g) => {
                let zddot = filter_accel_lipschitz(graph, i, &p, &q, r_i, vr_i, g, policy)?;
                let u = control_lipschitz(x_i, v_i, p_i, q_i, r_i, vr_i, &zddot, g, policy);
                (zddot, u)
            }
            Gains::Bounded(g) => {
                let zddot = filter_accel_bounded(graph, i, &p, &q, dim, g.alpha, policy)?;
                let u = control_bounded(x_i, v_i, p_i, q_i, &zddot, g.eta, policy);
                (zddot, u)
            }
        };

        dynamics.eval_into(x_i, v_i, t, &mut f_agent);
        for (dst, (f, u)) in block_mut(&mut d.v, i, dim)
            .iter_mut()
            .zip(f_agent.iter().zip(&u))
        {
            *dst = f + u;
        }
        block_mut(&mut d.zdot, i, dim).copy_from_slice(&zddot);
        dynamics.eval_into(r_i, vr_i, t, block_mut(&mut d.vr, i, dim));
    }
    Ok(d)
}

/// Advances `state` (taken to be at step `step`) by one step.
///
/// Fails with [`Error::NonFinite`] naming the first offending agent if the
/// new state overflows or becomes NaN.
pub fn step(state: &SystemState, step: u64, problem: &Problem) -> Result<SystemState> {
    let cfg = &problem.integrator;
    let dt = cfg.dt;
    let t = cfg.time_at(step);
    let rhs = |s: &SystemState, t: f64| {
        derivative(
            s,
            t,
            &problem.graph,
            &problem.dynamics,
            &problem.gains,
            cfg.signum,
        )
    };

    let mut next = match cfg.scheme {
        Scheme::Euler => state.advanced(dt, &rhs(state, t)?),
        Scheme::Rk4 => {
            let t_half = (step as f64 + 0.5) * dt;
            let t_next = cfg.time_at(step + 1);
            let k1 = rhs(state, t)?;
            let k2 = rhs(&state.advanced(0.5 * dt, &k1), t_half)?;
            let k3 = rhs(&state.advanced(0.5 * dt, &k2), t_half)?;
            let k4 = rhs(&state.advanced(dt, &k3), t_next)?;
            let sum = StateDerivative::combine(&[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)]);
            state.advanced(dt / 6.0, &sum)
        }
    };
    next.t = cfg.time_at(step + 1);
    if let Some(agent) = next.first_non_finite_agent() {
        return Err(Error::NonFinite { agent, t: next.t });
    }
    Ok(next)
}

/// Validates `problem`, then integrates from `t = 0` to the configured
/// duration.
///
/// Validation failures abort before integration with [`Error::Validation`].
/// A non-finite state stops the run early; the returned log is then
/// flagged through [`TrajectoryLog::abort`] and holds every record taken
/// before the failure.
pub fn run(problem: &Problem) -> Result<TrajectoryLog> {
    let report = problem.validate();
    if !report.is_valid() {
        return Err(Error::Validation(report.violations));
    }
    Ok(integrate(problem))
}

/// Integration loop without validation; callers must have validated.
pub fn integrate(problem: &Problem) -> TrajectoryLog {
    let steps = problem.integrator.steps().unwrap_or(0);
    let record_every = problem.record_every.max(1);
    let mut state = problem.initial.clone();
    state.t = 0.0;
    let mut log = TrajectoryLog::new(problem.initial.n, problem.initial.dim);

    let record = |log: &mut TrajectoryLog, s: &SystemState| {
        log.records
            .push(MetricsRecord::from_state(s, &problem.graph, &problem.gains));
        if problem.keep_states {
            log.states.push(s.clone());
        }
    };

    record(&mut log, &state);
    for k in 0..steps {
        match step(&state, k, problem) {
            Ok(next) => state = next,
            Err(e) => {
                log.abort = Some(e);
                break;
            }
        }
        log.steps_taken = k + 1;
        if (k + 1) % record_every == 0 || k + 1 == steps {
            record(&mut log, &state);
        }
    }
    log.final_state = state;
    log
}
