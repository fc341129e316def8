//! Plain-text run summaries and validator reports.

use std::fmt::Write;
use std::time::Duration;

use dat_core::metrics::{decay_fit, MEDIAN_WINDOW};
use dat_core::protocol::OMITTED_TERMS_NOTE;
use dat_core::{Error, Gains, Scheme, SignumPolicy, TrajectoryLog};

use crate::config::ScenarioConfig;

/// Validator output: graph connectivity, declared dynamics constants against
/// their sampled estimates, and every gain condition with its margin.
pub fn validation_report(cfg: &ScenarioConfig) -> String {
    let p = &cfg.problem;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "graph: {} nodes, {} edges, lambda2 = {}",
        p.graph.node_count(),
        p.graph.edge_count(),
        cfg.report.lambda2
    );
    let _ = writeln!(
        s,
        "dynamics: {} (dim {})",
        p.dynamics.kind.name(),
        p.dynamics.dim
    );
    if let Some(((rho1, rho2), est)) = &cfg.declaration.lipschitz {
        let _ = writeln!(
            s,
            "  declared rho1 = {rho1}, rho2 = {rho2}; sampled estimate rho1 = {}, rho2 = {}",
            est.rho1, est.rho2
        );
    }
    if let Some((fbar, observed)) = cfg.declaration.bound {
        let _ = writeln!(s, "  declared fbar = {fbar}; sampled maximum = {observed}");
    }
    match &p.gains {
        Gains::Lipschitz(g) => {
            let _ = writeln!(
                s,
                "gains (lipschitz): kappa = {}, alpha = {}, gamma = {}, eta = {}",
                g.kappa, g.alpha, g.gamma, g.eta
            );
            if let Some(report) = &cfg.report.gain_report {
                for c in &report.conditions {
                    let _ = writeln!(
                        s,
                        "  {} {}: {} vs {} (margin {})",
                        if c.passed() { "PASS" } else { "FAIL" },
                        c.statement,
                        c.lhs,
                        c.rhs,
                        c.margin()
                    );
                }
            }
        }
        Gains::Bounded(g) => {
            let _ = writeln!(
                s,
                "gains (bounded): alpha = {}, eta = {}, acknowledged = {}",
                g.alpha, g.eta, g.acknowledged
            );
            match &cfg.report.bounded_advisory {
                Some(adv) => {
                    for line in adv.describe().lines() {
                        let _ = writeln!(s, "  {line}");
                    }
                }
                None => {
                    let _ = writeln!(s, "  {OMITTED_TERMS_NOTE}");
                }
            }
        }
    }
    s
}

fn describe_signum(policy: SignumPolicy) -> String {
    match policy {
        SignumPolicy::Exact => String::from("exact"),
        SignumPolicy::Smoothed { epsilon } => format!("smoothed (epsilon = {epsilon})"),
    }
}

/// Full run summary. The abort line names the offending agent 1-based.
pub fn run_summary(
    name: &str,
    cfg: &ScenarioConfig,
    log: &TrajectoryLog,
    wall: Duration,
) -> String {
    let p = &cfg.problem;
    let cfg_int = &p.integrator;
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {name}");
    let _ = writeln!(s, "variant: {}", p.variant().name());
    let _ = writeln!(
        s,
        "integrator: {}, dt = {}, duration = {}, signum = {}",
        match cfg_int.scheme {
            Scheme::Euler => "euler",
            Scheme::Rk4 => "rk4",
        },
        cfg_int.dt,
        cfg_int.duration,
        describe_signum(cfg_int.signum)
    );
    match cfg.seed {
        Some(seed) => {
            let _ = writeln!(s, "seed: {seed}");
        }
        None => {
            let _ = writeln!(s, "seed: none (no random draws)");
        }
    }
    let total = cfg_int.steps().unwrap_or(0);
    match &log.abort {
        None => {
            let _ = writeln!(s, "status: complete");
        }
        Some(Error::NonFinite { agent, t }) => {
            let _ = writeln!(
                s,
                "status: ABORTED, non-finite state for agent {} at t = {t}; trajectory is partial",
                agent + 1
            );
        }
        Some(e) => {
            let _ = writeln!(s, "status: ABORTED, {e}; trajectory is partial");
        }
    }
    let _ = writeln!(s, "steps: {} of {total}", log.steps_taken);
    let _ = writeln!(s, "records: {}", log.records.len());
    let _ = writeln!(s, "wall_time_s: {:.3}", wall.as_secs_f64());

    let _ = writeln!(s, "\n[validation]");
    s.push_str(&validation_report(cfg));

    let _ = writeln!(s, "\n[terminal]");
    if let Some(last) = log.records.last() {
        let _ = writeln!(s, "t: {}", last.t);
        if let Some(median) = log.terminal_error(MEDIAN_WINDOW) {
            let _ = writeln!(
                s,
                "max_agent_error (median of last {MEDIAN_WINDOW} samples): {median:e}"
            );
        }
        let _ = writeln!(
            s,
            "max_agent_error (last sample): {:e}",
            last.max_agent_error()
        );
        let _ = writeln!(s, "V1: {:e}", last.v1);
        let _ = writeln!(s, "V2: {:e}", last.v2);
        let l1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
        let _ = writeln!(s, "|S1|_1: {:e}", l1(&last.s1));
        let _ = writeln!(s, "|S2|_1: {:e}", l1(&last.s2));
        let _ = writeln!(s, "|sum z|_1: {:e}", l1(&last.sum_z));
    }

    let (t0, t1) = (0.25 * cfg_int.duration, 0.75 * cfg_int.duration);
    let _ = writeln!(s, "\n[decay fit on [{t0}, {t1}]]");
    match decay_fit(&log.records, t0, t1) {
        Ok(fit) => {
            let _ = writeln!(s, "slope: {}", fit.slope);
            let _ = writeln!(s, "intercept: {}", fit.intercept);
            let _ = writeln!(s, "r_squared: {}", fit.r_squared);
            let _ = writeln!(s, "samples: {}", fit.samples);
        }
        Err(e) => {
            let _ = writeln!(s, "unavailable: {e}");
        }
    }
    s
}
