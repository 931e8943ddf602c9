use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::observables::{feed_response, sinr_from_response, user_rate, Links};
use super::types::{BeamformingState, Scenario};
use crate::error::{ConstraintFamily, Result};
use crate::linalg::{quad_form, CMat};
use crate::rhs::RhsConfig;

/// Relative tolerance on gains and ratios, absolute on rates (bps/Hz).
pub const GAIN_TOL: f64 = 1e-6;
/// Relative tolerance on the power budget.
pub const POWER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub index: usize,
    /// Relative excess (absolute for rates).
    pub amount: f64,
}

/// Every observable of the joint problem at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub sinr: Vec<f64>,
    pub rates: Vec<f64>,
    pub min_rate: f64,
    pub sensing_gains: Vec<f64>,
    pub clutter_gains: Vec<f64>,
    pub power: f64,
    /// Every constraint with a positive excess, whether or not it is within tolerance.
    pub violations: Vec<Violation>,
}

impl Evaluation {
    pub fn max_violation(&self) -> f64 {
        self.violations.iter().map(|v| v.amount).fold(0.0, f64::max)
    }

    /// Violations beyond the family tolerances.
    pub fn failures(&self) -> Vec<&Violation> {
        self.violations
            .iter()
            .filter(|v| {
                let tol = match v.family {
                    ConstraintFamily::TransmitPower => POWER_TOL,
                    _ => GAIN_TOL,
                };
                v.amount > tol
            })
            .collect()
    }

    pub fn satisfied(&self) -> bool {
        self.failures().is_empty()
    }
}

fn relative_excess(value: f64, limit: f64) -> f64 {
    if limit > 0.0 {
        (value - limit) / limit
    } else {
        value - limit
    }
}

/// Evaluates a state under beamformer `b` (the surface response to `state.pattern`).
pub fn evaluate(scenario: &Scenario, cfg: &RhsConfig, links: &Links, b: &CMat, state: &BeamformingState) -> Result<Evaluation> {
    let v = state.precoder();
    let q = &v * v.adjoint();
    let th = &scenario.thresholds;
    let mut sinr = Vec::with_capacity(links.users.len());
    for (l, h) in links.users.iter().enumerate() {
        sinr.push(sinr_from_response(&feed_response(b, h), &v, l, scenario.noise_var)?);
    }
    let rates: Vec<f64> = sinr.iter().map(|&s| user_rate(s)).collect();
    let min_rate = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let gain = |a| quad_form(&q, &feed_response(b, a)).max(0.0);
    let sensing_gains: Vec<f64> = links.sensing.iter().map(gain).collect();
    let clutter_gains: Vec<f64> = links.clutter.iter().map(gain).collect();
    let power = state.power();

    let mut violations = Vec::new();
    let mut push = |family, index, amount: f64| {
        if amount > 0.0 {
            violations.push(Violation { family, index, amount });
        }
    };
    for (w, (&p, &limit)) in clutter_gains.iter().zip(&th.g_th_w).enumerate() {
        push(ConstraintFamily::ClutterLeakage, w, relative_excess(p, limit));
    }
    let p1 = sensing_gains[0];
    for d in 1..sensing_gains.len() {
        let lo = th.gamma_l_d[d - 1] * p1;
        let hi = th.gamma_u_d[d - 1] * p1;
        push(ConstraintFamily::SensingBalance, d, relative_excess(lo, sensing_gains[d]));
        push(ConstraintFamily::SensingBalance, d, relative_excess(sensing_gains[d], hi));
    }
    for (d, (&p, &limit)) in sensing_gains.iter().zip(&th.g_th_d).enumerate() {
        push(ConstraintFamily::SensingGain, d, relative_excess(limit, p));
    }
    for (l, (&r, &limit)) in rates.iter().zip(&th.r_th_l).enumerate() {
        push(ConstraintFamily::UserRate, l, limit - r);
    }
    push(ConstraintFamily::TransmitPower, 0, relative_excess(power, scenario.p_max));
    let tol = 1e-12;
    for (n, &t) in state.pattern.0.iter().enumerate() {
        push(ConstraintFamily::PatternRange, n, relative_excess(cfg.theta_min, t) - tol);
        push(ConstraintFamily::PatternRange, n, relative_excess(t, cfg.theta_max) - tol);
    }

    Ok(Evaluation {
        sinr,
        rates,
        min_rate,
        sensing_gains,
        clutter_gains,
        power,
        violations,
    })
}
