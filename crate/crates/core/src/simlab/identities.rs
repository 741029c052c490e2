//! Exact one-round expectations by enumeration of the arm draw.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::learners::WsuUx;
use crate::params::HyperParams;
use crate::seed::Seed;
use crate::simplex::{mix_uniform, ProbVector};

/// `E[pi_{t+1}]` for one WSU-UX round from `pi`, enumerating `I_t ~ pi_tilde`.
pub fn expected_next_distribution(params: &HyperParams, pi: &ProbVector, losses: &[f64]) -> Result<Vec<f64>> {
    let tilde = mix_uniform(pi, params.gamma);
    let mut out = vec![0.0; pi.len()];
    for (drawn, &w) in tilde.as_slice().iter().enumerate() {
        let mut learner = WsuUx::from_probs(*params, pi.clone())?;
        learner.step_forced(losses, drawn)?;
        for (o, p) in out.iter_mut().zip(learner.probs()) {
            *o += w * p;
        }
    }
    Ok(out)
}

/// One-round moments of the estimates, enumerated over the draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMoments {
    /// `E[sum_j pi_j lhat_j^2]`.
    pub weighted_second_moment: f64,
    /// `E[lhat_i^2]` per arm.
    pub second_moments: Vec<f64>,
    /// `E[sum_j (pi_tilde_j - pi_j) lhat_j]`.
    pub bias: f64,
}

pub fn round_moments(params: &HyperParams, pi: &ProbVector, losses: &[f64]) -> Result<RoundMoments> {
    let tilde = mix_uniform(pi, params.gamma);
    let k = pi.len();
    let mut m = RoundMoments { weighted_second_moment: 0.0, second_moments: vec![0.0; k], bias: 0.0 };
    for (drawn, &w) in tilde.as_slice().iter().enumerate() {
        let mut learner = WsuUx::from_probs(*params, pi.clone())?;
        let view = learner.step_forced(losses, drawn)?;
        for j in 0..k {
            let l = view.est_losses[j];
            m.weighted_second_moment += w * pi.get(j) * l * l;
            m.second_moments[j] += w * l * l;
            m.bias += w * (view.pi_tilde[j] - view.pi_before[j]) * l;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MathHelperReport {
    /// Grid points checked for `ln(1 - x) <= -x - x^2/4` on `[-1 + 1e-9, 1/2]`.
    pub log_bound_points: usize,
    pub log_bound_violations: usize,
    /// Smallest slack `-x - x^2/4 - ln(1 - x)` on the grid.
    pub log_bound_min_slack: f64,
    pub moment_configs: usize,
    /// Largest gap between enumerated and closed-form moments.
    pub moment_identity_error: f64,
    /// Configurations with `E[sum_j pi_j lhat_j^2] > 2K` or `E[lhat_i^2] > K/gamma`.
    pub moment_bound_violations: usize,
}

/// Points on the log-bound grid.
pub const LOG_BOUND_GRID: usize = 100_000;
/// Random WSU-UX states for the second-moment checks.
pub const MOMENT_CONFIGS: usize = 1000;

/// Grid check of the log-quadratic bound and enumerated checks of the
/// second-moment bounds on seeded random states.
pub fn math_helper_checks() -> MathHelperReport {
    let (lo, hi) = (-1.0 + 1e-9, 0.5);
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    for i in 0..LOG_BOUND_GRID {
        let x = lo + (hi - lo) * i as f64 / (LOG_BOUND_GRID - 1) as f64;
        let slack = -x - x * x / 4.0 - (-x).ln_1p();
        if slack < 0.0 {
            violations += 1;
        }
        min_slack = min_slack.min(slack);
    }

    let mut rng = Seed::new(0x005E_C04D, 0).rng();
    let mut identity_error: f64 = 0.0;
    let mut bound_violations = 0;
    for _ in 0..MOMENT_CONFIGS {
        let k = rng.random_range(2..=6usize);
        let gamma = rng.random_range(0.01..0.49);
        let eta = rng.random_range(0.01..0.49) * gamma / k as f64;
        let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
        let pi = ProbVector::from_weights(&weights).expect("positive weights");
        let losses: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let params = HyperParams::new(eta, gamma, k, 1);
        let m = round_moments(&params, &pi, &losses).expect("valid state");
        let tilde = mix_uniform(&pi, gamma);
        let closed: f64 = (0..k).map(|j| pi.get(j) * losses[j] * losses[j] / tilde.get(j)).sum();
        identity_error = identity_error.max((closed - m.weighted_second_moment).abs());
        let kf = k as f64;
        let mut bad = m.weighted_second_moment > 2.0 * kf;
        for j in 0..k {
            let closed_j = losses[j] * losses[j] / tilde.get(j);
            identity_error = identity_error.max((closed_j - m.second_moments[j]).abs());
            bad |= m.second_moments[j] > kf / gamma;
        }
        bound_violations += bad as usize;
    }

    MathHelperReport {
        log_bound_points: LOG_BOUND_GRID,
        log_bound_violations: violations,
        log_bound_min_slack: min_slack,
        moment_configs: MOMENT_CONFIGS,
        moment_identity_error: identity_error,
        moment_bound_violations: bound_violations,
    }
}
