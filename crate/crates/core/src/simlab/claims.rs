use serde::{Deserialize, Serialize};

use super::aggregate::{AggregateStats, Frequency, ScalarStats};
use crate::environments::{derived_quantities, DerivedQuantities};
use crate::error::{Error, Result};
use crate::params::Regime;

/// Desk-scale stand-ins for the asymptotic constants. The paper-level targets
/// are reported next to them.
pub const CLAIM1_DESK_THRESHOLD: f64 = 0.05;
pub const CLAIM3_DESK_FRACTION: f64 = 0.01;
pub const EVENT_DESK_THRESHOLD: f64 = 0.99;
/// Standard errors granted where a gate compares a mean against a constant.
pub const SE_ALLOWANCE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    AtLeast,
    AtMost,
}

/// A mean compared against a target, with `allowance` standard errors of slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub statistic: ScalarStats,
    pub direction: Direction,
    pub paper_target: f64,
    pub desk_threshold: f64,
    pub se_allowance: f64,
    pub meets_paper_target: bool,
    pub meets_desk_threshold: bool,
}

impl ClaimCheck {
    fn new(statistic: ScalarStats, direction: Direction, paper_target: f64, desk_threshold: f64, se_allowance: f64) -> Self {
        let slack = se_allowance * statistic.se;
        let meets = |target: f64| match direction {
            Direction::AtLeast => statistic.mean + slack >= target,
            Direction::AtMost => statistic.mean - slack <= target,
        };
        ClaimCheck {
            statistic,
            direction,
            paper_target,
            desk_threshold,
            se_allowance,
            meets_paper_target: meets(paper_target),
            meets_desk_threshold: meets(desk_threshold),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventCheck {
    pub frequency: Frequency,
    /// `1 - 2/T^2`.
    pub paper_target: f64,
    pub desk_threshold: Option<f64>,
    pub meets_desk_threshold: Option<bool>,
}

impl EventCheck {
    fn new(frequency: Frequency, horizon: u64, desk_threshold: Option<f64>) -> Self {
        let tf = horizon as f64;
        EventCheck {
            frequency,
            paper_target: 1.0 - 2.0 / (tf * tf),
            desk_threshold,
            meets_desk_threshold: desk_threshold.map(|d| frequency.freq >= d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub horizon: u64,
    pub k: usize,
    pub eta: f64,
    pub gamma: f64,
    pub n_trials: usize,
    pub derived: DerivedQuantities,
    /// `mean(ln pi_{T+1,1}) + ln K` against `ln(5/4)`.
    pub claim1: ClaimCheck,
    /// Second-moment sum against `T K / (1600 gamma)`.
    pub claim2: ClaimCheck,
    /// Bias sum against `(9/400) gamma T`.
    pub claim3: ClaimCheck,
    pub e1: Option<EventCheck>,
    pub e2: EventCheck,
    pub recovered: EventCheck,
    /// `mean pi_{T1,1}` against `1/(K T)`.
    pub phase1_decay: ClaimCheck,
    /// The desk thresholds are conservative stand-ins for constants that
    /// only hold beyond an unspecified horizon.
    pub desk_thresholds_are_conservative: bool,
}

/// Compares lower-bound-sequence statistics against the claim constants.
pub fn claim_statistics(stats: &AggregateStats) -> Result<ClaimReport> {
    let params = stats.params;
    let regime = params.regime();
    if regime != Regime::NonTrivial {
        return Err(Error::RegimeMismatch(format!("claims need non-trivial parameters, got {regime}")));
    }
    let missing = || Error::domain("claims need trajectories from the lower-bound sequence");
    let (pi_t1, freq_e2) = (stats.pi_t1.ok_or_else(missing)?, stats.freq_e2.ok_or_else(missing)?);
    let derived = derived_quantities(&params)?;
    let (t, k, gamma) = (params.horizon, params.k, params.gamma);
    let (tf, kf) = (t as f64, k as f64);

    let ln_k = kf.ln();
    let mut claim1_stat = stats.ln_pi_final;
    claim1_stat.mean += ln_k;
    claim1_stat.ci_low += ln_k;
    claim1_stat.ci_high += ln_k;
    let claim2_target = tf * kf / (1600.0 * gamma);

    Ok(ClaimReport {
        horizon: t,
        k,
        eta: params.eta,
        gamma,
        n_trials: stats.n_trials,
        derived,
        claim1: ClaimCheck::new(claim1_stat, Direction::AtLeast, (5.0f64 / 4.0).ln(), CLAIM1_DESK_THRESHOLD, 0.0),
        claim2: ClaimCheck::new(stats.second_moment_sum, Direction::AtLeast, claim2_target, claim2_target, SE_ALLOWANCE),
        claim3: ClaimCheck::new(
            stats.bias_sum,
            Direction::AtLeast,
            9.0 / 400.0 * gamma * tf,
            CLAIM3_DESK_FRACTION * gamma * tf,
            0.0,
        ),
        e1: stats.freq_e1.map(|f| EventCheck::new(f, t, None)),
        e2: EventCheck::new(freq_e2, t, Some(EVENT_DESK_THRESHOLD)),
        recovered: EventCheck::new(stats.freq_recovered, t, Some(EVENT_DESK_THRESHOLD)),
        phase1_decay: ClaimCheck::new(pi_t1, Direction::AtMost, 1.0 / (kf * tf), 1.0 / (kf * tf), SE_ALLOWANCE),
        desk_thresholds_are_conservative: true,
    })
}
