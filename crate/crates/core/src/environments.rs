//! Oblivious loss sequences and the quantities the lower-bound analysis
//! derives from them.
//!
//! Rounds are 1-based throughout: `loss(t, i)` is defined for `1 <= t <= T`.
//! Arms are 0-based, so "arm 1" of the two-arm construction is index 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{HyperParams, Regime};
use crate::scoring::LossFn;
use crate::seed::mix;

/// Anything that can feed a loss row per round.
pub trait LossSource: Sync {
    fn k(&self) -> usize;
    fn horizon(&self) -> u64;
    /// Writes `l_{t, .}` into `out` (length `k`), `1 <= t <= horizon`.
    fn loss_row(&self, t: u64, out: &mut [f64]);
    /// An arm fixed in advance as the comparator, overriding the argmin of
    /// cumulative loss.
    fn designated_best_arm(&self) -> Option<usize> {
        None
    }
    /// Sub-phase structure, where the model has one.
    fn phase_plan(&self) -> Option<PhasePlan> {
        None
    }
    fn label(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LossModel {
    /// Arm 1 loses for `t <= floor(T/100)`, arm 2 loses afterwards.
    LowerBound { horizon: u64 },
    /// Arm 1 never loses, arm 2 always does.
    TrivialEta { horizon: u64 },
    /// Independent Bernoulli losses with rates `p`, fixed by `seed`.
    Bernoulli { horizon: u64, p: [f64; 2], seed: u64 },
}

/// The two-arm sequence that forces WSU-UX into `T^{2/3}` regret.
pub fn lower_bound_sequence(horizon: u64) -> Result<LossModel> {
    if horizon < 100 {
        return Err(Error::HorizonTooShort { horizon, min: 100 });
    }
    Ok(LossModel::LowerBound { horizon })
}

/// Arm 1 lossless, arm 2 always loses: regret counts arm-2 selections.
pub fn trivial_sequence(horizon: u64) -> Result<LossModel> {
    if horizon < 1 {
        return Err(Error::HorizonTooShort { horizon, min: 1 });
    }
    Ok(LossModel::TrivialEta { horizon })
}

/// Stochastic two-arm sanity environment; `p[i]` is the loss rate of arm `i`.
pub fn bernoulli_sequence(horizon: u64, p: [f64; 2], seed: u64) -> Result<LossModel> {
    if horizon < 1 {
        return Err(Error::HorizonTooShort { horizon, min: 1 });
    }
    if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::domain("Bernoulli rates must lie in [0, 1]"));
    }
    Ok(LossModel::Bernoulli { horizon, p, seed })
}

impl LossModel {
    /// Last round of the first phase of the lower-bound sequence.
    pub fn switch_round(&self) -> Option<u64> {
        match self {
            LossModel::LowerBound { horizon } => Some(horizon / 100),
            _ => None,
        }
    }

    pub fn loss(&self, t: u64, arm: usize) -> f64 {
        debug_assert!(t >= 1 && t <= self.horizon(), "round {t} outside 1..={}", self.horizon());
        match *self {
            LossModel::LowerBound { horizon } => {
                let first_phase = t <= horizon / 100;
                match (arm, first_phase) {
                    (0, true) | (1, false) => 1.0,
                    _ => 0.0,
                }
            }
            LossModel::TrivialEta { .. } => {
                if arm == 0 {
                    0.0
                } else {
                    1.0
                }
            }
            LossModel::Bernoulli { p, seed, .. } => {
                let u = (mix(seed, t.wrapping_mul(2).wrapping_add(arm as u64)) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                if u < p[arm] {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `sum_t l_{t, i}` for each arm.
    pub fn cumulative_losses(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.k()];
        let mut row = vec![0.0; self.k()];
        for t in 1..=self.horizon() {
            self.loss_row(t, &mut row);
            for (o, l) in out.iter_mut().zip(&row) {
                *o += l;
            }
        }
        out
    }
}

impl LossSource for LossModel {
    fn k(&self) -> usize {
        2
    }

    fn horizon(&self) -> u64 {
        match *self {
            LossModel::LowerBound { horizon } | LossModel::TrivialEta { horizon } | LossModel::Bernoulli { horizon, .. } => {
                horizon
            }
        }
    }

    #[inline]
    fn loss_row(&self, t: u64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.loss(t, i);
        }
    }

    fn designated_best_arm(&self) -> Option<usize> {
        match self {
            LossModel::LowerBound { .. } | LossModel::TrivialEta { .. } => Some(0),
            LossModel::Bernoulli { .. } => None,
        }
    }

    fn phase_plan(&self) -> Option<PhasePlan> {
        match self {
            LossModel::LowerBound { horizon } => phase_plan(*horizon).ok(),
            _ => None,
        }
    }

    fn label(&self) -> String {
        match self {
            LossModel::LowerBound { .. } => "lower-bound".into(),
            LossModel::TrivialEta { .. } => "trivial".into(),
            LossModel::Bernoulli { p, .. } => format!("bernoulli:{},{}", p[0], p[1]),
        }
    }
}

/// Sub-phase lengths of the lower-bound sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub t1: u64,
    pub t2: u64,
    pub t3: u64,
    pub t4: u64,
    /// Last round of phases 1, 2.1, 2.2 and 2.3.
    pub boundaries: [u64; 4],
}

impl PhasePlan {
    pub fn horizon(&self) -> u64 {
        self.boundaries[3]
    }
}

/// Phase lengths `floor(T/100)`, `floor(2T/10)`, `floor(T/10)` and the remainder.
pub fn phase_plan(horizon: u64) -> Result<PhasePlan> {
    if horizon < 1000 {
        return Err(Error::HorizonTooShort { horizon, min: 1000 });
    }
    let t1 = horizon / 100;
    let t2 = 2 * horizon / 10;
    let t3 = horizon / 10;
    let t4 = horizon - t1 - t2 - t3;
    Ok(PhasePlan { t1, t2, t3, t4, boundaries: [t1, t1 + t2, t1 + t2 + t3, horizon] })
}

/// `M`, `T'`, `eps1`, `eps2` of the recovery analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub eps1: f64,
    pub eps2: f64,
    pub m_exponent: f64,
    pub t_prime: f64,
    /// Whether `T' <= T_2`, which the analysis assumes for large `T`.
    pub t_prime_le_t2: bool,
}

/// Evaluates the derived quantities for non-trivial parameters.
///
/// `eps1` is not required to be below one; at moderate horizons with
/// `gamma = T^{-1/3}` it usually is not.
pub fn derived_quantities(params: &HyperParams) -> Result<DerivedQuantities> {
    let regime = params.regime();
    if regime != Regime::NonTrivial {
        return Err(Error::RegimeMismatch(regime.to_string()));
    }
    let plan = phase_plan(params.horizon)?;
    let (eta, gamma, k) = (params.eta, params.gamma, params.k as f64);
    let ln_t = (params.horizon as f64).ln();
    let (t1, t2) = (plan.t1 as f64, plan.t2 as f64);
    let eps1 = (6.0 * ln_t / ((2.0 * gamma / k) * t1)).sqrt();
    let eps2 = (4.0 * ln_t / (((3.0 - gamma) / 4.0) * t2)).sqrt();
    if eps2 >= 1.0 {
        return Err(Error::Eps2TooLarge { eps2 });
    }
    let m_exponent = ((2.0 * k / gamma).ln() + 2.0 * (1.0 + eps1) * (1.0 + eta * k / gamma) * eta * t1)
        / std::f64::consts::LN_2;
    let t_prime = (1.0 / (1.0 - eps2)) * (4.0 / (3.0 - gamma)) * (2.0 / eta) * m_exponent;
    Ok(DerivedQuantities { eps1, eps2, m_exponent, t_prime, t_prime_le_t2: t_prime <= t2 })
}

/// One round's truthful beliefs and outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefRound {
    pub beliefs: Vec<f64>,
    pub outcome: bool,
}

/// Realizes a loss row as beliefs under squared loss: `y = 0`,
/// `b_i = sqrt(l_i)`, so the truthful report's loss is `b_i^2 = l_i`.
///
/// The round trip is exact for losses in `{0, 1}` and for any loss whose
/// square root squares back to itself in floating point (e.g. `0.25`).
pub fn realize_beliefs(losses: &[f64]) -> Result<BeliefRound> {
    if losses.iter().any(|l| !(0.0..=1.0).contains(l)) {
        return Err(Error::domain("losses must lie in [0, 1]"));
    }
    Ok(BeliefRound { beliefs: losses.iter().map(|l| l.sqrt()).collect(), outcome: false })
}

/// Feeds a learner the squared losses of truthful reports realized from
/// `inner`.
#[derive(Debug, Clone, Copy)]
pub struct RealizedBeliefs<'a, S: LossSource> {
    pub inner: &'a S,
}

impl<S: LossSource> LossSource for RealizedBeliefs<'_, S> {
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn horizon(&self) -> u64 {
        self.inner.horizon()
    }

    fn loss_row(&self, t: u64, out: &mut [f64]) {
        self.inner.loss_row(t, out);
        let round = realize_beliefs(out).expect("inner model produced losses outside [0, 1]");
        for (o, b) in out.iter_mut().zip(&round.beliefs) {
            *o = LossFn::Squared.eval(*b, round.outcome);
        }
    }

    fn designated_best_arm(&self) -> Option<usize> {
        self.inner.designated_best_arm()
    }

    fn phase_plan(&self) -> Option<PhasePlan> {
        self.inner.phase_plan()
    }

    fn label(&self) -> String {
        format!("{}+beliefs", self.inner.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_examples() {
        let m = lower_bound_sequence(200).unwrap();
        assert_eq!((m.loss(1, 0), m.loss(1, 1)), (1.0, 0.0));
        assert_eq!((m.loss(2, 0), m.loss(2, 1)), (1.0, 0.0));
        assert_eq!((m.loss(3, 0), m.loss(3, 1)), (0.0, 1.0));
        let m = lower_bound_sequence(10_000).unwrap();
        assert_eq!(m.cumulative_losses(), vec![100.0, 9900.0]);
        assert!(lower_bound_sequence(99).is_err());
    }

    #[test]
    fn lower_bound_rows_sum_to_one() {
        for &t_max in &[100u64, 1234, 10_000] {
            let m = lower_bound_sequence(t_max).unwrap();
            let mut row = [0.0; 2];
            for t in 1..=t_max {
                m.loss_row(t, &mut row);
                assert_eq!(row[0] + row[1], 1.0);
                assert!(row.iter().all(|l| *l == 0.0 || *l == 1.0));
            }
        }
    }

    #[test]
    fn trivial_examples() {
        let m = trivial_sequence(50).unwrap();
        assert!((1..=50).all(|t| m.loss(t, 0) == 0.0 && m.loss(t, 1) == 1.0));
        assert_eq!(m.cumulative_losses()[0], 0.0);
    }

    #[test]
    fn bernoulli_is_pure_and_matches_rates() {
        let m = bernoulli_sequence(20_000, [0.1, 0.9], 5).unwrap();
        assert_eq!(m.loss(17, 1), m.loss(17, 1));
        let c = m.cumulative_losses();
        assert!((c[0] / 20_000.0 - 0.1).abs() < 0.01);
        assert!((c[1] / 20_000.0 - 0.9).abs() < 0.01);
    }

    #[test]
    fn phase_plan_examples() {
        let p = phase_plan(10_000).unwrap();
        assert_eq!((p.t1, p.t2, p.t3, p.t4), (100, 2000, 1000, 6900));
        assert_eq!(p.boundaries, [100, 2100, 3100, 10_000]);
        assert_eq!(phase_plan(100_000).unwrap().t1, 1000);
        assert!(phase_plan(999).is_err());
    }

    #[test]
    fn phase_plan_lengths_track_fractions() {
        for t in (1000u64..20_000).step_by(37) {
            let p = phase_plan(t).unwrap();
            assert_eq!(p.t1 + p.t2 + p.t3 + p.t4, t);
            let tf = t as f64;
            for (len, frac, slack) in [(p.t1, 0.01, 1.0), (p.t2, 0.2, 1.0), (p.t3, 0.1, 1.0), (p.t4, 0.69, 3.0)] {
                assert!((len as f64 - frac * tf).abs() <= slack + 1e-9, "T = {t}");
            }
            assert!(p.boundaries.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(p.t1, lower_bound_sequence(t).unwrap().switch_round().unwrap());
        }
    }

    #[test]
    fn derived_quantities_example() {
        let t = 1_000_000u64;
        let tf = t as f64;
        let params = HyperParams::new(tf.powf(-2.0 / 3.0), tf.powf(-1.0 / 3.0), 2, t);
        let d = derived_quantities(&params).unwrap();
        // sqrt(6 ln 1e6 / ((2 * 0.01 / 2) * 1e4))
        let eps1 = (6.0 * tf.ln() / 100.0).sqrt();
        assert!((d.eps1 - eps1).abs() < 1e-12);
        assert!((d.eps1 - 0.9105).abs() < 1e-4);
        let ratio = d.t_prime / ((2.0 / params.eta) * d.m_exponent);
        assert!((ratio - (4.0 / (3.0 - params.gamma)) / (1.0 - d.eps2)).abs() < 1e-12);
    }

    #[test]
    fn m_is_quadratic_in_eta() {
        let t = 1_000_000u64;
        let gamma = 0.01;
        let m = |eta: f64| derived_quantities(&HyperParams::new(eta, gamma, 2, t)).unwrap().m_exponent;
        let (a, b, c) = (m(2e-4), m(3e-4), m(4e-4));
        // M is quadratic in eta, so third differences vanish.
        assert!(b > a && c > b);
        let d = derived_quantities(&HyperParams::new(5e-4, gamma, 2, t)).unwrap().m_exponent;
        assert!(((d - 3.0 * c + 3.0 * b - a) / d).abs() < 1e-9);
    }

    #[test]
    fn derived_quantities_errors() {
        let p = HyperParams::new(0.5 * 4096f64.powf(-2.0 / 3.0), 4096f64.powf(-1.0 / 3.0), 2, 4096);
        assert!(matches!(derived_quantities(&p), Err(Error::RegimeMismatch(_))));
        let t = 1000u64;
        let tf = t as f64;
        let p = HyperParams::new(tf.powf(-2.0 / 3.0), tf.powf(-1.0 / 3.0), 2, t);
        assert!(matches!(derived_quantities(&p), Err(Error::Eps2TooLarge { .. }) | Ok(_)));
    }

    #[test]
    fn realize_examples() {
        assert_eq!(realize_beliefs(&[1.0]).unwrap(), BeliefRound { beliefs: vec![1.0], outcome: false });
        assert_eq!(realize_beliefs(&[0.0]).unwrap().beliefs, vec![0.0]);
        let r = realize_beliefs(&[0.25]).unwrap();
        assert_eq!(r.beliefs, vec![0.5]);
        assert_eq!(LossFn::Squared.eval(0.5, false), 0.25);
    }

    #[test]
    fn realized_adapter_reproduces_rows() {
        let m = lower_bound_sequence(500).unwrap();
        let r = RealizedBeliefs { inner: &m };
        let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
        for t in 1..=500 {
            m.loss_row(t, &mut a);
            r.loss_row(t, &mut b);
            assert_eq!(a, b);
        }
    }
}
