use serde::{Deserialize, Serialize};

use crate::environments::{derived_quantities, LossSource, PhasePlan};
use crate::error::{Error, Result};
use crate::learners::{LearnerKind, LearnerState};
use crate::numeric::CompensatedSum;
use crate::params::HyperParams;
use crate::seed::Seed;

/// Path checkpoints per trial, besides the phase boundaries.
pub const CHECKPOINT_BUDGET: u64 = 1024;
/// Rounds at which the one-step recursion for `pi_{t,1}` is sampled.
pub const PROBE_COUNT: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub t: u64,
    pub pi1: f64,
}

/// `pi_{t,1}`, `pi_{t+1,1}` and `C = eta (l_{t,1} - l_{t,2})` at a probe round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub t: u64,
    pub pi: f64,
    pub next: f64,
    pub c: f64,
}

impl ProbeSample {
    /// `pi_{t+1,1} - [(1 - C) pi + C pi^2]`; zero-mean for WSU-UX on two arms.
    pub fn residual(&self) -> f64 {
        self.next - ((1.0 - self.c) * self.pi + self.c * self.pi * self.pi)
    }
}

/// Worst-case per-round diagnostics over one or more trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantAudit {
    pub rounds: u64,
    /// Largest `|sum pi_{t+1} - 1|` before repair.
    pub max_sum_deviation: f64,
    /// Smallest entry of `pi_{t+1}` before repair.
    pub min_pre_repair: f64,
    /// Range of `eta (lhat_i - sum_j pi_j lhat_j)` over all arms and rounds.
    pub rel_loss_min: f64,
    pub rel_loss_max: f64,
    /// Rounds after the switch at which `pi_{t,1}` went down.
    pub phase2_decreases: u64,
}

impl Default for InvariantAudit {
    fn default() -> Self {
        InvariantAudit {
            rounds: 0,
            max_sum_deviation: 0.0,
            min_pre_repair: f64::INFINITY,
            rel_loss_min: f64::INFINITY,
            rel_loss_max: f64::NEG_INFINITY,
            phase2_decreases: 0,
        }
    }
}

impl InvariantAudit {
    pub fn merge(&mut self, other: &InvariantAudit) {
        self.rounds += other.rounds;
        self.max_sum_deviation = self.max_sum_deviation.max(other.max_sum_deviation);
        self.min_pre_repair = self.min_pre_repair.min(other.min_pre_repair);
        self.rel_loss_min = self.rel_loss_min.min(other.rel_loss_min);
        self.rel_loss_max = self.rel_loss_max.max(other.rel_loss_max);
        self.phase2_decreases += other.phase2_decreases;
    }

    /// Multipliers `1 - rel` all lie in `[1/2, 2]`.
    pub fn multipliers_in_range(&self) -> bool {
        self.rel_loss_min >= -1.0 && self.rel_loss_max <= 0.5
    }
}

/// Everything one trial records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub learner: LearnerKind,
    pub env: String,
    pub params: HyperParams,
    pub trial_index: u64,
    pub stream_seed: u64,
    /// `pi_{t,1}` at the checkpoints, ending with `t = T + 1`.
    pub path: Vec<PathPoint>,
    /// `pi_{T1,1}`, `pi_{T1+1,1}` and `pi_{T1+T2+1,1}`; present with a phase plan.
    pub pi_t1: Option<f64>,
    pub pi_t1_plus_1: Option<f64>,
    pub pi_t1t2_plus_1: Option<f64>,
    pub pi_final: f64,
    /// `pi_{T1+1,1} >= 2^{-M}`; present when the derived quantities exist.
    pub e1: Option<bool>,
    /// `pi_{T1+T2+1,1} >= 1/4`.
    pub e2: Option<bool>,
    /// `pi_{T+1,1} >= 3/4`.
    pub recovered: bool,
    pub pseudo_regret: f64,
    /// `sum_t (lhat_{t,1} - sum_j pi_{t,j} lhat_{t,j})^2`.
    pub second_moment_sum: f64,
    /// `sum_t sum_j (pi_tilde_{t,j} - pi_{t,j}) lhat_{t,j}`.
    pub bias_sum: f64,
    pub ln_pi_final: f64,
    pub arm1_pulls_phase1: u64,
    pub probes: Vec<ProbeSample>,
    pub audit: InvariantAudit,
}

/// Lower bound on `ln pi_{T+1,1}` for WSU-UX on the lower-bound sequence:
/// `(T/100 + 1) ln(1/2)`.
pub fn observation_floor(horizon: u64) -> f64 {
    (horizon as f64 / 100.0 + 1.0) * 0.5f64.ln()
}

/// Rounds `t` at which `pi_{t,1}` is checkpointed: every `ceil(T/1024)`
/// rounds from `t = 1`, each phase boundary `b` and `b + 1`, and `T + 1`.
pub fn checkpoint_rounds(horizon: u64, plan: Option<&PhasePlan>) -> Vec<u64> {
    let stride = horizon.div_ceil(CHECKPOINT_BUDGET).max(1);
    let mut ts: Vec<u64> = (0..).map(|s| 1 + s * stride).take_while(|t| *t <= horizon).collect();
    if let Some(p) = plan {
        for b in p.boundaries {
            ts.push(b);
            ts.push(b + 1);
        }
    }
    ts.push(horizon + 1);
    ts.sort_unstable();
    ts.dedup();
    ts
}

/// `round(j T / 11)` for `j = 1..=10`, clamped to `[1, T]` and deduplicated.
pub fn probe_rounds(horizon: u64) -> Vec<u64> {
    let denom = PROBE_COUNT + 1;
    let mut ts: Vec<u64> = (1..=PROBE_COUNT).map(|j| ((j * horizon + denom / 2) / denom).clamp(1, horizon)).collect();
    ts.dedup();
    ts
}

/// Plays one trial of `kind` against `source`; deterministic in `seed`.
pub fn run_trial<S: LossSource + ?Sized>(
    kind: LearnerKind,
    source: &S,
    params: &HyperParams,
    seed: Seed,
) -> Result<Trajectory> {
    run_trial_inner(kind, source, params, seed).map_err(|e| Error::Trial {
        trial_index: seed.trial_index,
        stream_seed: seed.stream_seed(),
        source: Box::new(e),
    })
}

fn run_trial_inner<S: LossSource + ?Sized>(
    kind: LearnerKind,
    source: &S,
    params: &HyperParams,
    seed: Seed,
) -> Result<Trajectory> {
    let k = source.k();
    let horizon = source.horizon();
    if params.k != k || params.horizon != horizon {
        return Err(Error::domain(format!(
            "params are for K = {}, T = {} but the environment has K = {k}, T = {horizon}",
            params.k, params.horizon
        )));
    }
    let mut learner = LearnerState::new(kind, params)?;
    let mut rng = seed.rng();
    let plan = source.phase_plan();
    let t1 = plan.map(|p| p.t1);
    let t1t2 = plan.map(|p| p.t1 + p.t2);
    let checkpoints = checkpoint_rounds(horizon, plan.as_ref());
    let probe_ts = if k == 2 { probe_rounds(horizon) } else { Vec::new() };
    let eta = params.eta;

    let mut row = vec![0.0; k];
    let mut cumulative = vec![0.0; k];
    let mut expected_loss = CompensatedSum::new();
    let mut second = CompensatedSum::new();
    let mut bias = CompensatedSum::new();
    let mut path = Vec::with_capacity(checkpoints.len());
    let mut probes = Vec::with_capacity(probe_ts.len());
    let (mut next_cp, mut next_probe) = (0, 0);
    let (mut pi_t1, mut pi_t1_plus_1, mut pi_t1t2_plus_1) = (None, None, None);
    let mut pulls = 0;
    let mut audit = InvariantAudit { rounds: horizon, ..InvariantAudit::default() };

    for t in 1..=horizon {
        let pi1 = learner.probs()[0];
        if checkpoints.get(next_cp) == Some(&t) {
            path.push(PathPoint { t, pi1 });
            next_cp += 1;
        }
        if Some(t) == t1 {
            pi_t1 = Some(pi1);
        } else if t1.map(|x| x + 1) == Some(t) {
            pi_t1_plus_1 = Some(pi1);
        }
        if t1t2.map(|x| x + 1) == Some(t) {
            pi_t1t2_plus_1 = Some(pi1);
        }

        source.loss_row(t, &mut row);
        for (c, l) in cumulative.iter_mut().zip(&row) {
            *c += l;
        }
        let view = learner.step(&row, &mut rng)?;
        let (mut round_loss, mut avg, mut round_bias) = (0.0, 0.0, 0.0);
        for j in 0..k {
            round_loss += view.pi_tilde[j] * row[j];
            avg += view.pi_before[j] * view.est_losses[j];
            round_bias += (view.pi_tilde[j] - view.pi_before[j]) * view.est_losses[j];
        }
        expected_loss.add(round_loss);
        let d = view.est_losses[0] - avg;
        second.add(d * d);
        bias.add(round_bias);
        for l in view.est_losses {
            let rel = eta * (l - avg);
            audit.rel_loss_min = audit.rel_loss_min.min(rel);
            audit.rel_loss_max = audit.rel_loss_max.max(rel);
        }
        audit.max_sum_deviation = audit.max_sum_deviation.max((view.pre_repair_sum - 1.0).abs());
        audit.min_pre_repair = audit.min_pre_repair.min(view.pre_repair_min);
        if view.chosen == Some(0) && t1.is_some_and(|x| t <= x) {
            pulls += 1;
        }

        let next = learner.probs()[0];
        if probe_ts.get(next_probe) == Some(&t) {
            probes.push(ProbeSample { t, pi: pi1, next, c: eta * (row[0] - row[1]) });
            next_probe += 1;
        }
        if t1.is_some_and(|x| t > x) && next < pi1 {
            audit.phase2_decreases += 1;
        }
    }

    let pi_final = learner.probs()[0];
    path.push(PathPoint { t: horizon + 1, pi1: pi_final });
    debug_assert_eq!(path.len(), checkpoints.len());

    let best = source.designated_best_arm().unwrap_or_else(|| {
        // Lowest index among the minimizers.
        (0..k).fold(0, |b, i| if cumulative[i] < cumulative[b] { i } else { b })
    });
    let e1 = match (pi_t1_plus_1, derived_quantities(params)) {
        (Some(p), Ok(d)) => Some(p.ln() >= -d.m_exponent * std::f64::consts::LN_2),
        _ => None,
    };

    Ok(Trajectory {
        learner: kind,
        env: source.label(),
        params: *params,
        trial_index: seed.trial_index,
        stream_seed: seed.stream_seed(),
        path,
        pi_t1,
        pi_t1_plus_1,
        pi_t1t2_plus_1,
        pi_final,
        e1,
        e2: pi_t1t2_plus_1.map(|p| p >= 0.25),
        recovered: pi_final >= 0.75,
        pseudo_regret: expected_loss.value() - cumulative[best],
        second_moment_sum: second.value(),
        bias_sum: bias.value(),
        ln_pi_final: pi_final.ln(),
        arm1_pulls_phase1: pulls,
        probes,
        audit,
    })
}
