use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial::{run_trial, InvariantAudit, PathPoint, Trajectory};
use crate::environments::LossSource;
use crate::error::{Error, Result};
use crate::learners::LearnerKind;
use crate::numeric::CompensatedSum;
use crate::params::HyperParams;
use crate::seed::Seed;

/// Normal quantile for two-sided 95% intervals.
pub const Z95: f64 = 1.96;

/// Mean, sample standard deviation, standard error and `mean +- 1.96 SE`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ScalarStats {
    /// Summarizes `xs` in order with compensated sums. Needs `n >= 1`; `sd` is
    /// zero for a single value.
    pub fn from_values(xs: &[f64]) -> ScalarStats {
        assert!(!xs.is_empty(), "statistics of an empty sample");
        let n = xs.len();
        let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n as f64;
        let ss = xs.iter().map(|x| (x - mean) * (x - mean)).collect::<CompensatedSum>().value();
        let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
        let se = sd / (n as f64).sqrt();
        ScalarStats { n, mean, sd, se, ci_low: mean - Z95 * se, ci_high: mean + Z95 * se }
    }
}

/// Event frequency with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub count: usize,
    pub n: usize,
    pub freq: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Frequency {
    pub fn from_flags(flags: impl IntoIterator<Item = bool>) -> Frequency {
        let (mut count, mut n) = (0, 0);
        for f in flags {
            n += 1;
            count += f as usize;
        }
        let freq = if n == 0 { 0.0 } else { count as f64 / n as f64 };
        let half = if n == 0 { 0.0 } else { Z95 * (freq * (1.0 - freq) / n as f64).sqrt() };
        Frequency { count, n, freq, ci_low: (freq - half).max(0.0), ci_high: (freq + half).min(1.0) }
    }
}

/// Across-trial statistics of the one-step recursion residual at a probe round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeStats {
    pub t: u64,
    pub mean_pi: f64,
    pub residual: ScalarStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub learner: LearnerKind,
    pub env: String,
    pub params: HyperParams,
    pub base_seed: u64,
    pub n_trials: usize,
    pub pseudo_regret: ScalarStats,
    pub ln_pi_final: ScalarStats,
    pub pi_final: ScalarStats,
    pub second_moment_sum: ScalarStats,
    pub bias_sum: ScalarStats,
    pub arm1_pulls_phase1: ScalarStats,
    pub pi_t1: Option<ScalarStats>,
    pub pi_t1_plus_1: Option<ScalarStats>,
    pub pi_t1t2_plus_1: Option<ScalarStats>,
    pub freq_e1: Option<Frequency>,
    pub freq_e2: Option<Frequency>,
    pub freq_recovered: Frequency,
    /// Across-trial mean of `pi_{t,1}` at each checkpoint.
    pub mean_path: Vec<PathPoint>,
    pub probes: Vec<ProbeStats>,
    /// Worst case over all trials.
    pub audit: InvariantAudit,
}

fn pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    if parallelism == 0 {
        return Err(Error::domain("parallelism must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))
}

/// Runs trials `0..n_trials` with seeds `Seed::new(base_seed, idx)`, returned
/// in index order. The first failing trial by index is reported.
pub fn run_trials<S: LossSource + ?Sized>(
    kind: LearnerKind,
    source: &S,
    params: &HyperParams,
    n_trials: usize,
    base_seed: u64,
    parallelism: usize,
) -> Result<Vec<Trajectory>> {
    let results: Vec<Result<Trajectory>> = pool(parallelism)?.install(|| {
        (0..n_trials as u64)
            .into_par_iter()
            .map(|i| run_trial(kind, source, params, Seed::new(base_seed, i)))
            .collect()
    });
    results.into_iter().collect()
}

/// [`run_trials`] followed by [`aggregate`]; needs at least two trials.
pub fn monte_carlo<S: LossSource + ?Sized>(
    kind: LearnerKind,
    source: &S,
    params: &HyperParams,
    n_trials: usize,
    base_seed: u64,
    parallelism: usize,
) -> Result<AggregateStats> {
    if n_trials < 2 {
        return Err(Error::domain(format!("n_trials must be at least 2, got {n_trials}")));
    }
    let trajectories = run_trials(kind, source, params, n_trials, base_seed, parallelism)?;
    aggregate(&trajectories, base_seed)
}

/// Folds trajectories of one configuration in the given order.
pub fn aggregate(trajectories: &[Trajectory], base_seed: u64) -> Result<AggregateStats> {
    let first = trajectories.first().ok_or_else(|| Error::domain("no trajectories to aggregate"))?;
    if trajectories
        .iter()
        .any(|t| t.learner != first.learner || t.params != first.params || t.env != first.env || t.path.len() != first.path.len())
    {
        return Err(Error::domain("trajectories come from different configurations"));
    }
    let scalar = |f: &dyn Fn(&Trajectory) -> f64| ScalarStats::from_values(&trajectories.iter().map(f).collect::<Vec<_>>());
    let optional = |f: &dyn Fn(&Trajectory) -> Option<f64>| {
        trajectories.iter().map(f).collect::<Option<Vec<f64>>>().map(|v| ScalarStats::from_values(&v))
    };
    let frequency = |f: &dyn Fn(&Trajectory) -> Option<bool>| {
        trajectories.iter().map(f).collect::<Option<Vec<bool>>>().map(Frequency::from_flags)
    };

    let mean_path = (0..first.path.len())
        .map(|c| PathPoint {
            t: first.path[c].t,
            pi1: trajectories.iter().map(|tr| tr.path[c].pi1).collect::<CompensatedSum>().value()
                / trajectories.len() as f64,
        })
        .collect();
    let probes = (0..first.probes.len())
        .map(|p| {
            let residuals: Vec<f64> = trajectories.iter().map(|tr| tr.probes[p].residual()).collect();
            let mean_pi = trajectories.iter().map(|tr| tr.probes[p].pi).collect::<CompensatedSum>().value()
                / trajectories.len() as f64;
            ProbeStats { t: first.probes[p].t, mean_pi, residual: ScalarStats::from_values(&residuals) }
        })
        .collect();
    let mut audit = InvariantAudit::default();
    for tr in trajectories {
        audit.merge(&tr.audit);
    }

    Ok(AggregateStats {
        learner: first.learner,
        env: first.env.clone(),
        params: first.params,
        base_seed,
        n_trials: trajectories.len(),
        pseudo_regret: scalar(&|t| t.pseudo_regret),
        ln_pi_final: scalar(&|t| t.ln_pi_final),
        pi_final: scalar(&|t| t.pi_final),
        second_moment_sum: scalar(&|t| t.second_moment_sum),
        bias_sum: scalar(&|t| t.bias_sum),
        arm1_pulls_phase1: scalar(&|t| t.arm1_pulls_phase1 as f64),
        pi_t1: optional(&|t| t.pi_t1),
        pi_t1_plus_1: optional(&|t| t.pi_t1_plus_1),
        pi_t1t2_plus_1: optional(&|t| t.pi_t1t2_plus_1),
        freq_e1: frequency(&|t| t.e1),
        freq_e2: frequency(&|t| t.e2),
        freq_recovered: Frequency::from_flags(trajectories.iter().map(|t| t.recovered)),
        mean_path,
        probes,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::lower_bound_sequence;

    #[test]
    fn scalar_stats_by_hand() {
        let s = ScalarStats::from_values(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.se - s.sd / 2.0).abs() < 1e-15);
        assert!((s.ci_high - s.mean - 1.96 * s.se).abs() < 1e-15);
        assert_eq!(ScalarStats::from_values(&[7.0]).sd, 0.0);
    }

    #[test]
    fn frequency_by_hand() {
        let f = Frequency::from_flags([true, true, false, true]);
        assert_eq!((f.count, f.n, f.freq), (3, 4, 0.75));
        assert_eq!(Frequency::from_flags([true; 5]).ci_low, 1.0);
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let t = 2000;
        let m = lower_bound_sequence(t).unwrap();
        let tf = t as f64;
        let p = HyperParams::new(tf.powf(-2.0 / 3.0), tf.powf(-1.0 / 3.0), 2, t);
        let a = monte_carlo(LearnerKind::WsuUx, &m, &p, 16, 42, 1).unwrap();
        let b = monte_carlo(LearnerKind::WsuUx, &m, &p, 16, 42, 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean_path.len(), a.mean_path.iter().map(|q| q.t).collect::<std::collections::BTreeSet<_>>().len());
    }

    #[test]
    fn bad_arguments() {
        let m = lower_bound_sequence(1000).unwrap();
        let p = HyperParams::new(0.01, 0.1, 2, 1000);
        assert!(monte_carlo(LearnerKind::WsuUx, &m, &p, 1, 0, 1).is_err());
        assert!(monte_carlo(LearnerKind::WsuUx, &m, &p, 4, 0, 0).is_err());
        assert!(aggregate(&[], 0).is_err());
    }
}
