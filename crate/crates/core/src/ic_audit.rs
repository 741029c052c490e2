//! Exact incentive-compatibility audits.
//!
//! An expert's objective is its expected selection probability after one
//! update, with the expectation over `y ~ Bern(belief)` and, for WSU-UX, over
//! the arm draw. Both are enumerated exactly.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::apply_wsu;
use crate::scoring::{unit_grid, LossFn};
use crate::seed::Seed;
use crate::simplex::{mix_uniform_into, ProbVector};

/// Update rules the auditor knows how to expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditAlgo {
    Wsu,
    WsuUx,
    /// `pi_i e^{-eta l_i}`, renormalized.
    HedgeNormalized,
    /// `pi_i (1 - eta l_i)`, renormalized.
    MwuNormalized,
}

impl AuditAlgo {
    pub const ALL: [AuditAlgo; 4] =
        [AuditAlgo::Wsu, AuditAlgo::WsuUx, AuditAlgo::HedgeNormalized, AuditAlgo::MwuNormalized];

    pub fn name(self) -> &'static str {
        match self {
            AuditAlgo::Wsu => "wsu",
            AuditAlgo::WsuUx => "wsu-ux",
            AuditAlgo::HedgeNormalized => "hedge-normalized",
            AuditAlgo::MwuNormalized => "mwu-normalized",
        }
    }
}

impl std::fmt::Display for AuditAlgo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AuditAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AuditAlgo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown audit algorithm {s:?}")))
    }
}

/// Which draws the bandit expectation ranges over. Ignored by
/// full-information rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// The audited arm is the drawn arm.
    #[default]
    ConditionalOnSelected,
    /// Average over `I_t ~ pi_tilde`.
    Unconditional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub algo: AuditAlgo,
    pub pi: ProbVector,
    pub eta: f64,
    /// Exploration rate; only read by WSU-UX.
    pub gamma: f64,
    /// Reports of the other `K - 1` experts, in index order with `expert` removed.
    pub other_reports: Vec<f64>,
    pub belief: f64,
    pub expert: usize,
    pub loss_fn: LossFn,
    pub conditioning: Conditioning,
}

impl AuditConfig {
    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k < 2 {
            return Err(Error::domain("audits need at least two experts"));
        }
        if self.expert >= k {
            return Err(Error::domain(format!("expert {} out of range for K = {k}", self.expert)));
        }
        if self.other_reports.len() != k - 1 {
            return Err(Error::domain(format!("expected {} other reports, got {}", k - 1, self.other_reports.len())));
        }
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(self.belief) || !self.other_reports.iter().all(|r| in_unit(*r)) {
            return Err(Error::domain("belief and reports must lie in [0, 1]"));
        }
        if !(self.eta > 0.0 && self.eta < 0.5) {
            return Err(Error::InvalidParams(format!("eta must lie in (0, 1/2), got {}", self.eta)));
        }
        if self.algo == AuditAlgo::WsuUx
            && !(self.gamma > 0.0 && self.gamma < 0.5 && self.eta * k as f64 / self.gamma <= 0.5)
        {
            return Err(Error::InvalidParams(format!(
                "WSU-UX needs gamma in (0, 1/2) and eta K / gamma <= 1/2, got eta = {}, gamma = {}",
                self.eta, self.gamma
            )));
        }
        Ok(())
    }

    /// The full report profile with `report` in the audited slot.
    pub fn reports_with(&self, report: f64) -> Vec<f64> {
        let mut r = self.other_reports.clone();
        r.insert(self.expert, report);
        r
    }
}

/// `E[pi_{t+1, i}]` when expert `i` reports `report`.
pub fn expected_next_prob(cfg: &AuditConfig, report: f64) -> Result<f64> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&report) {
        return Err(Error::domain(format!("report {report} outside [0, 1]")));
    }
    let mut ws = Workspace::new(cfg.k());
    Ok(expected_unchecked(cfg, report, &mut ws))
}

struct Workspace {
    reports: Vec<f64>,
    losses: Vec<f64>,
    est: Vec<f64>,
    next: Vec<f64>,
    tilde: Vec<f64>,
}

impl Workspace {
    fn new(k: usize) -> Self {
        Workspace { reports: vec![0.0; k], losses: vec![0.0; k], est: vec![0.0; k], next: vec![0.0; k], tilde: vec![0.0; k] }
    }
}

fn expected_unchecked(cfg: &AuditConfig, report: f64, ws: &mut Workspace) -> f64 {
    let i = cfg.expert;
    ws.reports[..i].copy_from_slice(&cfg.other_reports[..i]);
    ws.reports[i] = report;
    ws.reports[i + 1..].copy_from_slice(&cfg.other_reports[i..]);
    let pi = cfg.pi.as_slice();
    if cfg.algo == AuditAlgo::WsuUx {
        mix_uniform_into(pi, cfg.gamma, &mut ws.tilde);
    }

    let mut total = 0.0;
    for (y, p_y) in [(true, cfg.belief), (false, 1.0 - cfg.belief)] {
        if p_y == 0.0 {
            continue;
        }
        for (l, r) in ws.losses.iter_mut().zip(&ws.reports) {
            *l = cfg.loss_fn.eval(*r, y);
        }
        let value = match cfg.algo {
            AuditAlgo::Wsu => {
                ws.next.copy_from_slice(pi);
                apply_wsu(&mut ws.next, &ws.losses, cfg.eta);
                ws.next[i]
            }
            AuditAlgo::HedgeNormalized => normalized(pi, &ws.losses, i, |l| (-cfg.eta * l).exp()),
            AuditAlgo::MwuNormalized => normalized(pi, &ws.losses, i, |l| 1.0 - cfg.eta * l),
            AuditAlgo::WsuUx => match cfg.conditioning {
                Conditioning::ConditionalOnSelected => bandit_branch(pi, cfg.eta, i, i, ws),
                Conditioning::Unconditional => {
                    let mut acc = 0.0;
                    for j in 0..pi.len() {
                        acc += ws.tilde[j] * bandit_branch(pi, cfg.eta, i, j, ws);
                    }
                    acc
                }
            },
        };
        total += p_y * value;
    }
    total
}

fn normalized(pi: &[f64], losses: &[f64], i: usize, mult: impl Fn(f64) -> f64) -> f64 {
    let z: f64 = pi.iter().zip(losses).map(|(p, l)| p * mult(*l)).sum();
    pi[i] * mult(losses[i]) / z
}

/// `pi_{t+1, i}` after drawing arm `drawn`, with `ws.losses` and `ws.tilde` filled.
fn bandit_branch(pi: &[f64], eta: f64, i: usize, drawn: usize, ws: &mut Workspace) -> f64 {
    ws.est.fill(0.0);
    ws.est[drawn] = ws.losses[drawn] / ws.tilde[drawn];
    ws.next.copy_from_slice(pi);
    apply_wsu(&mut ws.next, &ws.est, eta);
    ws.next[i]
}

/// Grid maximizer of [`expected_next_prob`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub r_star: f64,
    pub value: f64,
}

/// Values within this distance of the maximum count as ties.
pub const TIE_TOLERANCE: f64 = 1e-15;

/// Best response over `grid_points` evenly spaced reports in `[0, 1]`.
///
/// Ties go to the report closest to the belief, then to the lowest report.
pub fn best_response(cfg: &AuditConfig, grid_points: usize) -> Result<BestResponse> {
    cfg.validate()?;
    if grid_points < 101 {
        return Err(Error::domain(format!("report grid needs at least 101 points, got {grid_points}")));
    }
    Ok(best_response_unchecked(cfg, &unit_grid(grid_points)))
}

fn best_response_unchecked(cfg: &AuditConfig, grid: &[f64]) -> BestResponse {
    let mut ws = Workspace::new(cfg.k());
    let values: Vec<f64> = grid.iter().map(|&r| expected_unchecked(cfg, r, &mut ws)).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<BestResponse> = None;
    for (&r, &v) in grid.iter().zip(&values) {
        if v < max - TIE_TOLERANCE {
            continue;
        }
        // Grid is ascending, so strict improvement keeps the lowest report on ties.
        let closer = best.is_none_or(|b| (r - cfg.belief).abs() < (b.r_star - cfg.belief).abs());
        if closer {
            best = Some(BestResponse { r_star: r, value: v });
        }
    }
    best.expect("grid is non-empty")
}

/// Draws a configuration for the verdict search: `K` in `2..=4`, a random
/// interior `pi`, `eta` up to `0.49` (WSU-UX: up to `gamma / 2K`), and
/// opponent reports that are `0` or `1` two times in three.
pub fn random_config<R: Rng + ?Sized>(algo: AuditAlgo, conditioning: Conditioning, rng: &mut R) -> AuditConfig {
    let k = rng.random_range(2..=4usize);
    let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let pi = ProbVector::from_weights(&weights).expect("positive weights");
    let (eta, gamma) = if algo == AuditAlgo::WsuUx {
        let gamma = rng.random_range(0.05..0.49);
        (rng.random_range(0.1..0.99) * gamma / (2.0 * k as f64), gamma)
    } else {
        (rng.random_range(0.01..0.49), 0.0)
    };
    let other_reports = (0..k - 1)
        .map(|_| match rng.random_range(0..3u8) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random::<f64>(),
        })
        .collect();
    AuditConfig {
        algo,
        pi,
        eta,
        gamma,
        other_reports,
        belief: rng.random::<f64>(),
        expert: rng.random_range(0..k),
        loss_fn: LossFn::Squared,
        conditioning,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Truthful,
    NotTruthful,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub config_index: usize,
    pub config: AuditConfig,
    pub r_star: f64,
    pub value: f64,
    pub truthful_value: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub algo: AuditAlgo,
    pub conditioning: Conditioning,
    pub base_seed: u64,
    pub n_configs: usize,
    pub grid_points: usize,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub max_deviation: f64,
    /// `|r* - belief|` per configuration, in configuration order.
    pub deviations: Vec<f64>,
    /// Configurations deviating by more than the tolerance.
    pub n_counterexamples: usize,
    /// The largest deviation, reported whenever the verdict is negative.
    pub worst: Option<Counterexample>,
}

/// Audits `n_configs` random configurations; configuration `c` is drawn from
/// the stream `Seed::new(base_seed, c)`.
pub fn ic_verdict(
    algo: AuditAlgo,
    conditioning: Conditioning,
    n_configs: usize,
    grid_points: usize,
    tolerance: f64,
    base_seed: u64,
) -> Result<VerdictReport> {
    if grid_points < 101 {
        return Err(Error::domain(format!("report grid needs at least 101 points, got {grid_points}")));
    }
    if n_configs == 0 {
        return Err(Error::domain("n_configs must be positive"));
    }
    let grid = unit_grid(grid_points);
    let results: Vec<(AuditConfig, BestResponse, f64)> = (0..n_configs)
        .into_par_iter()
        .map(|c| {
            let cfg = random_config(algo, conditioning, &mut Seed::new(base_seed, c as u64).rng());
            let br = best_response_unchecked(&cfg, &grid);
            let truthful = expected_unchecked(&cfg, cfg.belief, &mut Workspace::new(cfg.k()));
            (cfg, br, truthful)
        })
        .collect();

    let deviations: Vec<f64> = results.iter().map(|(cfg, br, _)| (br.r_star - cfg.belief).abs()).collect();
    let (worst_index, max_deviation) = deviations
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    let n_counterexamples = deviations.iter().filter(|d| **d > tolerance).count();
    let verdict = if max_deviation <= tolerance { Verdict::Truthful } else { Verdict::NotTruthful };
    let worst = (verdict == Verdict::NotTruthful).then(|| {
        let (cfg, br, truthful) = &results[worst_index];
        Counterexample {
            config_index: worst_index,
            config: cfg.clone(),
            r_star: br.r_star,
            value: br.value,
            truthful_value: *truthful,
            deviation: max_deviation,
        }
    });
    Ok(VerdictReport {
        algo,
        conditioning,
        base_seed,
        n_configs,
        grid_points,
        tolerance,
        verdict,
        max_deviation,
        deviations,
        n_counterexamples,
        worst,
    })
}
