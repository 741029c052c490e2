//! Command implementations. Each returns the files it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use selfish_bandit::ic_audit::{ic_verdict, AuditAlgo, Conditioning, VerdictReport};
use selfish_bandit::learners::LearnerKind;
use selfish_bandit::params::Regime;
use selfish_bandit::simlab::{
    aggregate, bounds_summary, claim_statistics, lower_bound_combiner, lower_bound_combiner_floor,
    math_helper_checks, run_trials, scaling_fit, upper_bound_formula, AggregateStats, BoundsSummary, ClaimReport,
    MathHelperReport, ScalingFit, ScalingPoint,
};
use selfish_bandit::HyperParams;

use crate::config::{EnvSpec, LearnerPolicy, Resolved};
use crate::error::CliError;
use crate::json::to_json_string;
use crate::plot::{path_plot, regret_plot};
use crate::schema::{parse_path_csv, parse_run_csv, write_path_csv, write_run_csv, PathRow, RunRow, SCHEMA_VERSION};

pub const RUN_CSV: &str = "run.csv";
pub const PATH_CSV: &str = "pi1_path.csv";

/// Slope window for WSU-UX on the lower-bound sequence.
pub const WSU_UX_SLOPE_RANGE: (f64, f64) = (0.60, 0.80);
/// Largest slope accepted for EXP3 on the same sequence.
pub const EXP3_SLOPE_MAX: f64 = 0.60;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(path)
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    to_json_string(value).map_err(|e| CliError::Other(format!("serializing JSON: {e}")))
}

/// One learner at one horizon, with the resolved numeric parameters.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigSummary {
    pub learner: LearnerKind,
    pub horizon: u64,
    pub eta_policy: String,
    pub gamma_policy: String,
    pub eta: f64,
    pub gamma: f64,
    pub regime: Regime,
    /// Four-term upper bound; absent where it is undefined (`gamma = 0`).
    pub upper_bound: Option<f64>,
    pub stats: AggregateStats,
}

struct Experiment {
    summaries: Vec<ConfigSummary>,
    run_rows: Vec<RunRow>,
    path_rows: Vec<PathRow>,
}

fn params_for(policy: &LearnerPolicy, horizon: u64) -> Result<HyperParams, CliError> {
    let params = policy.resolve(horizon);
    policy.learner.check_params(&params)?;
    Ok(params)
}

fn experiment(cfg: &Resolved) -> Result<Experiment, CliError> {
    if cfg.trials < 2 {
        return Err(CliError::Usage(format!("at least 2 trials are needed, got {}", cfg.trials)));
    }
    // Resolve and validate everything before the first trial runs.
    let mut plan = Vec::new();
    for policy in &cfg.learners {
        for &horizon in &cfg.horizons {
            let params = params_for(policy, horizon)?;
            plan.push((policy, params, cfg.env.build(horizon)?));
        }
    }
    let mut exp = Experiment { summaries: Vec::new(), run_rows: Vec::new(), path_rows: Vec::new() };
    for (policy, params, model) in plan {
        eprintln!("{} on {} with T = {}: {} trials", policy.learner, cfg.env, params.horizon, cfg.trials);
        let trajectories = run_trials(policy.learner, &model, &params, cfg.trials, cfg.seed, cfg.parallelism)?;
        let stats = aggregate(&trajectories, cfg.seed)?;
        exp.run_rows.extend(trajectories.iter().map(RunRow::from_trajectory));
        exp.path_rows.extend(PathRow::from_stats(&stats));
        let upper = upper_bound_formula(&params);
        exp.summaries.push(ConfigSummary {
            learner: policy.learner,
            horizon: params.horizon,
            eta_policy: policy.eta.to_string(),
            gamma_policy: policy.gamma.to_string(),
            eta: params.eta,
            gamma: params.gamma,
            regime: params.regime(),
            upper_bound: upper.is_finite().then_some(upper),
            stats,
        });
    }
    Ok(exp)
}

fn write_tables(cfg: &Resolved, exp: &Experiment) -> Result<Vec<PathBuf>, CliError> {
    Ok(vec![
        write_file(&cfg.out_dir, RUN_CSV, &write_run_csv(&exp.run_rows)?)?,
        write_file(&cfg.out_dir, PATH_CSV, &write_path_csv(&exp.path_rows)?)?,
    ])
}

#[derive(Serialize)]
struct RunSummary<'a> {
    schema_version: u32,
    command: &'static str,
    env: String,
    base_seed: u64,
    trials: usize,
    configs: &'a [ConfigSummary],
}

pub fn cmd_run(cfg: &Resolved) -> Result<Vec<PathBuf>, CliError> {
    let exp = experiment(cfg)?;
    let mut files = write_tables(cfg, &exp)?;
    let summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        command: "run",
        env: cfg.env.to_string(),
        base_seed: cfg.seed,
        trials: cfg.trials,
        configs: &exp.summaries,
    };
    files.push(write_file(&cfg.out_dir, "summary.json", &json(&summary)?)?);
    for s in &exp.summaries {
        println!(
            "{} T={} eta={:.6e} gamma={:.6e}: mean pseudo-regret {:.4} (SE {:.4})",
            s.learner, s.horizon, s.eta, s.gamma, s.stats.pseudo_regret.mean, s.stats.pseudo_regret.se
        );
    }
    Ok(files)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingVerdict {
    Consistent,
    Inconsistent,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingPointSummary {
    pub horizon: u64,
    pub eta: f64,
    pub gamma: f64,
    pub mean_regret: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LearnerScaling {
    pub learner: LearnerKind,
    pub points: Vec<ScalingPointSummary>,
    pub fit: ScalingFit,
    pub expected: String,
    pub verdict: ScalingVerdict,
}

/// Judges a fitted slope against the window expected for the learner.
pub fn scaling_verdict(learner: LearnerKind, slope: f64) -> (String, ScalingVerdict) {
    let judge = |ok: bool| if ok { ScalingVerdict::Consistent } else { ScalingVerdict::Inconsistent };
    match learner {
        LearnerKind::WsuUx => (
            format!("slope in [{}, {}]", WSU_UX_SLOPE_RANGE.0, WSU_UX_SLOPE_RANGE.1),
            judge((WSU_UX_SLOPE_RANGE.0..=WSU_UX_SLOPE_RANGE.1).contains(&slope)),
        ),
        LearnerKind::Exp3 => (format!("slope <= {EXP3_SLOPE_MAX}"), judge(slope <= EXP3_SLOPE_MAX)),
        _ => ("none".into(), ScalingVerdict::NotApplicable),
    }
}

pub fn scaling_from_summaries(summaries: &[ConfigSummary]) -> Result<Vec<LearnerScaling>, CliError> {
    let mut learners: Vec<LearnerKind> = summaries.iter().map(|s| s.learner).collect();
    learners.dedup();
    learners
        .into_iter()
        .map(|learner| {
            let own: Vec<&ConfigSummary> = summaries.iter().filter(|s| s.learner == learner).collect();
            let points: Vec<ScalingPoint> = own
                .iter()
                .map(|s| ScalingPoint { horizon: s.horizon, mean_regret: s.stats.pseudo_regret.mean, stderr: s.stats.pseudo_regret.se })
                .collect();
            let fit = scaling_fit(&points)?;
            let (expected, verdict) = scaling_verdict(learner, fit.slope);
            Ok(LearnerScaling {
                learner,
                points: own
                    .iter()
                    .map(|s| ScalingPointSummary {
                        horizon: s.horizon,
                        eta: s.eta,
                        gamma: s.gamma,
                        mean_regret: s.stats.pseudo_regret.mean,
                        stderr: s.stats.pseudo_regret.se,
                    })
                    .collect(),
                fit,
                expected,
                verdict,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct ScalingReport {
    schema_version: u32,
    command: &'static str,
    env: String,
    base_seed: u64,
    trials: usize,
    learners: Vec<LearnerScaling>,
}

pub fn cmd_scaling(cfg: &Resolved) -> Result<Vec<PathBuf>, CliError> {
    let mut horizons = cfg.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    if horizons.len() < 3 {
        return Err(CliError::Usage(format!("scaling needs at least 3 distinct horizons, got {}", horizons.len())));
    }
    let exp = experiment(&Resolved { horizons, ..cfg.clone() })?;
    let learners = scaling_from_summaries(&exp.summaries)?;
    let mut files = write_tables(cfg, &exp)?;
    for l in &learners {
        println!("{}: slope {:.4} (R^2 {:.4}), expected {}: {:?}", l.learner, l.fit.slope, l.fit.r_squared, l.expected, l.verdict);
    }
    let report = ScalingReport {
        schema_version: SCHEMA_VERSION,
        command: "scaling",
        env: cfg.env.to_string(),
        base_seed: cfg.seed,
        trials: cfg.trials,
        learners,
    };
    files.push(write_file(&cfg.out_dir, "scaling.json", &json(&report)?)?);
    Ok(files)
}

#[derive(Serialize)]
struct LearnerClaims {
    learner: LearnerKind,
    report: ClaimReport,
}

#[derive(Serialize)]
struct ClaimsOutput {
    schema_version: u32,
    command: &'static str,
    base_seed: u64,
    trials: usize,
    reports: Vec<LearnerClaims>,
}

pub fn cmd_claims(cfg: &Resolved) -> Result<Vec<PathBuf>, CliError> {
    if cfg.env != EnvSpec::LowerBound {
        return Err(CliError::Usage("claims are defined on the lower-bound sequence only".into()));
    }
    for policy in &cfg.learners {
        for &horizon in &cfg.horizons {
            let params = params_for(policy, horizon)?;
            if params.regime() != Regime::NonTrivial {
                return Err(selfish_bandit::Error::RegimeMismatch(format!(
                    "{} at T = {horizon} resolves to {} parameters",
                    policy.learner,
                    params.regime()
                ))
                .into());
            }
            selfish_bandit::environments::derived_quantities(&params)?;
        }
    }
    let exp = experiment(cfg)?;
    let mut reports = Vec::new();
    for s in &exp.summaries {
        let r = claim_statistics(&s.stats)?;
        println!(
            "{} T={}: claim1 {:.4} (target {:.4}), claim2 {:.4e} (target {:.4e}), claim3 {:.4e} (target {:.4e}), e2 {:.3}, recovered {:.3}",
            s.learner,
            s.horizon,
            r.claim1.statistic.mean,
            r.claim1.paper_target,
            r.claim2.statistic.mean,
            r.claim2.paper_target,
            r.claim3.statistic.mean,
            r.claim3.paper_target,
            r.e2.frequency.freq,
            r.recovered.frequency.freq
        );
        reports.push(LearnerClaims { learner: s.learner, report: r });
    }
    let mut files = write_tables(cfg, &exp)?;
    let out = ClaimsOutput { schema_version: SCHEMA_VERSION, command: "claims", base_seed: cfg.seed, trials: cfg.trials, reports };
    files.push(write_file(&cfg.out_dir, "claims.json", &json(&out)?)?);
    Ok(files)
}

#[derive(Serialize)]
struct AuditOutput {
    schema_version: u32,
    command: &'static str,
    base_seed: u64,
    verdicts: Vec<VerdictReport>,
}

/// Audited (rule, conditioning) pairs, in report order.
pub const AUDIT_PLAN: [(AuditAlgo, Conditioning); 5] = [
    (AuditAlgo::Wsu, Conditioning::ConditionalOnSelected),
    (AuditAlgo::WsuUx, Conditioning::ConditionalOnSelected),
    (AuditAlgo::WsuUx, Conditioning::Unconditional),
    (AuditAlgo::HedgeNormalized, Conditioning::ConditionalOnSelected),
    (AuditAlgo::MwuNormalized, Conditioning::ConditionalOnSelected),
];

pub fn cmd_ic_audit(cfg: &Resolved) -> Result<Vec<PathBuf>, CliError> {
    if cfg.audit_grid < 101 {
        return Err(CliError::Usage(format!("the report grid needs at least 101 points, got {}", cfg.audit_grid)));
    }
    let tolerance = 1.0 / (cfg.audit_grid - 1) as f64;
    let mut verdicts = Vec::new();
    for (algo, cond) in AUDIT_PLAN {
        let v = ic_verdict(algo, cond, cfg.audit_configs, cfg.audit_grid, tolerance, cfg.seed)?;
        println!("{algo} ({cond:?}): {:?}, max |r* - b| = {:.4}", v.verdict, v.max_deviation);
        verdicts.push(v);
    }
    let out = AuditOutput { schema_version: SCHEMA_VERSION, command: "ic-audit", base_seed: cfg.seed, verdicts };
    Ok(vec![write_file(&cfg.out_dir, "ic_audit.json", &json(&out)?)?])
}

/// The constants `(c1, c2, c3)` the lower-bound argument combines.
pub fn lower_bound_constants() -> [f64; 3] {
    [(5.0f64 / 4.0).ln(), 1.0 / 6400.0, 9.0 / 400.0]
}

#[derive(Serialize)]
struct BoundsEntry {
    learner: LearnerKind,
    eta_policy: String,
    gamma_policy: String,
    regime: Regime,
    bounds: BoundsSummary,
    combiner_constants: [f64; 3],
    combiner_value: f64,
    combiner_floor: f64,
}

#[derive(Serialize)]
struct BoundsOutput {
    schema_version: u32,
    command: &'static str,
    entries: Vec<BoundsEntry>,
    math_helpers: MathHelperReport,
}

pub fn cmd_bounds(cfg: &Resolved) -> Result<Vec<PathBuf>, CliError> {
    let c = lower_bound_constants();
    let mut entries = Vec::new();
    for policy in &cfg.learners {
        for &horizon in &cfg.horizons {
            let params = policy.resolve(horizon);
            let bounds = bounds_summary(&params);
            println!(
                "{} T={}: upper bound {:.4e}, tuned closed form {:.4e}",
                policy.learner, horizon, bounds.upper_bound, bounds.tuned_upper_bound
            );
            entries.push(BoundsEntry {
                learner: policy.learner,
                eta_policy: policy.eta.to_string(),
                gamma_policy: policy.gamma.to_string(),
                regime: params.regime(),
                bounds,
                combiner_constants: c,
                combiner_value: lower_bound_combiner(c, &params),
                combiner_floor: lower_bound_combiner_floor(c, params.k, horizon),
            });
        }
    }
    let out = BoundsOutput { schema_version: SCHEMA_VERSION, command: "bounds", entries, math_helpers: math_helper_checks() };
    Ok(vec![write_file(&cfg.out_dir, "bounds.json", &json(&out)?)?])
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

pub fn cmd_plot(cfg: &Resolved) -> Result<Vec<PathBuf>, CliError> {
    let csv_path = cfg.csv.clone().unwrap_or_else(|| cfg.out_dir.join(RUN_CSV));
    let rows = parse_run_csv(&read(&csv_path)?)?;
    let mut files = vec![write_file(&cfg.out_dir, "regret_vs_T.svg", &regret_plot(&rows)?)?];
    let path_csv = match &cfg.path_csv {
        Some(p) => Some(p.clone()),
        None => {
            let sibling = csv_path.with_file_name(PATH_CSV);
            sibling.exists().then_some(sibling)
        }
    };
    if let Some(p) = path_csv {
        let rows = parse_path_csv(&read(&p)?)?;
        files.push(write_file(&cfg.out_dir, "pi1_path.svg", &path_plot(&rows)?)?);
    }
    Ok(files)
}
