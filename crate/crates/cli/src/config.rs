//! Experiment manifests: a JSON file whose fields are overridden by flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use selfish_bandit::environments::{bernoulli_sequence, lower_bound_sequence, trivial_sequence, LossModel};
use selfish_bandit::learners::LearnerKind;
use selfish_bandit::HyperParams;

use crate::error::CliError;
use crate::policy::{parse_policy, Policy, Slot};

/// Environment variable that supersedes the manifest seed.
pub const SEED_ENV: &str = "SELFISH_BANDIT_SEED";

/// A numeric value or a policy string, as written in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicySpec {
    Number(f64),
    Text(String),
}

impl PolicySpec {
    pub fn parse(&self, slot: Slot) -> Result<Policy, CliError> {
        match self {
            PolicySpec::Number(x) => parse_policy(slot, &x.to_string()),
            PolicySpec::Text(s) => parse_policy(slot, s),
        }
        .map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyPair {
    pub eta: Option<PolicySpec>,
    pub gamma: Option<PolicySpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcAuditSettings {
    pub configs: Option<usize>,
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSettings {
    pub csv: Option<PathBuf>,
    pub path_csv: Option<PathBuf>,
}

/// The manifest as read from disk; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub learners: Option<Vec<String>>,
    pub env: Option<String>,
    pub horizons: Option<Vec<u64>>,
    pub eta: Option<PolicySpec>,
    pub gamma: Option<PolicySpec>,
    /// Policies for one learner, taking precedence over `eta` / `gamma`.
    #[serde(default)]
    pub per_learner: BTreeMap<String, PolicyPair>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub parallelism: Option<usize>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub ic_audit: IcAuditSettings,
    #[serde(default)]
    pub plot: PlotSettings,
}

pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}

/// Environment selector: `lower-bound`, `trivial` or `bernoulli:p1,p2[@seed]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvSpec {
    LowerBound,
    Trivial,
    Bernoulli { p: [f64; 2], seed: u64 },
}

impl EnvSpec {
    pub fn build(&self, horizon: u64) -> Result<LossModel, CliError> {
        Ok(match *self {
            EnvSpec::LowerBound => lower_bound_sequence(horizon)?,
            EnvSpec::Trivial => trivial_sequence(horizon)?,
            EnvSpec::Bernoulli { p, seed } => bernoulli_sequence(horizon, p, seed)?,
        })
    }
}

impl FromStr for EnvSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("unknown environment {s:?}; expected lower-bound, trivial or bernoulli:p1,p2[@seed]"));
        match s.trim() {
            "lower-bound" => Ok(EnvSpec::LowerBound),
            "trivial" => Ok(EnvSpec::Trivial),
            other => {
                let body = other.strip_prefix("bernoulli:").ok_or_else(bad)?;
                let (rates, seed) = match body.split_once('@') {
                    Some((r, s)) => (r, s.trim().parse::<u64>().map_err(|_| bad())?),
                    None => (body, 0),
                };
                let (a, b) = rates.split_once(',').ok_or_else(bad)?;
                let p = [a.trim().parse::<f64>().map_err(|_| bad())?, b.trim().parse::<f64>().map_err(|_| bad())?];
                if !p.iter().all(|x| (0.0..=1.0).contains(x)) {
                    return Err(bad());
                }
                Ok(EnvSpec::Bernoulli { p, seed })
            }
        }
    }
}

impl fmt::Display for EnvSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvSpec::LowerBound => f.write_str("lower-bound"),
            EnvSpec::Trivial => f.write_str("trivial"),
            EnvSpec::Bernoulli { p, seed } => write!(f, "bernoulli:{},{}@{seed}", p[0], p[1]),
        }
    }
}

/// Flag values; `None` and empty lists defer to the manifest.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub learners: Vec<String>,
    pub env: Option<String>,
    pub horizons: Vec<u64>,
    pub eta: Option<String>,
    pub gamma: Option<String>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub parallelism: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub configs: Option<usize>,
    pub grid: Option<usize>,
    pub csv: Option<PathBuf>,
    pub path_csv: Option<PathBuf>,
}

pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_HORIZONS: [u64; 4] = [1 << 12, 1 << 14, 1 << 16, 1 << 18];
pub const DEFAULT_AUDIT_CONFIGS: usize = 200;
pub const DEFAULT_AUDIT_GRID: usize = 1001;
/// Every environment in the lab has two arms.
pub const ARMS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerPolicy {
    pub learner: LearnerKind,
    pub eta: Policy,
    pub gamma: Policy,
}

impl LearnerPolicy {
    pub fn resolve(&self, horizon: u64) -> HyperParams {
        HyperParams::new(
            self.eta.resolve(Slot::Eta, ARMS, horizon),
            self.gamma.resolve(Slot::Gamma, ARMS, horizon),
            ARMS,
            horizon,
        )
    }
}

/// A manifest after flags, the seed variable and defaults are applied.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub learners: Vec<LearnerPolicy>,
    pub env: EnvSpec,
    pub horizons: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    pub parallelism: usize,
    pub out_dir: PathBuf,
    pub audit_configs: usize,
    pub audit_grid: usize,
    pub csv: Option<PathBuf>,
    pub path_csv: Option<PathBuf>,
}

/// Policies used when neither the manifest nor the flags name one.
pub fn default_policy(learner: LearnerKind) -> (Policy, Policy) {
    let two_thirds = Policy::Power { coef: 1.0, exponent: -2.0 / 3.0 };
    let third = Policy::Power { coef: 1.0, exponent: -1.0 / 3.0 };
    match learner {
        LearnerKind::WsuUx => (two_thirds, third),
        LearnerKind::Exp3 => (Policy::Exp3Default, Policy::Exp3Default),
        _ => (Policy::Power { coef: 1.0, exponent: -0.5 }, Policy::Fixed(0.0)),
    }
}

/// Precedence: flags, then `SELFISH_BANDIT_SEED` (seed only), then the
/// manifest, then defaults.
pub fn resolve(file: &ConfigFile, flags: &Overrides, seed_env: Option<&str>) -> Result<Resolved, CliError> {
    let learner_names: Vec<String> = if !flags.learners.is_empty() {
        flags.learners.clone()
    } else {
        file.learners.clone().unwrap_or_else(|| vec!["wsu-ux".into()])
    };
    let flag_eta = flags.eta.as_ref().map(|s| PolicySpec::Text(s.clone()));
    let flag_gamma = flags.gamma.as_ref().map(|s| PolicySpec::Text(s.clone()));
    for name in file.per_learner.keys() {
        name.parse::<LearnerKind>()?;
    }
    let mut learners = Vec::new();
    for name in &learner_names {
        let learner: LearnerKind = name.parse()?;
        if learners.iter().any(|l: &LearnerPolicy| l.learner == learner) {
            continue;
        }
        let (default_eta, default_gamma) = default_policy(learner);
        let own = file.per_learner.get(learner.name());
        let pick = |flag: &Option<PolicySpec>, own: Option<&PolicySpec>, global: &Option<PolicySpec>, slot, default| {
            match flag.as_ref().or(own).or(global.as_ref()) {
                Some(spec) => spec.parse(slot),
                None => Ok(default),
            }
        };
        let eta = pick(&flag_eta, own.and_then(|p| p.eta.as_ref()), &file.eta, Slot::Eta, default_eta)?;
        let gamma = pick(&flag_gamma, own.and_then(|p| p.gamma.as_ref()), &file.gamma, Slot::Gamma, default_gamma)?;
        learners.push(LearnerPolicy { learner, eta, gamma });
    }

    let env: EnvSpec = flags.env.as_deref().or(file.env.as_deref()).unwrap_or("lower-bound").parse()?;
    let horizons = if !flags.horizons.is_empty() {
        flags.horizons.clone()
    } else {
        file.horizons.clone().unwrap_or_else(|| DEFAULT_HORIZONS.to_vec())
    };
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(CliError::Usage("horizons must be a non-empty list of positive integers".into()));
    }
    let env_seed = match seed_env {
        Some(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got {s:?}")))?,
        ),
        None => None,
    };
    let trials = flags.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    let parallelism = flags.parallelism.or(file.parallelism).unwrap_or(1);
    if parallelism == 0 {
        return Err(CliError::Usage("parallelism must be at least 1".into()));
    }
    Ok(Resolved {
        learners,
        env,
        horizons,
        trials,
        seed: flags.seed.or(env_seed).or(file.seed).unwrap_or(DEFAULT_SEED),
        parallelism,
        out_dir: flags.out_dir.clone().or_else(|| file.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out")),
        audit_configs: flags.configs.or(file.ic_audit.configs).unwrap_or(DEFAULT_AUDIT_CONFIGS),
        audit_grid: flags.grid.or(file.ic_audit.grid).unwrap_or(DEFAULT_AUDIT_GRID),
        csv: flags.csv.clone().or_else(|| file.plot.csv.clone()),
        path_csv: flags.path_csv.clone().or_else(|| file.plot.path_csv.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip_and_defaults() {
        let file = parse_config(
            r#"{"learners": ["wsu-ux", "exp3"], "horizons": [4096, 16384], "eta": "eta=T^-2/3",
                "gamma": "gamma=T^-1/3", "per_learner": {"exp3": {"eta": "exp3-default", "gamma": 0}},
                "trials": 10, "seed": 5}"#,
        )
        .unwrap();
        let r = resolve(&file, &Overrides::default(), None).unwrap();
        assert_eq!(r.learners.len(), 2);
        assert_eq!(r.learners[1].eta, Policy::Exp3Default);
        assert_eq!(r.learners[1].gamma, Policy::Fixed(0.0));
        assert_eq!(r.learners[0].eta, Policy::Power { coef: 1.0, exponent: -2.0 / 3.0 });
        assert_eq!((r.trials, r.seed, r.parallelism), (10, 5, 1));
        assert_eq!(r.env, EnvSpec::LowerBound);
    }

    #[test]
    fn precedence() {
        let file = parse_config(r#"{"seed": 5, "trials": 10, "eta": 0.01}"#).unwrap();
        let r = resolve(&file, &Overrides::default(), Some("9")).unwrap();
        assert_eq!(r.seed, 9);
        let flags = Overrides { seed: Some(11), trials: Some(3), eta: Some("0.02".into()), ..Overrides::default() };
        let r = resolve(&file, &flags, Some("9")).unwrap();
        assert_eq!((r.seed, r.trials), (11, 3));
        assert_eq!(r.learners[0].eta, Policy::Fixed(0.02));
        assert!(resolve(&file, &Overrides::default(), Some("x")).is_err());
    }

    #[test]
    fn rejects_unknown_fields_and_names() {
        assert!(parse_config(r#"{"trails": 3}"#).is_err());
        let file = parse_config(r#"{"learners": ["exp4"]}"#).unwrap();
        assert!(resolve(&file, &Overrides::default(), None).is_err());
        let file = parse_config(r#"{"per_learner": {"bogus": {}}}"#).unwrap();
        assert!(resolve(&file, &Overrides::default(), None).is_err());
    }

    #[test]
    fn env_specs() {
        assert_eq!("trivial".parse::<EnvSpec>().unwrap(), EnvSpec::Trivial);
        assert_eq!(
            "bernoulli:0.1,0.9@7".parse::<EnvSpec>().unwrap(),
            EnvSpec::Bernoulli { p: [0.1, 0.9], seed: 7 }
        );
        assert_eq!("bernoulli:0.1, 0.9".parse::<EnvSpec>().unwrap(), EnvSpec::Bernoulli { p: [0.1, 0.9], seed: 0 });
        for bad in ["bernoulli:0.1", "bernoulli:2,0", "uniform", "bernoulli:0.1,0.2@x"] {
            assert!(bad.parse::<EnvSpec>().is_err());
        }
        let spec = EnvSpec::Bernoulli { p: [0.25, 0.5], seed: 3 };
        assert_eq!(spec.to_string().parse::<EnvSpec>().unwrap(), spec);
    }
}
