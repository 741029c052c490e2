//! Sequential update rules behind one stepping interface.
//!
//! Full-information learners (Hedge, MWU, WSU) see the whole loss row each
//! round. Bandit learners (WSU-UX, EXP3) draw an arm from the mixed
//! distribution and only see that arm's loss, through an importance-weighted
//! estimate.
//!
//! Stepping never allocates: every learner owns scratch buffers and returns a
//! [`RoundView`] borrowing them. [`RoundView::to_record`] produces an owned
//! [`RoundRecord`] when one is needed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::HyperParams;
use crate::simplex::ProbVector;

mod exp3;
mod hedge;
mod mwu;
mod sampling;
mod wsu;
mod wsu_ux;
mod wswm;

pub use exp3::{exp3_default_eta, Exp3};
pub use hedge::Hedge;
pub use mwu::{Mwu, MWU_RENORMALIZE_EVERY};
pub use sampling::sample_index;
pub(crate) use wsu::apply_wsu;
pub use wsu::{wsu_update, Wsu};
pub use wsu_ux::{estimate_losses, WsuUx};
pub use wswm::{wsu_as_wagering, wswm_payments, WagerNormalization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LearnerKind {
    #[serde(rename = "hedge")]
    Hedge,
    #[serde(rename = "mwu")]
    Mwu,
    #[serde(rename = "wsu")]
    Wsu,
    #[serde(rename = "wsu-ux")]
    WsuUx,
    #[serde(rename = "exp3")]
    Exp3,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 5] =
        [LearnerKind::Hedge, LearnerKind::Mwu, LearnerKind::Wsu, LearnerKind::WsuUx, LearnerKind::Exp3];

    pub fn is_bandit(self) -> bool {
        matches!(self, LearnerKind::WsuUx | LearnerKind::Exp3)
    }

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Hedge => "hedge",
            LearnerKind::Mwu => "mwu",
            LearnerKind::Wsu => "wsu",
            LearnerKind::WsuUx => "wsu-ux",
            LearnerKind::Exp3 => "exp3",
        }
    }

    /// Checks that `params` are usable by this learner.
    pub fn check_params(self, p: &HyperParams) -> Result<()> {
        if p.k < 2 {
            return Err(Error::InvalidParams(format!("k = {} < 2", p.k)));
        }
        let ok = match self {
            LearnerKind::WsuUx => p.is_valid(),
            LearnerKind::Exp3 => p.eta > 0.0 && p.eta.is_finite() && (0.0..0.5).contains(&p.gamma),
            LearnerKind::Wsu => p.eta > 0.0 && p.eta < 0.5,
            LearnerKind::Mwu => p.eta > 0.0 && p.eta < 1.0,
            LearnerKind::Hedge => p.eta > 0.0 && p.eta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "{}: eta = {}, gamma = {}, k = {}",
                self.name(),
                p.eta,
                p.gamma,
                p.k
            )))
        }
    }
}

impl std::fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hedge" => Ok(LearnerKind::Hedge),
            "mwu" => Ok(LearnerKind::Mwu),
            "wsu" => Ok(LearnerKind::Wsu),
            "wsu-ux" | "wsu_ux" | "wsuux" => Ok(LearnerKind::WsuUx),
            "exp3" => Ok(LearnerKind::Exp3),
            other => Err(Error::domain(format!("unknown learner '{other}'"))),
        }
    }
}

/// Borrowed view of the round that was just played.
#[derive(Debug, Clone, Copy)]
pub struct RoundView<'a> {
    /// Drawn arm; `None` for full-information learners.
    pub chosen: Option<usize>,
    /// `pi_t`, the distribution before the update.
    pub pi_before: &'a [f64],
    /// The distribution the arm was drawn from (equals `pi_before` under full information).
    pub pi_tilde: &'a [f64],
    /// Loss estimates fed to the update (true losses under full information).
    pub est_losses: &'a [f64],
    /// Minimum entry of `pi_{t+1}` before simplex repair.
    pub pre_repair_min: f64,
    /// Sum of `pi_{t+1}` before simplex repair.
    pub pre_repair_sum: f64,
}

impl RoundView<'_> {
    pub fn to_record(&self, t: u64, true_losses: &[f64]) -> RoundRecord {
        RoundRecord {
            t,
            chosen: self.chosen,
            pi_before: ProbVector::new(self.pi_before.to_vec()).expect("pi_before is on the simplex"),
            pi_tilde: ProbVector::new(self.pi_tilde.to_vec()).expect("pi_tilde is on the simplex"),
            est_losses: self.est_losses.to_vec(),
            true_losses: true_losses.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: u64,
    pub chosen: Option<usize>,
    pub pi_before: ProbVector,
    pub pi_tilde: ProbVector,
    pub est_losses: Vec<f64>,
    pub true_losses: Vec<f64>,
}

/// Scratch buffers a learner hands out through [`RoundView`].
#[derive(Debug, Clone)]
pub(crate) struct Scratch {
    pub prev: Vec<f64>,
    pub tilde: Vec<f64>,
    pub est: Vec<f64>,
    pub pre_min: f64,
    pub pre_sum: f64,
}

impl Scratch {
    pub fn new(k: usize) -> Self {
        Scratch { prev: vec![0.0; k], tilde: vec![0.0; k], est: vec![0.0; k], pre_min: 0.0, pre_sum: 1.0 }
    }

    pub fn view(&self, chosen: Option<usize>) -> RoundView<'_> {
        RoundView {
            chosen,
            pi_before: &self.prev,
            pi_tilde: &self.tilde,
            est_losses: &self.est,
            pre_repair_min: self.pre_min,
            pre_repair_sum: self.pre_sum,
        }
    }
}

pub(crate) fn check_losses(losses: &[f64], k: usize) -> Result<()> {
    if losses.len() != k {
        return Err(Error::domain(format!("expected {k} losses, got {}", losses.len())));
    }
    if losses.iter().any(|l| !(0.0..=1.0).contains(l)) {
        return Err(Error::domain("losses must lie in [0, 1]"));
    }
    Ok(())
}

/// A learner of any kind, stepped through one interface.
#[derive(Debug, Clone)]
pub enum LearnerState {
    Hedge(Hedge),
    Mwu(Mwu),
    Wsu(Wsu),
    WsuUx(WsuUx),
    Exp3(Exp3),
}

impl LearnerState {
    /// Starts `kind` at the uniform distribution.
    pub fn new(kind: LearnerKind, params: &HyperParams) -> Result<Self> {
        kind.check_params(params)?;
        let k = params.k;
        Ok(match kind {
            LearnerKind::Hedge => LearnerState::Hedge(Hedge::new(k, params.eta)),
            LearnerKind::Mwu => LearnerState::Mwu(Mwu::new(k, params.eta)),
            LearnerKind::Wsu => LearnerState::Wsu(Wsu::new(k, params.eta)),
            LearnerKind::WsuUx => LearnerState::WsuUx(WsuUx::new(*params)?),
            LearnerKind::Exp3 => LearnerState::Exp3(Exp3::new(k, params.eta, params.gamma)?),
        })
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            LearnerState::Hedge(_) => LearnerKind::Hedge,
            LearnerState::Mwu(_) => LearnerKind::Mwu,
            LearnerState::Wsu(_) => LearnerKind::Wsu,
            LearnerState::WsuUx(_) => LearnerKind::WsuUx,
            LearnerState::Exp3(_) => LearnerKind::Exp3,
        }
    }

    /// Current `pi_t` (normalized weights for weight-based learners).
    pub fn probs(&self) -> &[f64] {
        match self {
            LearnerState::Hedge(l) => l.probs(),
            LearnerState::Mwu(l) => l.probs(),
            LearnerState::Wsu(l) => l.probs(),
            LearnerState::WsuUx(l) => l.probs(),
            LearnerState::Exp3(l) => l.probs(),
        }
    }

    /// Number of completed rounds.
    pub fn round(&self) -> u64 {
        match self {
            LearnerState::Hedge(l) => l.round(),
            LearnerState::Mwu(l) => l.round(),
            LearnerState::Wsu(l) => l.round(),
            LearnerState::WsuUx(l) => l.round(),
            LearnerState::Exp3(l) => l.round(),
        }
    }

    /// Plays one round against the loss row `losses`.
    pub fn step<R: Rng + ?Sized>(&mut self, losses: &[f64], rng: &mut R) -> Result<RoundView<'_>> {
        match self {
            LearnerState::Hedge(l) => l.step(losses),
            LearnerState::Mwu(l) => l.step(losses),
            LearnerState::Wsu(l) => l.step(losses),
            LearnerState::WsuUx(l) => l.step(losses, rng),
            LearnerState::Exp3(l) => l.step(losses, rng),
        }
    }

    /// Plays one round with the drawn arm forced to `chosen` (ignored by
    /// full-information learners).
    pub fn step_forced(&mut self, losses: &[f64], chosen: usize) -> Result<RoundView<'_>> {
        match self {
            LearnerState::Hedge(l) => l.step(losses),
            LearnerState::Mwu(l) => l.step(losses),
            LearnerState::Wsu(l) => l.step(losses),
            LearnerState::WsuUx(l) => l.step_forced(losses, chosen),
            LearnerState::Exp3(l) => l.step_forced(losses, chosen),
        }
    }
}
