//! WSU-UX hyperparameters and their regime classification.

use serde::{Deserialize, Serialize};

/// Which side of the lower-bound case split a parameter pair falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Violates `eta, gamma in (0, 1/2)` or `eta K / gamma <= 1/2`.
    Invalid,
    /// Valid with `eta < T^{-2/3}` or `gamma > T^{-1/3}`.
    Trivial,
    /// Valid with `eta >= T^{-2/3}` and `gamma <= T^{-1/3}` (both inclusive).
    NonTrivial,
}

impl Regime {
    pub fn is_valid(self) -> bool {
        self != Regime::Invalid
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Invalid => "invalid",
            Regime::Trivial => "trivial",
            Regime::NonTrivial => "non-trivial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub eta: f64,
    pub gamma: f64,
    pub k: usize,
    pub horizon: u64,
}

impl HyperParams {
    pub fn new(eta: f64, gamma: f64, k: usize, horizon: u64) -> Self {
        HyperParams { eta, gamma, k, horizon }
    }

    /// The WSU-UX input constraint: `eta, gamma in (0, 1/2)`, `eta K / gamma <= 1/2`.
    pub fn is_valid(&self) -> bool {
        let open_half = |x: f64| x > 0.0 && x < 0.5;
        open_half(self.eta) && open_half(self.gamma) && self.eta * self.k as f64 / self.gamma <= 0.5
    }

    pub fn regime(&self) -> Regime {
        validate_hyperparams(self.eta, self.gamma, self.k, self.horizon)
    }
}

/// Classifies `(eta, gamma)` for a `k`-arm run of length `horizon`.
///
/// Invalid is a classification, not an error.
pub fn validate_hyperparams(eta: f64, gamma: f64, k: usize, horizon: u64) -> Regime {
    assert!(k >= 2, "need at least two arms");
    assert!(horizon >= 1, "horizon must be positive");
    let p = HyperParams { eta, gamma, k, horizon };
    if !p.is_valid() {
        return Regime::Invalid;
    }
    let t = horizon as f64;
    if eta >= t.powf(-2.0 / 3.0) && gamma <= t.powf(-1.0 / 3.0) {
        Regime::NonTrivial
    } else {
        Regime::Trivial
    }
}
