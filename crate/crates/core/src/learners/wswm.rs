//! Weighted-Score Wagering Mechanism payments and the wagering view of WSU.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::LossFn;
use crate::simplex::ProbVector;

/// Which weights the average-score term of the payment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WagerNormalization {
    /// `m_j / sum(m)`: budget-balanced for any wager total.
    #[default]
    Normalized,
    /// The raw wagers `m_j`: budget-balanced only when `sum(m) = 1`.
    Strict,
}

/// `Gamma_i = m_i (1 - l(r_i, y) + sum_j w_j l(r_j, y))`, where `w` is the
/// wager vector itself or its normalization depending on `mode`.
pub fn wswm_payments(
    reports: &[f64],
    wagers: &[f64],
    y: bool,
    loss: LossFn,
    mode: WagerNormalization,
) -> Result<Vec<f64>> {
    if reports.len() != wagers.len() {
        return Err(Error::domain("reports and wagers differ in length"));
    }
    if wagers.iter().any(|m| !m.is_finite() || *m < 0.0) {
        return Err(Error::domain("wagers must be finite and non-negative"));
    }
    if reports.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(Error::domain("reports must lie in [0, 1]"));
    }
    let losses: Vec<f64> = reports.iter().map(|&r| loss.eval(r, y)).collect();
    let total: f64 = wagers.iter().sum();
    let scale = match mode {
        WagerNormalization::Normalized if total > 0.0 => 1.0 / total,
        WagerNormalization::Normalized => 0.0,
        WagerNormalization::Strict => 1.0,
    };
    let avg: f64 = wagers.iter().zip(&losses).map(|(m, l)| m * scale * l).sum();
    Ok(wagers.iter().zip(&losses).map(|(m, l)| m * (1.0 - l + avg)).collect())
}

/// WSU as a wagering mechanism: WSWM on wagers `eta * pi` plus the constant
/// mechanism returning the remaining `(1 - eta) pi`.
pub fn wsu_as_wagering(pi: &ProbVector, reports: &[f64], y: bool, eta: f64, loss: LossFn) -> Result<ProbVector> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::InvalidParams(format!("WSU needs eta in (0, 1/2), got {eta}")));
    }
    let wagers: Vec<f64> = pi.as_slice().iter().map(|p| eta * p).collect();
    let pay = wswm_payments(reports, &wagers, y, loss, WagerNormalization::Normalized)?;
    let next = pay.iter().zip(pi.as_slice()).map(|(g, p)| g + (1.0 - eta) * p).collect();
    ProbVector::new(next)
}
