//! Points on the probability simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries in `[-CLAMP_FLOOR, 0)` are rounding noise and are clamped to zero.
pub const CLAMP_FLOOR: f64 = 1e-12;
/// Maximum tolerated `|sum - 1|` before repair.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Sums within this of one are left alone; dividing by them only reshuffles ulps.
const RENORMALIZE_ABOVE: f64 = 64.0 * f64::EPSILON;

/// A distribution over `K` arms: non-negative entries summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform distribution over zero arms");
        ProbVector(vec![1.0 / k as f64; k])
    }

    /// Validates and repairs `entries`; see [`simplex_repair`].
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        simplex_repair(entries)
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("empty weight vector"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::domain("weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::domain("weights sum to zero"));
        }
        simplex_repair(weights.iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// `Σ_i p_i x_i`.
    pub fn dot(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.0.len());
        self.0.iter().zip(x).map(|(p, v)| p * v).sum()
    }
}

impl AsRef<[f64]> for ProbVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Clamps rounding-level negatives to zero and renormalizes.
///
/// Vectors already summing to one up to rounding are returned unchanged.
///
/// Fails with [`Error::HardNumericDrift`] when an entry is below
/// `-CLAMP_FLOOR`, any entry is non-finite, or the sum is off by more than
/// `SUM_TOLERANCE`.
pub fn simplex_repair(mut v: Vec<f64>) -> Result<ProbVector> {
    repair_in_place(&mut v)?;
    Ok(ProbVector(v))
}

/// In-place variant of [`simplex_repair`] used on the hot path.
pub(crate) fn repair_in_place(v: &mut [f64]) -> Result<()> {
    let (min, sum) = min_and_sum(v);
    if v.is_empty() || !sum.is_finite() || min < -CLAMP_FLOOR || (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::HardNumericDrift { min, sum });
    }
    let mut total = 0.0;
    let mut clamped = false;
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
            clamped = true;
        }
        total += *x;
    }
    if clamped || (total - 1.0).abs() > RENORMALIZE_ABOVE {
        for x in v.iter_mut() {
            *x /= total;
        }
    }
    Ok(())
}

pub(crate) fn min_and_sum(v: &[f64]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut sum = 0.0;
    for &x in v {
        if x.is_nan() {
            return (f64::NAN, f64::NAN);
        }
        min = min.min(x);
        sum += x;
    }
    (min, sum)
}

/// `(1 - gamma) pi_i + gamma / K`: every entry is floored at `gamma / K`.
pub fn mix_uniform(pi: &ProbVector, gamma: f64) -> ProbVector {
    let mut out = vec![0.0; pi.len()];
    mix_uniform_into(pi.as_slice(), gamma, &mut out);
    ProbVector(out)
}

#[inline]
pub(crate) fn mix_uniform_into(pi: &[f64], gamma: f64, out: &mut [f64]) {
    debug_assert!((0.0..0.5).contains(&gamma));
    let floor = gamma / pi.len() as f64;
    for (o, p) in out.iter_mut().zip(pi) {
        *o = (1.0 - gamma) * p + floor;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn mix_uniform_examples() {
        assert_eq!(mix_uniform(&pv(&[0.5, 0.5]), 0.2).as_slice(), &[0.5, 0.5]);
        let m = mix_uniform(&pv(&[1.0, 0.0]), 0.2);
        assert!((m.get(0) - 0.9).abs() < 1e-15 && (m.get(1) - 0.1).abs() < 1e-15);
        assert_eq!(mix_uniform(&pv(&[0.25, 0.75]), 0.0).as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn repair_examples() {
        assert_eq!(simplex_repair(vec![0.3, 0.7]).unwrap().as_slice(), &[0.3, 0.7]);
        let r = simplex_repair(vec![-1e-13, 1.0 + 1e-13]).unwrap();
        assert_eq!(r.as_slice(), &[0.0, 1.0]);
        assert!(matches!(
            simplex_repair(vec![-1e-6, 1.000001]),
            Err(Error::HardNumericDrift { .. })
        ));
    }

    #[test]
    fn repair_rejects_sum_drift_and_nan() {
        assert!(simplex_repair(vec![0.5, 0.5 + 1e-8]).is_err());
        assert!(simplex_repair(vec![f64::NAN, 1.0]).is_err());
        assert!(simplex_repair(vec![]).is_err());
    }

    proptest! {
        #[test]
        fn mix_preserves_simplex_and_floor(
            raw in prop::collection::vec(0.0f64..1.0, 2..8),
            gamma in 0.0f64..0.5,
        ) {
            prop_assume!(raw.iter().sum::<f64>() > 1e-6);
            let pi = ProbVector::from_weights(&raw).unwrap();
            let m = mix_uniform(&pi, gamma);
            let s: f64 = m.as_slice().iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
            let floor = gamma / pi.len() as f64;
            prop_assert!(m.as_slice().iter().all(|&x| x >= floor - 1e-15));
        }
    }
}
