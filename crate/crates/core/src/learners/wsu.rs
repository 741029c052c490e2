use crate::error::{Error, Result};
use crate::simplex::{min_and_sum, repair_in_place, ProbVector};

use super::{check_losses, RoundView, Scratch};

/// One WSU step: `pi_i (1 - eta (l_i - sum_j pi_j l_j))`.
///
/// The relative losses average to zero under `pi`, so the result sums to one
/// in exact arithmetic; the output is passed through simplex repair.
pub fn wsu_update(pi: &ProbVector, losses: &[f64], eta: f64) -> Result<ProbVector> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::InvalidParams(format!("WSU needs eta in (0, 1/2), got {eta}")));
    }
    check_losses(losses, pi.len())?;
    let mut next = pi.as_slice().to_vec();
    apply_wsu(&mut next, losses, eta);
    ProbVector::new(next)
}

/// In-place WSU multiplier step, no repair. `losses` may be estimates outside `[0, 1]`.
#[inline]
pub(crate) fn apply_wsu(pi: &mut [f64], losses: &[f64], eta: f64) {
    let avg: f64 = pi.iter().zip(losses).map(|(p, l)| p * l).sum();
    for (p, l) in pi.iter_mut().zip(losses) {
        *p *= 1.0 - eta * (l - avg);
    }
}

/// Full-information Weighted-Score Update learner.
#[derive(Debug, Clone)]
pub struct Wsu {
    eta: f64,
    pi: Vec<f64>,
    t: u64,
    scratch: Scratch,
}

impl Wsu {
    pub fn new(k: usize, eta: f64) -> Self {
        Self::from_probs(ProbVector::uniform(k), eta)
    }

    pub fn from_probs(pi: ProbVector, eta: f64) -> Self {
        let k = pi.len();
        Wsu { eta, pi: pi.into_inner(), t: 0, scratch: Scratch::new(k) }
    }

    pub fn probs(&self) -> &[f64] {
        &self.pi
    }

    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, losses: &[f64]) -> Result<RoundView<'_>> {
        check_losses(losses, self.pi.len())?;
        self.scratch.prev.copy_from_slice(&self.pi);
        self.scratch.tilde.copy_from_slice(&self.pi);
        self.scratch.est.copy_from_slice(losses);
        apply_wsu(&mut self.pi, losses, self.eta);
        (self.scratch.pre_min, self.scratch.pre_sum) = min_and_sum(&self.pi);
        repair_in_place(&mut self.pi)?;
        self.t += 1;
        Ok(self.scratch.view(None))
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
    fn examples() {
        let pi = pv(&[0.3, 0.7]);
        assert_eq!(wsu_update(&pi, &[0.4, 0.4], 0.2).unwrap(), pi);

        let next = wsu_update(&pv(&[0.5, 0.5]), &[1.0, 0.0], 0.4).unwrap();
        assert!((next.get(0) - 0.4).abs() < 1e-15);
        assert!((next.get(1) - 0.6).abs() < 1e-15);

        let corner = pv(&[1.0, 0.0]);
        assert_eq!(wsu_update(&corner, &[0.9, 0.1], 0.3).unwrap(), corner);
    }

    #[test]
    fn rejects_bad_eta_and_losses() {
        let pi = ProbVector::uniform(2);
        assert!(wsu_update(&pi, &[0.0, 1.0], 0.5).is_err());
        assert!(wsu_update(&pi, &[0.0, 1.5], 0.1).is_err());
        assert!(wsu_update(&pi, &[0.0], 0.1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn preserves_sum_and_positivity(
            raw in prop::collection::vec(0.001f64..1.0, 2..8),
            seed_losses in prop::collection::vec(0.0f64..=1.0, 8),
            eta in 0.0001f64..0.4999,
        ) {
            let pi = ProbVector::from_weights(&raw).unwrap();
            let losses = &seed_losses[..raw.len()];
            let mut raw_next = pi.as_slice().to_vec();
            apply_wsu(&mut raw_next, losses, eta);
            let s: f64 = raw_next.iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
            prop_assert!(raw_next.iter().all(|&x| x > 0.0));
        }
    }
}
