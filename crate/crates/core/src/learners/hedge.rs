use crate::error::Result;

use super::{check_losses, RoundView, Scratch};

/// Hedge: `w_{t+1,i} = w_{t,i} exp(-eta l_{t,i})`, tracked in log space.
#[derive(Debug, Clone)]
pub struct Hedge {
    eta: f64,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    t: u64,
    scratch: Scratch,
}

impl Hedge {
    pub fn new(k: usize, eta: f64) -> Self {
        Self::from_log_weights(vec![0.0; k], eta)
    }

    /// Starts from arbitrary positive weights.
    pub fn from_weights(weights: &[f64], eta: f64) -> Self {
        assert!(weights.iter().all(|&w| w > 0.0), "Hedge weights must be positive");
        Self::from_log_weights(weights.iter().map(|w| w.ln()).collect(), eta)
    }

    fn from_log_weights(log_weights: Vec<f64>, eta: f64) -> Self {
        let k = log_weights.len();
        let mut h = Hedge { eta, log_weights, probs: vec![0.0; k], t: 0, scratch: Scratch::new(k) };
        h.renormalize();
        h
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Log-weights, shifted so the largest is zero.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn round(&self) -> u64 {
        self.t
    }

    fn renormalize(&mut self) {
        softmax_into(&mut self.log_weights, &mut self.probs);
    }

    /// Multiplies each weight by `exp(-eta l_i)` and renormalizes.
    pub fn update(&mut self, losses: &[f64]) -> Result<()> {
        check_losses(losses, self.probs.len())?;
        for (lw, l) in self.log_weights.iter_mut().zip(losses) {
            *lw -= self.eta * l;
        }
        self.renormalize();
        self.t += 1;
        Ok(())
    }

    pub fn step(&mut self, losses: &[f64]) -> Result<RoundView<'_>> {
        self.scratch.prev.copy_from_slice(&self.probs);
        self.scratch.tilde.copy_from_slice(&self.probs);
        self.scratch.est.copy_from_slice(losses);
        self.update(losses)?;
        self.scratch.pre_min = self.probs.iter().copied().fold(f64::INFINITY, f64::min);
        self.scratch.pre_sum = self.probs.iter().sum();
        Ok(self.scratch.view(None))
    }
}

/// Shifts `log_weights` so the max is zero and writes normalized
/// probabilities into `probs`.
pub(crate) fn softmax_into(log_weights: &mut [f64], probs: &mut [f64]) {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (lw, p) in log_weights.iter_mut().zip(probs.iter_mut()) {
        *lw -= max;
        *p = lw.exp();
        total += *p;
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_losses_leave_uniform_unchanged() {
        let mut h = Hedge::new(3, 0.3);
        h.update(&[0.7, 0.7, 0.7]).unwrap();
        for p in h.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ln2_step() {
        let mut h = Hedge::from_weights(&[0.5, 0.5], std::f64::consts::LN_2);
        h.update(&[1.0, 0.0]).unwrap();
        assert!((h.probs()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((h.probs()[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_loss_is_a_no_op() {
        let mut h = Hedge::from_weights(&[0.2, 0.3, 0.5], 0.4);
        let before = h.probs().to_vec();
        h.update(&[0.0, 0.0, 0.0]).unwrap();
        for (a, b) in before.iter().zip(h.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn long_horizons_do_not_underflow() {
        let mut h = Hedge::new(2, 0.5);
        for _ in 0..100_000 {
            h.update(&[1.0, 0.0]).unwrap();
        }
        assert_eq!(h.probs()[1], 1.0);
        assert!(h.probs()[0] >= 0.0);
        h.update(&[0.0, 0.0]).unwrap();
        assert!(h.probs().iter().all(|p| p.is_finite()));
    }

    proptest! {
        #[test]
        fn scale_invariance(
            w in prop::collection::vec(0.01f64..10.0, 2..6),
            c in 0.001f64..1000.0,
            eta in 0.01f64..2.0,
            seed_losses in prop::collection::vec(0.0f64..=1.0, 6),
        ) {
            let losses = &seed_losses[..w.len()];
            let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
            let mut a = Hedge::from_weights(&w, eta);
            let mut b = Hedge::from_weights(&scaled, eta);
            a.update(losses).unwrap();
            b.update(losses).unwrap();
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
