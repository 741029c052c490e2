use crate::error::{Error, Result};

use super::{check_losses, RoundView, Scratch};

/// Linear weights are rescaled to sum one every this many updates.
pub const MWU_RENORMALIZE_EVERY: u64 = 1024;

/// Multiplicative weights: `w_{t+1,i} = w_{t,i} (1 - eta l_{t,i})`.
#[derive(Debug, Clone)]
pub struct Mwu {
    eta: f64,
    weights: Vec<f64>,
    probs: Vec<f64>,
    t: u64,
    scratch: Scratch,
}

impl Mwu {
    pub fn new(k: usize, eta: f64) -> Self {
        Self::from_weights(&vec![1.0 / k as f64; k], eta)
    }

    pub fn from_weights(weights: &[f64], eta: f64) -> Self {
        assert!(weights.iter().all(|&w| w > 0.0), "MWU weights must be positive");
        let k = weights.len();
        let mut m = Mwu { eta, weights: weights.to_vec(), probs: vec![0.0; k], t: 0, scratch: Scratch::new(k) };
        m.recompute_probs();
        m
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn round(&self) -> u64 {
        self.t
    }

    fn recompute_probs(&mut self) {
        let total: f64 = self.weights.iter().sum();
        for (p, w) in self.probs.iter_mut().zip(&self.weights) {
            *p = w / total;
        }
    }

    pub fn update(&mut self, losses: &[f64]) -> Result<()> {
        check_losses(losses, self.weights.len())?;
        if losses.iter().any(|l| self.eta * l >= 1.0) {
            return Err(Error::domain("MWU requires eta * loss < 1"));
        }
        for (w, l) in self.weights.iter_mut().zip(losses) {
            *w *= 1.0 - self.eta * l;
        }
        self.t += 1;
        self.recompute_probs();
        if self.t.is_multiple_of(MWU_RENORMALIZE_EVERY) {
            self.weights.copy_from_slice(&self.probs);
        }
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

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let mut m = Mwu::from_weights(&[0.5, 0.5], 0.5);
        m.update(&[1.0, 0.0]).unwrap();
        assert!((m.probs()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.probs()[1] - 2.0 / 3.0).abs() < 1e-15);

        let mut m = Mwu::from_weights(&[0.2, 0.8], 0.3);
        m.update(&[0.4, 0.4]).unwrap();
        assert!((m.probs()[0] - 0.2).abs() < 1e-15);
        m.update(&[0.0, 0.0]).unwrap();
        assert!((m.probs()[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_eta_loss_of_one() {
        let mut m = Mwu::new(2, 1.0);
        assert!(m.update(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn periodic_renormalization_keeps_weights_finite() {
        let mut m = Mwu::new(2, 0.9);
        for _ in 0..5000 {
            m.update(&[1.0, 0.5]).unwrap();
        }
        assert!(m.weights().iter().all(|w| w.is_finite()));
        assert!(m.probs()[1] > 0.999);
    }

    proptest! {
        #[test]
        fn scale_invariance(
            w in prop::collection::vec(0.01f64..10.0, 2..6),
            c in 0.001f64..1000.0,
            eta in 0.01f64..0.99,
            seed_losses in prop::collection::vec(0.0f64..=1.0, 6),
        ) {
            let losses = &seed_losses[..w.len()];
            let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
            let mut a = Mwu::from_weights(&w, eta);
            let mut b = Mwu::from_weights(&scaled, eta);
            a.update(losses).unwrap();
            b.update(losses).unwrap();
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
