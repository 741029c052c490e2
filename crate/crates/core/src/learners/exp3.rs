use rand::Rng;

use crate::error::{Error, Result};
use crate::simplex::mix_uniform_into;

use super::hedge::softmax_into;
use super::sampling::sample_index;
use super::{check_losses, RoundView, Scratch};

/// Minimax tuning `sqrt(ln K / (K T))`, used with `gamma = 0`.
pub fn exp3_default_eta(k: usize, horizon: u64) -> f64 {
    ((k as f64).ln() / (k as f64 * horizon as f64)).sqrt()
}

/// EXP3 on importance-weighted losses with optional uniform mixing.
#[derive(Debug, Clone)]
pub struct Exp3 {
    eta: f64,
    gamma: f64,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    t: u64,
    scratch: Scratch,
}

impl Exp3 {
    pub fn new(k: usize, eta: f64, gamma: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) || !(0.0..0.5).contains(&gamma) {
            return Err(Error::InvalidParams(format!("EXP3 needs eta > 0, gamma in [0, 1/2); got {eta}, {gamma}")));
        }
        Ok(Exp3 {
            eta,
            gamma,
            log_weights: vec![0.0; k],
            probs: vec![1.0 / k as f64; k],
            t: 0,
            scratch: Scratch::new(k),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn step<R: Rng + ?Sized>(&mut self, losses: &[f64], rng: &mut R) -> Result<RoundView<'_>> {
        check_losses(losses, self.probs.len())?;
        mix_uniform_into(&self.probs, self.gamma, &mut self.scratch.tilde);
        let chosen = sample_index(&self.scratch.tilde, rng.random::<f64>());
        self.finish(losses, chosen)
    }

    pub fn step_forced(&mut self, losses: &[f64], chosen: usize) -> Result<RoundView<'_>> {
        check_losses(losses, self.probs.len())?;
        mix_uniform_into(&self.probs, self.gamma, &mut self.scratch.tilde);
        self.finish(losses, chosen)
    }

    fn finish(&mut self, losses: &[f64], chosen: usize) -> Result<RoundView<'_>> {
        let s = &mut self.scratch;
        let p = s.tilde[chosen];
        if p <= 0.0 {
            return Err(Error::domain(format!("drew arm {chosen} with zero probability")));
        }
        s.prev.copy_from_slice(&self.probs);
        s.est.fill(0.0);
        s.est[chosen] = losses[chosen] / p;
        self.log_weights[chosen] -= self.eta * s.est[chosen];
        softmax_into(&mut self.log_weights, &mut self.probs);
        s.pre_min = self.probs.iter().copied().fold(f64::INFINITY, f64::min);
        s.pre_sum = self.probs.iter().sum();
        self.t += 1;
        Ok(self.scratch.view(Some(chosen)))
    }
}
