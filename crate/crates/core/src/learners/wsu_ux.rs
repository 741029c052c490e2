use rand::Rng;

use crate::error::{Error, Result};
use crate::params::HyperParams;
use crate::simplex::{min_and_sum, mix_uniform_into, repair_in_place, ProbVector};

use super::sampling::sample_index;
use super::wsu::apply_wsu;
use super::{check_losses, RoundView, Scratch};

/// Smallest selection probability accepted as an importance weight.
const MIN_SELECTION_PROB: f64 = 1e-15;

/// Importance-weighted loss estimate: `loss / pi_tilde[chosen]` at `chosen`,
/// zero elsewhere.
pub fn estimate_losses(chosen: usize, loss_value: f64, pi_tilde: &ProbVector) -> Result<Vec<f64>> {
    let mut out = vec![0.0; pi_tilde.len()];
    estimate_into(chosen, loss_value, pi_tilde.as_slice(), &mut out)?;
    Ok(out)
}

#[inline]
fn estimate_into(chosen: usize, loss_value: f64, pi_tilde: &[f64], out: &mut [f64]) -> Result<()> {
    let p = *pi_tilde
        .get(chosen)
        .ok_or_else(|| Error::domain(format!("arm {chosen} out of range")))?;
    if p < MIN_SELECTION_PROB {
        return Err(Error::domain(format!("selection probability {p:e} too small to importance-weight")));
    }
    out.fill(0.0);
    out[chosen] = loss_value / p;
    Ok(())
}

/// WSU with uniform exploration.
///
/// Each round: mix `pi_t` with the uniform distribution, draw `I_t`, build
/// the importance-weighted estimate of the drawn arm's loss, and apply the
/// WSU multiplier step to the estimates.
#[derive(Debug, Clone)]
pub struct WsuUx {
    params: HyperParams,
    pi: Vec<f64>,
    t: u64,
    scratch: Scratch,
}

impl WsuUx {
    pub fn new(params: HyperParams) -> Result<Self> {
        Self::from_probs(params, ProbVector::uniform(params.k))
    }

    /// Starts from an arbitrary `pi` (used by the exact enumeration checks).
    pub fn from_probs(params: HyperParams, pi: ProbVector) -> Result<Self> {
        if !params.is_valid() {
            return Err(Error::InvalidParams(format!(
                "WSU-UX needs eta, gamma in (0, 1/2) and eta K / gamma <= 1/2, got eta = {}, gamma = {}, K = {}",
                params.eta, params.gamma, params.k
            )));
        }
        if pi.len() != params.k {
            return Err(Error::domain("pi length differs from K"));
        }
        Ok(WsuUx { params, pi: pi.into_inner(), t: 0, scratch: Scratch::new(params.k) })
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn probs(&self) -> &[f64] {
        &self.pi
    }

    pub fn round(&self) -> u64 {
        self.t
    }

    /// The distribution `I_t` would be drawn from this round.
    pub fn mixed(&self) -> ProbVector {
        let mut out = vec![0.0; self.pi.len()];
        mix_uniform_into(&self.pi, self.params.gamma, &mut out);
        ProbVector::new(out).expect("mixing preserves the simplex")
    }

    pub fn step<R: Rng + ?Sized>(&mut self, losses: &[f64], rng: &mut R) -> Result<RoundView<'_>> {
        check_losses(losses, self.pi.len())?;
        mix_uniform_into(&self.pi, self.params.gamma, &mut self.scratch.tilde);
        let chosen = sample_index(&self.scratch.tilde, rng.random::<f64>());
        self.finish(losses, chosen)
    }

    pub fn step_forced(&mut self, losses: &[f64], chosen: usize) -> Result<RoundView<'_>> {
        check_losses(losses, self.pi.len())?;
        mix_uniform_into(&self.pi, self.params.gamma, &mut self.scratch.tilde);
        self.finish(losses, chosen)
    }

    #[inline]
    fn finish(&mut self, losses: &[f64], chosen: usize) -> Result<RoundView<'_>> {
        let s = &mut self.scratch;
        estimate_into(chosen, losses[chosen], &s.tilde, &mut s.est)?;
        s.prev.copy_from_slice(&self.pi);
        #[cfg(debug_assertions)]
        {
            let eta = self.params.eta;
            let avg: f64 = s.prev.iter().zip(&s.est).map(|(p, l)| p * l).sum();
            for l in &s.est {
                let m = 1.0 - eta * (l - avg);
                debug_assert!((0.5..=2.0).contains(&m), "WSU-UX multiplier {m} outside [1/2, 2]");
            }
        }
        apply_wsu(&mut self.pi, &s.est, self.params.eta);
        (s.pre_min, s.pre_sum) = min_and_sum(&self.pi);
        repair_in_place(&mut self.pi)?;
        self.t += 1;
        Ok(self.scratch.view(Some(chosen)))
    }
}
