use serde::{Deserialize, Serialize};

use crate::params::HyperParams;

/// `gamma T + eta K T / gamma + ln K / eta + 2 eta K T`. Infinite for `gamma = 0`.
pub fn upper_bound_formula(params: &HyperParams) -> f64 {
    let (eta, gamma) = (params.eta, params.gamma);
    let (k, t) = (params.k as f64, params.horizon as f64);
    gamma * t + eta * k * t / gamma + k.ln() / eta + 2.0 * eta * k * t
}

/// `2 (4T)^{2/3} (K ln K)^{1/3}`.
pub fn tuned_upper_bound(k: usize, horizon: u64) -> f64 {
    let (k, t) = (k as f64, horizon as f64);
    2.0 * (4.0 * t).powf(2.0 / 3.0) * (k * k.ln()).cbrt()
}

/// `gamma = (K ln K / T)^{1/3}`, `eta = sqrt(gamma ln K / (K T))`.
///
/// Balances the first three terms of [`upper_bound_formula`] at
/// `(K ln K)^{1/3} T^{2/3}` each, which keeps the four-term bound under
/// [`tuned_upper_bound`] once `T >= K ln K`. Then `eta K / gamma = gamma`.
pub fn upper_bound_tuned_params(k: usize, horizon: u64) -> (f64, f64) {
    let (kf, t) = (k as f64, horizon as f64);
    let gamma = (kf * kf.ln() / t).cbrt();
    let eta = (gamma * kf.ln() / (kf * t)).sqrt();
    (eta, gamma)
}

/// `c1/eta + c2 eta K T / gamma + c3 gamma T`.
pub fn lower_bound_combiner(c: [f64; 3], params: &HyperParams) -> f64 {
    let (eta, gamma) = (params.eta, params.gamma);
    let (k, t) = (params.k as f64, params.horizon as f64);
    c[0] / eta + c[1] * eta * k * t / gamma + c[2] * gamma * t
}

/// `3 (c1 c2 c3 K)^{1/3} T^{2/3}`.
pub fn lower_bound_combiner_floor(c: [f64; 3], k: usize, horizon: u64) -> f64 {
    3.0 * (c[0] * c[1] * c[2] * k as f64).cbrt() * (horizon as f64).powf(2.0 / 3.0)
}

/// Whether the combined lower bound dominates its `T^{2/3}` floor, with a
/// relative allowance for rounding at the minimizer.
pub fn lower_bound_combiner_check(c: [f64; 3], params: &HyperParams) -> bool {
    let floor = lower_bound_combiner_floor(c, params.k, params.horizon);
    lower_bound_combiner(c, params) >= floor * (1.0 - 1e-12)
}

/// The minimizing `(eta*, gamma*)`: `gamma* = c3^{-2/3} (c1 c2 K / T)^{1/3}`,
/// `eta* = sqrt(c1 gamma* / (c2 K T))`.
pub fn lower_bound_combiner_optimizers(c: [f64; 3], k: usize, horizon: u64) -> (f64, f64) {
    let (kf, t) = (k as f64, horizon as f64);
    let gamma = c[2].powf(-2.0 / 3.0) * (c[0] * c[1] * kf / t).cbrt();
    let eta = (c[0] * gamma / (c[1] * kf * t)).sqrt();
    (eta, gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub k: usize,
    pub horizon: u64,
    pub eta: f64,
    pub gamma: f64,
    pub upper_bound: f64,
    pub tuned_upper_bound: f64,
    pub tuned_eta: f64,
    pub tuned_gamma: f64,
    pub tuned_params_bound: f64,
}

pub fn bounds_summary(params: &HyperParams) -> BoundsSummary {
    let (tuned_eta, tuned_gamma) = upper_bound_tuned_params(params.k, params.horizon);
    BoundsSummary {
        k: params.k,
        horizon: params.horizon,
        eta: params.eta,
        gamma: params.gamma,
        upper_bound: upper_bound_formula(params),
        tuned_upper_bound: tuned_upper_bound(params.k, params.horizon),
        tuned_eta,
        tuned_gamma,
        tuned_params_bound: upper_bound_formula(&HyperParams::new(tuned_eta, tuned_gamma, params.k, params.horizon)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn upper_bound_examples() {
        let b = upper_bound_formula(&HyperParams::new(0.1, 0.1, 2, 1000));
        assert!((b - (100.0 + 2000.0 + 2f64.ln() / 0.1 + 400.0)).abs() < 1e-9);
        assert!((b - 2506.93).abs() < 5e-3);
        let tuned = tuned_upper_bound(2, 1000);
        assert!((tuned - 2.0 * 4000f64.powf(2.0 / 3.0) * (2.0 * 2f64.ln()).powf(1.0 / 3.0)).abs() < 1e-9);
        assert!(upper_bound_formula(&HyperParams::new(0.1, 0.0, 2, 1000)).is_infinite());
    }

    #[test]
    fn tuned_params_stay_under_tuned_bound() {
        for k in 2..=8usize {
            for e in 4..=24 {
                let t = 1u64 << e;
                if (t as f64) < (k as f64) * (k as f64).ln() {
                    continue;
                }
                let (eta, gamma) = upper_bound_tuned_params(k, t);
                let p = HyperParams::new(eta, gamma, k, t);
                assert!(upper_bound_formula(&p) <= tuned_upper_bound(k, t), "K = {k}, T = {t}");
                assert!((eta * k as f64 / gamma - gamma).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn combiner_example() {
        let t = 1_000_000u64;
        let x = 1e-2;
        let p = HyperParams::new(x, x, 1, t);
        // 1/0.01 + 0.01 * 1e6 / 0.01 + 0.01 * 1e6
        assert!((lower_bound_combiner([1.0; 3], &p) - (100.0 + 1e6 + 1e4)).abs() < 1e-6);
        assert!(lower_bound_combiner_check([1.0; 3], &p));
    }

    #[test]
    fn combiner_is_tight_at_optimizers() {
        for (c, k, t) in [([1.0, 1.0, 1.0], 2, 1u64 << 20), ([0.3, 1.0 / 6400.0, 9.0 / 400.0], 2, 1 << 17), ([2.0, 0.5, 0.1], 7, 12345)] {
            let (eta, gamma) = lower_bound_combiner_optimizers(c, k, t);
            let p = HyperParams::new(eta, gamma, k, t);
            let ratio = lower_bound_combiner(c, &p) / lower_bound_combiner_floor(c, k, t);
            assert!((ratio - 1.0).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn combiner_never_undercuts_floor(
            c1 in 1e-3f64..10.0, c2 in 1e-3f64..10.0, c3 in 1e-3f64..10.0,
            eta in 1e-6f64..0.5, gamma in 1e-4f64..0.5, k in 1usize..20, t in 1u64..10_000_000,
        ) {
            let p = HyperParams::new(eta, gamma, k, t);
            prop_assert!(lower_bound_combiner_check([c1, c2, c3], &p));
            // Homogeneity: scaling K and every c_i keeps the ordering.
            let lhs = lower_bound_combiner([c1, c2, c3], &p);
            let rhs = lower_bound_combiner_floor([c1, c2, c3], k, t);
            prop_assert!(2.0 * lhs >= 2.0 * rhs * (1.0 - 1e-12));
        }
    }
}
