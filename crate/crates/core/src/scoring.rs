//! Losses on (report, binary outcome) pairs and properness audits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossFn {
    /// `(r - y)^2`, strictly proper.
    Squared,
    /// `|r - y|`, not proper; kept as the contrast case.
    Absolute,
}

impl LossFn {
    /// Loss of report `r` when the outcome is `y`. Callers keep `r` in `[0, 1]`.
    #[inline]
    pub fn eval(self, r: f64, y: bool) -> f64 {
        let d = r - if y { 1.0 } else { 0.0 };
        match self {
            LossFn::Squared => d * d,
            LossFn::Absolute => d.abs(),
        }
    }

    /// `b * loss(r, 1) + (1 - b) * loss(r, 0)`, unchecked.
    #[inline]
    pub(crate) fn expected_unchecked(self, r: f64, b: f64) -> f64 {
        b * self.eval(r, true) + (1.0 - b) * self.eval(r, false)
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {x} outside [0, 1]")))
    }
}

/// Expected loss of report `r` under belief `b` that the outcome is 1.
pub fn expected_loss(f: LossFn, r: f64, b: f64) -> Result<f64> {
    check_unit("report", r)?;
    check_unit("belief", b)?;
    Ok(f.expected_unchecked(r, b))
}

/// Outcome of a properness audit over finite grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Properness {
    StrictlyProper,
    /// Reporting `report` does at least as well as truthfully reporting `belief`.
    NotProper {
        belief: f64,
        report: f64,
        loss_at_report: f64,
        loss_at_belief: f64,
    },
}

/// Grid points of `report_grid` minimizing expected loss under belief `b`.
pub fn grid_minimizers(f: LossFn, b: f64, report_grid: &[f64]) -> Vec<f64> {
    let losses: Vec<f64> = report_grid.iter().map(|&r| f.expected_unchecked(r, b)).collect();
    let best = losses.iter().copied().fold(f64::INFINITY, f64::min);
    report_grid
        .iter()
        .zip(&losses)
        .filter(|(_, &l)| l == best)
        .map(|(&r, _)| r)
        .collect()
}

/// Checks that for every belief the truthful report is the unique grid
/// minimizer of expected loss.
///
/// The witness returned for a non-proper loss is the first belief (in grid
/// order) with a competing report, paired with its best competing report
/// (lowest index on ties).
pub fn properness_audit(f: LossFn, belief_grid: &[f64], report_grid: &[f64]) -> Result<Properness> {
    for &x in belief_grid.iter().chain(report_grid) {
        check_unit("grid point", x)?;
    }
    for &b in belief_grid {
        let at_belief = f.expected_unchecked(b, b);
        let mut witness: Option<(f64, f64)> = None;
        for &r in report_grid {
            if (r - b).abs() <= 1e-12 {
                continue;
            }
            let l = f.expected_unchecked(r, b);
            if l <= at_belief && witness.is_none_or(|(_, wl)| l < wl) {
                witness = Some((r, l));
            }
        }
        if let Some((report, loss_at_report)) = witness {
            return Ok(Properness::NotProper { belief: b, report, loss_at_report, loss_at_belief: at_belief });
        }
    }
    Ok(Properness::StrictlyProper)
}

/// `n` evenly spaced points on `[0, 1]`, endpoints included.
pub fn unit_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn expected_loss_examples() {
        assert_eq!(expected_loss(LossFn::Squared, 0.5, 0.5).unwrap(), 0.25);
        for b in [0.0, 0.1, 0.37, 0.5, 1.0] {
            let v = expected_loss(LossFn::Squared, b, b).unwrap();
            assert!((v - b * (1.0 - b)).abs() < 1e-15);
        }
        // 0.5 * |0.3 - 1| + 0.5 * |0.3 - 0|
        let direct = 0.5 * 0.7 + 0.5 * 0.3;
        let v = expected_loss(LossFn::Absolute, 0.3, 0.5).unwrap();
        assert!((v - direct).abs() < 1e-15 && (v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn expected_loss_domain() {
        assert!(expected_loss(LossFn::Squared, 1.1, 0.5).is_err());
        assert!(expected_loss(LossFn::Squared, 0.5, -0.1).is_err());
    }

    #[test]
    fn squared_is_strictly_proper() {
        let g = unit_grid(101);
        assert_eq!(properness_audit(LossFn::Squared, &g, &g).unwrap(), Properness::StrictlyProper);
        assert_eq!(
            properness_audit(LossFn::Squared, &[0.0, 1.0], &g).unwrap(),
            Properness::StrictlyProper
        );
        let fine = unit_grid(1001);
        assert_eq!(properness_audit(LossFn::Squared, &fine, &fine).unwrap(), Properness::StrictlyProper);
    }

    #[test]
    fn absolute_is_not_proper() {
        let g = unit_grid(101);
        let verdict = properness_audit(LossFn::Absolute, &g, &g).unwrap();
        assert!(matches!(verdict, Properness::NotProper { .. }));
        // b = 0.4: the grid minimizer is r = 0 with loss 0.4, against 0.48 for truth.
        assert_eq!(grid_minimizers(LossFn::Absolute, 0.4, &g), vec![0.0]);
        assert!((LossFn::Absolute.expected_unchecked(0.0, 0.4) - 0.4).abs() < 1e-15);
        assert!((LossFn::Absolute.expected_unchecked(0.4, 0.4) - 0.48).abs() < 1e-15);
        if let Properness::NotProper { belief, report, loss_at_report, loss_at_belief } = verdict {
            assert!(loss_at_report <= loss_at_belief);
            assert_ne!(belief, report);
        }
    }

    #[test]
    fn squared_minimizer_is_nearest_grid_point() {
        let reports = unit_grid(1001);
        let beliefs = unit_grid(1001);
        for &b in &beliefs {
            let mins = grid_minimizers(LossFn::Squared, b, &reports);
            assert_eq!(mins.len(), 1);
            assert!((mins[0] - b).abs() < 1e-12);
        }
        // Off-grid beliefs snap to the nearest report.
        let coarse = unit_grid(11);
        let mins = grid_minimizers(LossFn::Squared, 0.33, &coarse);
        assert_eq!(mins, vec![0.3]);
    }

    proptest! {
        #[test]
        fn expected_loss_is_affine_in_belief(r in 0.0f64..=1.0, b in 0.0f64..=1.0, abs in any::<bool>()) {
            let f = if abs { LossFn::Absolute } else { LossFn::Squared };
            let lhs = expected_loss(f, r, b).unwrap();
            let rhs = b * (f.eval(r, true) - f.eval(r, false)) + f.eval(r, false);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn squared_derivative_is_twice_the_gap(r in 0.01f64..0.99, b in 0.0f64..=1.0) {
            let h = 1e-6;
            let fd = (LossFn::Squared.expected_unchecked(r + h, b) - LossFn::Squared.expected_unchecked(r - h, b)) / (2.0 * h);
            prop_assert!((fd - 2.0 * (r - b)).abs() < 1e-6);
        }

        #[test]
        fn loss_range(r in 0.0f64..=1.0, y in any::<bool>()) {
            for f in [LossFn::Squared, LossFn::Absolute] {
                let v = f.eval(r, y);
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
