//! Per-horizon hyperparameter policies.
//!
//! Accepted forms, for either slot: a plain number, `T^p`, `c*T^p` and
//! `c*T^p/q`-style exponents such as `0.5*T^-2/3`, optionally prefixed with
//! the slot name (`eta=T^-2/3`, `gamma=T^-1/3`), and the named policies
//! `exp3-default` and `upper-bound-tuned`.

use std::fmt;

use serde::{Deserialize, Serialize};
use selfish_bandit::learners::exp3_default_eta;
use selfish_bandit::simlab::upper_bound_tuned_params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slot {
    Eta,
    Gamma,
}

impl Slot {
    fn name(self) -> &'static str {
        match self {
            Slot::Eta => "eta",
            Slot::Gamma => "gamma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    Fixed(f64),
    /// `coef * T^exponent`.
    Power { coef: f64, exponent: f64 },
    /// `sqrt(ln K / (K T))` for eta, zero for gamma.
    Exp3Default,
    /// The parameters balancing the upper-bound terms.
    UpperBoundTuned,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {slot} policy {input:?}: {reason}")]
pub struct PolicyError {
    pub slot: &'static str,
    pub input: String,
    pub reason: String,
}

impl Policy {
    /// The value for horizon `t` with `k` arms.
    pub fn resolve(&self, slot: Slot, k: usize, t: u64) -> f64 {
        match *self {
            Policy::Fixed(x) => x,
            Policy::Power { coef, exponent } => coef * (t as f64).powf(exponent),
            Policy::Exp3Default => match slot {
                Slot::Eta => exp3_default_eta(k, t),
                Slot::Gamma => 0.0,
            },
            Policy::UpperBoundTuned => {
                let (eta, gamma) = upper_bound_tuned_params(k, t);
                match slot {
                    Slot::Eta => eta,
                    Slot::Gamma => gamma,
                }
            }
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Fixed(x) => write!(f, "{x}"),
            Policy::Power { coef, exponent } => write!(f, "{coef}*T^{exponent}"),
            Policy::Exp3Default => f.write_str("exp3-default"),
            Policy::UpperBoundTuned => f.write_str("upper-bound-tuned"),
        }
    }
}

pub fn parse_policy(slot: Slot, input: &str) -> Result<Policy, PolicyError> {
    let fail = |reason: &str| PolicyError { slot: slot.name(), input: input.to_string(), reason: reason.to_string() };
    let mut s = input.trim();
    if let Some((lhs, rhs)) = s.split_once('=') {
        if lhs.trim() != slot.name() {
            return Err(fail(&format!("prefix {:?} does not name the {} slot", lhs.trim(), slot.name())));
        }
        s = rhs.trim();
    }
    match s {
        "" => return Err(fail("empty")),
        "exp3-default" => return Ok(Policy::Exp3Default),
        "upper-bound-tuned" => return Ok(Policy::UpperBoundTuned),
        _ => {}
    }
    let policy = if let Some(pos) = s.find('T') {
        let coef = match s[..pos].trim() {
            "" => 1.0,
            c => parse_number(c.strip_suffix('*').ok_or_else(|| fail("expected '*' before T"))?.trim())
                .ok_or_else(|| fail("bad coefficient"))?,
        };
        let rest = s[pos + 1..].trim();
        let exponent = if rest.is_empty() {
            1.0
        } else {
            let e = rest.strip_prefix('^').ok_or_else(|| fail("expected '^' after T"))?;
            parse_exponent(e.trim()).ok_or_else(|| fail("bad exponent"))?
        };
        Policy::Power { coef, exponent }
    } else {
        Policy::Fixed(parse_number(s).ok_or_else(|| fail("not a number"))?)
    };
    let finite = match policy {
        Policy::Fixed(x) => x.is_finite() && x >= 0.0,
        Policy::Power { coef, exponent } => coef.is_finite() && coef >= 0.0 && exponent.is_finite(),
        _ => true,
    };
    if finite {
        Ok(policy)
    } else {
        Err(fail("values must be finite and non-negative"))
    }
}

fn parse_number(s: &str) -> Option<f64> {
    // Rust also accepts "inf" and "nan"; those are rejected by the caller.
    s.parse::<f64>().ok()
}

/// `-2/3`, `(-2/3)`, `-0.5`.
fn parse_exponent(s: &str) -> Option<f64> {
    let s = s.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(s).trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (parse_number(p.trim())?, parse_number(q.trim())?);
            (q != 0.0).then_some(p / q)
        }
        None => parse_number(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_and_symbolic_forms() {
        assert_eq!(parse_policy(Slot::Eta, "eta=T^-2/3").unwrap(), Policy::Power { coef: 1.0, exponent: -2.0 / 3.0 });
        assert_eq!(parse_policy(Slot::Gamma, "gamma=T^-1/3").unwrap(), Policy::Power { coef: 1.0, exponent: -1.0 / 3.0 });
        assert_eq!(parse_policy(Slot::Eta, "0.5*T^-2/3").unwrap(), Policy::Power { coef: 0.5, exponent: -2.0 / 3.0 });
        assert_eq!(parse_policy(Slot::Gamma, "2 * T^(-1/3)").unwrap(), Policy::Power { coef: 2.0, exponent: -1.0 / 3.0 });
        assert_eq!(parse_policy(Slot::Eta, "T^-0.5").unwrap(), Policy::Power { coef: 1.0, exponent: -0.5 });
        assert_eq!(parse_policy(Slot::Eta, "exp3-default").unwrap(), Policy::Exp3Default);
        assert_eq!(parse_policy(Slot::Gamma, "upper-bound-tuned").unwrap(), Policy::UpperBoundTuned);
        assert_eq!(parse_policy(Slot::Eta, " 0.01 ").unwrap(), Policy::Fixed(0.01));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "gamma=0.1", "abc", "T^", "T^1/0", "2T^-1", "inf", "-0.1", "eta=", "T^x", "1*T^nan"] {
            assert!(parse_policy(Slot::Eta, bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn resolution() {
        let t = 1u64 << 12;
        let eta = parse_policy(Slot::Eta, "eta=T^-2/3").unwrap().resolve(Slot::Eta, 2, t);
        assert!((eta - 1.0 / 256.0).abs() < 1e-15);
        assert_eq!(Policy::Exp3Default.resolve(Slot::Gamma, 2, t), 0.0);
        assert!((Policy::Exp3Default.resolve(Slot::Eta, 2, t) - (2f64.ln() / (2.0 * t as f64)).sqrt()).abs() < 1e-15);
        let (e, g) = upper_bound_tuned_params(2, t);
        assert_eq!(Policy::UpperBoundTuned.resolve(Slot::Eta, 2, t), e);
        assert_eq!(Policy::UpperBoundTuned.resolve(Slot::Gamma, 2, t), g);
    }

    #[test]
    fn display_round_trips() {
        for p in [Policy::Fixed(0.25), Policy::Power { coef: 0.5, exponent: -0.25 }, Policy::Exp3Default, Policy::UpperBoundTuned] {
            assert_eq!(parse_policy(Slot::Eta, &p.to_string()).unwrap(), p);
        }
    }
}
