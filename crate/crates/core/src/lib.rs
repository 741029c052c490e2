//! Simulation laboratory for prediction with selfish experts.
//!
//! The crate bundles the full-information learners (Hedge, MWU, WSU) and the
//! bandit learners (WSU-UX, EXP3) behind a common stepping interface, the
//! oblivious two-arm loss sequences that force WSU-UX into `T^{2/3}` regret,
//! an exact incentive-compatibility auditor, and a seeded, parallel Monte Carlo
//! engine with the statistics needed to check the lower-bound argument
//! empirically.
//!
//! Module map:
//!
//! - [`simplex`], [`params`], [`seed`]: shared domain types.
//! - [`scoring`]: squared/absolute loss and properness audits.
//! - [`learners`]: update rules and the WSWM payment rule.
//! - [`environments`]: loss sequences, phase plan and derived quantities.
//! - [`ic_audit`]: best-response computation by exact enumeration.
//! - [`simlab`]: trials, aggregation, claim statistics, fits and bounds.

pub mod environments;
pub mod error;
pub mod ic_audit;
pub mod learners;
pub mod numeric;
pub mod params;
pub mod scoring;
pub mod seed;
pub mod simlab;
pub mod simplex;

pub use error::{Error, Result};
pub use params::{HyperParams, Regime};
pub use seed::Seed;
pub use simplex::{mix_uniform, simplex_repair, ProbVector};
