//! Simulation and verification toolkit for Bell-type inequalities.
//!
//! The crate is organised bottom-up:
//!
//! * [`qstate`]: the four entangled two-particle states, analyzer bases and
//!   Born-rule joint distributions.
//! * [`lhv`]: local hidden-variable models (a shared density over `λ` plus
//!   deterministic local responses), evaluated by quadrature or Monte Carlo.
//! * [`inequalities`]: evaluators for the Bell, CHSH, Wigner and Peres
//!   inequalities over any [`inequalities::CorrelationSource`], plus the
//!   exhaustive quartet and sextet enumerations.
//! * [`harness`]: finite-statistics experiment simulation, counting,
//!   CHSH analysis with error bars, and angle optimisation.
//! * [`cli`]: the `bellkit` command-line front end and its file formats.

pub mod cli;
pub mod error;
pub mod harness;
pub mod inequalities;
pub mod lhv;
pub mod qstate;
pub mod rng;

pub use error::{Error, Result};
