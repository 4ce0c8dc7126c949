//! Equation of state of a quantum heat bath built from weakly interacting
//! finite-dimensional molecules.
//!
//! A choice of measure on a molecule's pure-state space turns the energy
//! expectation `H(x)` into a random variable with some [`EnergyLaw`]. In the
//! limit of many molecules the bath's specific energy and entropy follow from
//! the log-moment-generating function of that law:
//!
//! * [`energy_laws`] builds the law for the Dirac (eigenstate) and Haar
//!   (uniform) measures, and samples Haar-random states.
//! * [`thermo`] computes `log Z`, `E`, `S`, `C` and inverts `E -> beta`.
//! * [`closed_forms`] holds the two-level formulas used as exact checks.
//! * [`bath_sim`] evaluates the finite-`n` entropy `(1/n) log P[avg <= E]`
//!   exactly or by (tilted) Monte Carlo.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath_sim;
pub mod closed_forms;
pub mod energy_laws;
pub mod error;
pub mod numeric;
pub mod rng;
pub mod spectrum;
pub mod thermo;

pub use energy_laws::{
    completeness_check, dirac_law, haar_law, law_cdf, law_moments, sample_haar_energy, Atom,
    CompletenessReport, ContinuousLaw, DiscreteLaw, EnergyLaw,
};
pub use error::{Error, ErrorKind, Result};
pub use rng::RngStream;
pub use spectrum::{Level, Spectrum};
pub use thermo::{EquationOfState, Grid, ThermoPoint};
