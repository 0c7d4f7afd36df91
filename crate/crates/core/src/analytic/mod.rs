// SPDX-License-Identifier: Apache-2.0

//! Independent references for the numeric core: continuum closed forms,
//! fragment concentration statistics and a truncated Fock-space solver.

pub mod concentration;
pub mod continuum;
pub mod fock;

pub use concentration::{
    concentration_stats, double_rectangular_profile, rectangular_profile, ConcentrationStats,
};
pub use continuum::{
    alpha_markov, alpha_nonmarkov, lambda0_nonmarkov, lambda_markov, lambda_nonmarkov,
    markov_lorentzian, nonmarkov_density, nonmarkov_lorentzian_pair, ContinuumParams,
};
pub use fock::{min_cutoff, FockOracle, OracleState};
