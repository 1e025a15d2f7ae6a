//! Steady-state heat transport through a superconducting qutrit coupled to
//! three thermal baths by finite-Q resonators.
//!
//! The pipeline is: circuit parameters → [`spectrum`] → per-bath
//! [`rates`] → stationary populations ([`steady`]) → heat currents and the
//! rectification / circulation / regime metrics in [`transport`]. Parameter
//! maps are produced by [`sweep`]; [`stochastic`] is an independent jump
//! process estimator used for cross-checks.

// NaN must fail validation, and index loops mirror the matrix notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod presets;
pub mod rates;
pub mod spectrum;
pub mod steady;
pub mod stochastic;
pub mod sweep;
pub mod transport;

pub use rates::{BathChannel, Channel, RateMatrix};
pub use spectrum::{derive_spectrum, CircuitParams, QutritSpectrum};
pub use steady::{solve_steady, SteadyState};
pub use transport::{Device, HeatCurrents, Regime, TemperatureScenario, TransportError};
