//! Two harmonically coupled oscillators, each in contact with its own
//! thermal bath: closed-form Gaussian dynamics, entanglement and entropy,
//! non-equilibrium steady states and critical temperatures.
//!
//! Units are `ħ = k_B = 1`. Covariance matrices use the ordering
//! `[x1, p1, x2, p2]` with `Γ_jk = 2 Re Tr[ρ R_j R_k]`, so the oscillator
//! vacuum of a unit-mass, unit-frequency mode is the identity. The frequency
//! entering the weak-coupling thermal weight `(ω/2) coth(ω/2T)` is taken to
//! be the bare oscillator frequency `omega0`.

#![cfg_attr(test, allow(clippy::excessive_precision, clippy::too_many_arguments))]

pub mod config;
pub mod error;
pub mod gaussian;
pub mod model;
pub mod oracle;
pub mod propagator;
pub mod series;
pub mod steady;
pub mod svg;
pub mod sweep;
pub mod validate;

pub use config::{ConfigValues, RunConfig};
pub use error::{Error, Result};
pub use gaussian::{
    entropy_from_spectrum, log_negativity, log_negativity_from_spectrum, partial_transpose,
    symplectic_form, symplectic_spectrum, von_neumann_entropy, CovarianceMatrix, SymplecticSpectrum,
};
pub use model::{
    effective_temps, initial_covariance, EffectiveTemps, InitialState, Regime, SystemParams,
};
pub use propagator::{covariance_at, Propagator};
