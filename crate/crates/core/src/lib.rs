//! Littlewood-Paley analysis and pseudo-spectral dynamics for the
//! higher-dimensional Camassa-Holm system on a large periodic torus.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral_grid`]: the torus, transforms and the coefficient field type.
//! - [`littlewood_paley`]: dyadic cutoffs, blocks `Delta_j` and Besov norms.
//! - [`initial_data`]: the lacunary datum that exhibits norm inflation.
//! - [`ch_operators`]: Helmholtz maps and the quadratic terms `Q`, `R`.
//! - [`solver`]: RK4 time stepping and the difference fields `u(t) - u_0`.

pub mod ch_operators;
pub mod error;
mod fft;
pub mod initial_data;
pub mod littlewood_paley;
pub mod solver;
pub mod spectral_grid;

pub use ch_operators::{helmholtz, helmholtz_inverse, CamassaHolm, RhsParts, TWO_THIRDS};
pub use error::{Error, Result};
pub use initial_data::{
    build_u0, carrier_index, carrier_on_plateau, f_profile, g_profile, BumpProfile,
    InitialDataSpec, LacunaryDatum, Sign,
};
pub use littlewood_paley::{BesovParams, CutoffPair, DyadicPartition};
pub use rustfft::num_complex::Complex64;
pub use solver::{Solver, SolverConfig};
pub use spectral_grid::{Exponent, SpectralField, TorusGrid, DEFAULT_PERIOD};
