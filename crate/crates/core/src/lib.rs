//! Standing waves of the one-dimensional Schrödinger–Kirchhoff equation
//! `i u_t + (1 + ‖u_x‖²) u_xx + |u|^{2r} u = 0`: exact profiles, conserved
//! functionals, linearized spectra and orbital stability diagnostics.

pub mod elliptic;
pub mod error;
pub mod evolution;
pub mod functionals;
pub mod numerics;
pub mod report;
pub mod spectral;
pub mod waves;

pub use error::{Error, Result};
