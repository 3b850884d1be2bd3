//! Numerical toolkit for the continuously monitored open Kerr parametric
//! oscillator in its Gaussian scaling limit (χ = 0).
//!
//! The crate is organised by capability:
//!
//! * [`model`]: system/measurement parameters, drift and detector matrices,
//!   the unconditional steady state and backaction-evading critical points.
//! * [`conditional`]: Riccati evolution of the conditional covariance and
//!   Euler–Maruyama simulation of the conditional mean and photocurrent.
//! * [`moments`]: deterministic ODEs for the record-averaged second moments
//!   (E\[r rᵀ\], the ∂ω moments, E\[yᵀy\]).
//! * [`fisher`]: continuous-monitoring Fisher information, its growth rate
//!   and optimisation over general-dyne settings.
//! * [`qfi`]: global quantum Fisher information of the joint
//!   oscillator–environment state.
//! * [`fock`]: truncated Fock-space reference solvers used as ground truth.
//! * [`cli`]: run configuration, grid parsing and table output shared by the
//!   `gdyne` binary.
//!
//! All frequencies and rates are expressed in units of the loss rate κ unless a
//! different κ is passed explicitly. Covariances use the convention in which
//! the vacuum has Σ = I.

pub mod cli;
pub mod conditional;
mod error;
pub mod fisher;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod moments;
mod ode;
mod optim;
mod parallel;
pub mod qfi;
mod quadrature;

pub use error::{Error, Result};
pub use linalg::{Matrix2, SymMatrix2, Vector2};
pub use model::{MeasurementParams, PhaseGeometry, SystemParams};
pub use parallel::resolve_threads;
