//! Pseudo-spectral solver for the generalized alpha-family of turbulence
//! models on the periodic box, with a continuous data-assimilation (nudging)
//! layer that reconstructs the full 3D state from coarse observations of a
//! subset of velocity components.
//!
//! The crate is organized around immutable spectral fields:
//!
//! * [`grid`] — the periodic box, wavenumber bookkeeping, dealias mask;
//! * [`field`] — scalar/vector fields stored as truncated Fourier
//!   coefficients (half spectrum along x, Hermitian symmetry explicit);
//! * [`ops`] — the linear operators (gradient, Laplacian, Leray projection,
//!   Helmholtz filter, fractional powers), all diagonal in Fourier space;
//! * [`model`] — the generalized model `∂t v + Av + (Mv·∇)(Nv) + χ∇(Mv)ᵀ·(Nv)
//!   + ∇p = f` and its presets (NSE, Leray-α, ML-α, SBM, NSV, NS-α,
//!   NS-α-like);
//! * [`stepper`] — integrating-factor AB2 time integration;
//! * [`observation`] — coarse-mesh interpolant observables `I_h`;
//! * [`assimilation`] — the nudged twin system, condition checker,
//!   synchronization-error analysis and (μ, h) sweeps;
//! * [`diagnostics`] — norms, Grashof number, attractor-bound monitors;
//! * [`snapshot`] — binary state snapshots plus plain-text sidecars;
//! * [`config`] — run configuration parsing and validation;
//! * [`report`] — CSV emission with reproducibility headers.

pub mod assimilation;
pub mod config;
pub mod diagnostics;
mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod model;
pub mod observation;
pub mod ops;
pub mod report;
pub mod snapshot;
pub mod stepper;

pub use error::{Error, Result};
pub use field::{ScalarField, VectorField};
pub use grid::Grid;
pub use model::{Forcing, ModelSpec, Preset, State};
pub use observation::Observer;
