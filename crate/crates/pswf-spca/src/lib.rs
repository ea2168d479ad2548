//! Steerable principal components of bandlimited image stacks.
//!
//! The crate expands images sampled on a Cartesian grid in a basis of
//! two-dimensional prolate spheroidal wave functions (PSWFs) — the
//! functions maximally concentrated on the unit disk among those
//! bandlimited to a disk in frequency — and computes the principal
//! components of a stack jointly with all planar rotations of its images.
//! Rotation invariance makes the covariance block-diagonal in the angular
//! index, so the components come out *steerable*: each is a single angular
//! frequency times a radial profile, and rotating it is a scalar phase.
//!
//! Pipeline stages, each with its own module and file format:
//!
//! 1. [`basis`] — construct the PSWF basis for a bandlimit and truncation
//!    parameter (`.pswb`).
//! 2. [`quadrature`] — build the polar quadrature rule that integrates
//!    products of basis functions exactly to a target accuracy (`.pswq`).
//! 3. [`expand`] — compute expansion coefficients per image, directly or
//!    through the quadrature + NUFFT fast path, and reconstruct (`.spci`,
//!    `.spcc`).
//! 4. [`spca`] — rotation-invariant covariance, per-block eigenpairs,
//!    steerable components, projections (`.spcm`).
//! 5. [`diagnostics`] — spectrum and error-curve reports backing the
//!    accuracy claims.
//!
//! The [`pipeline`] module ties the stages together behind one config;
//! the `spca` binary exposes them as subcommands.

pub mod bessel;
pub mod error;
pub mod gauss;
pub mod params;
pub mod quadrature;
pub mod radial;

pub use error::{Error, Result};
pub use params::BandParams;
pub use quadrature::QuadratureRule;
