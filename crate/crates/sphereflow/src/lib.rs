//! Incompressible flow on a rotating sphere.
//!
//! The crate covers the barotropic vorticity equation `∂_t Δψ + J(ψ, Δψ + 2ω sinθ) = 0`
//! in latitude–longitude form: spectral transforms, time stepping, explicit stationary and
//! travelling solutions, linear and energy–Casimir stability tests, symmetric bifurcation
//! branches and the lift of planar solutions to a stratified three-dimensional shell.

pub mod bifurcation;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod sht;
pub mod solutions;
pub mod stability;
pub mod stratosphere;

pub use error::{Error, Result};
