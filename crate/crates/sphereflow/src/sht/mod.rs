//! Spherical-harmonic machinery: Gauss grids, transforms, spectral operators and rotations.
//!
//! Harmonics are the orthonormal complex `Y_l^m` with the Condon–Shortley sign, written in
//! latitude `theta` (so `s = sin(theta)` is the Legendre variable).

pub mod field;
pub mod grid;
pub mod legendre;
pub mod rotation;
pub mod snapshot;
pub mod transform;

pub use field::{index, field_len, sin_lat_coefficient, SpectralField};
pub use grid::{build_grid, gauss_grid, gauss_legendre, GaussGrid, TruncationSpec};
pub use rotation::{rotate, transform_by, OrthogonalMap, RotationSpec, Rotator};
pub use snapshot::Snapshot;
pub use transform::{GridField, Transform};
