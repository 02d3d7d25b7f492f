//! Periodic-box spectral representation of solenoidal, zero-mean fields.

mod field;
mod flows;
mod grid;
mod ops;

pub use flows::{cross_shear_flow, shear_flow, taylor_green};
pub use field::{random_solenoidal_field, SpectralField};
pub use grid::{make_grid, WaveGrid};
pub use ops::{leray_project, nonlinear_term, sobolev_norm, sobolev_norm_sq, stokes_power, trilinear_b};

pub(crate) use ops::advection_with_speed;
