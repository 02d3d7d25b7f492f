//! Pseudospectral solver for the hyperviscosity-regularized incompressible
//! Navier–Stokes equations on a periodic box,
//!
//! ```text
//! ∂_t u + ε A^l u + ν A u + B(u, u) = f,   div u = 0,
//! ```
//!
//! together with checks of the classical energy and absorbing-ball bounds
//! along computed trajectories and metric experiments on attractor proxies
//! as `ε → 0`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod attractor;
pub mod dynamics;
pub mod error;
pub mod estimates;
pub mod io;
pub mod spectral;

pub use error::{DynamicsError, EstimateError, IoError, LabError, SpectralError};
