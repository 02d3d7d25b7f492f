//! Closed-form velocity fields used as initial data and forcings.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::WaveGrid;

/// `u = (A cos(k y), 0, 0)` with `k = 2π/L`, a single `|k| = k` shell mode.
pub fn shear_flow(grid: &Arc<WaveGrid>, amplitude: f64) -> SpectralField {
    let mut u = SpectralField::zeros(grid);
    let half = Complex64::new(0.5 * amplitude, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    u.set_mode([0, 1, 0], [half, zero, zero])
        .expect("grid has at least 4 points per axis");
    u
}

/// `u = (0, 0, A sin(k y))`: same shell as [`shear_flow`], orthogonal to it
/// and advection-free together with it.
pub fn cross_shear_flow(grid: &Arc<WaveGrid>, amplitude: f64) -> SpectralField {
    let mut u = SpectralField::zeros(grid);
    let zero = Complex64::new(0.0, 0.0);
    // sin = (e^{iy} - e^{-iy}) / 2i
    let coef = Complex64::new(0.0, -0.5 * amplitude);
    u.set_mode([0, 1, 0], [zero, zero, coef])
        .expect("grid has at least 4 points per axis");
    u
}

/// Taylor–Green vortex `A (sin x cos y cos z, -cos x sin y cos z, 0)` in box
/// coordinates scaled by `2π/L`.
pub fn taylor_green(grid: &Arc<WaveGrid>, amplitude: f64) -> SpectralField {
    let mut u = SpectralField::zeros(grid);
    let zero = Complex64::new(0.0, 0.0);
    for sx in [-1i64, 1] {
        for sy in [-1i64, 1] {
            for sz in [-1i64, 1] {
                let ax = Complex64::new(0.0, -(sx as f64) * amplitude / 8.0);
                let ay = Complex64::new(0.0, sy as f64 * amplitude / 8.0);
                u.set_mode([sx, sy, sz], [ax, ay, zero])
                    .expect("grid has at least 4 points per axis");
            }
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, nonlinear_term, sobolev_norm};
    use std::f64::consts::PI;

    #[test]
    fn shear_matches_physical_cosine() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let a = shear_flow(&g, 1.3);
        let b = SpectralField::from_fn(&g, |x| [1.3 * x[1].cos(), 0.0, 0.0]);
        assert!(a.sub(&b).unwrap().norm() < 1e-13);
        let c = cross_shear_flow(&g, 0.4);
        let d = SpectralField::from_fn(&g, |x| [0.0, 0.0, 0.4 * x[1].sin()]);
        assert!(c.sub(&d).unwrap().norm() < 1e-13);
        assert!(nonlinear_term(&a.add(&c).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn taylor_green_shell() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let u = taylor_green(&g, 1.0);
        let k = 1.0;
        let b = SpectralField::from_fn(&g, |x| {
            let (sx, cx) = (k * x[0]).sin_cos();
            let (sy, cy) = (k * x[1]).sin_cos();
            let cz = (k * x[2]).cos();
            [sx * cy * cz, -cx * sy * cz, 0.0]
        });
        assert!(u.sub(&b).unwrap().norm() < 1e-13);
        assert!(u.max_divergence_ratio() < 1e-12);
        let ratio = sobolev_norm(&u, 1.0).powi(2) / sobolev_norm(&u, 0.0).powi(2);
        assert!((ratio - 3.0).abs() < 1e-12);
    }
}
