//! Stokes-operator powers, norms, the Leray projector and the dealiased
//! trilinear form.

use num_complex::Complex64;

use super::field::{forward_real, max_speed, SpectralField};
use crate::error::SpectralError;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Per-mode projection `û_k ↦ û_k - k (k·û_k) / |k|^2`.
///
/// The mean mode and the Nyquist planes are zeroed; the latter cannot carry
/// a real solenoidal field on an even grid.
pub fn leray_project(field: &SpectralField) -> SpectralField {
    let grid = field.grid().clone();
    let mut out = field.clone();
    let coeffs = out.coeffs_mut();
    for idx in 0..grid.len() {
        let k2 = grid.k2(idx);
        if k2 == 0.0 || grid.is_nyquist(idx) {
            for c in coeffs.iter_mut() {
                c[idx] = Complex64::new(0.0, 0.0);
            }
            continue;
        }
        let k = grid.wavevector(idx);
        let kv = coeffs[0][idx] * k[0] + coeffs[1][idx] * k[1] + coeffs[2][idx] * k[2];
        for (c, comp) in coeffs.iter_mut().enumerate() {
            comp[idx] -= kv * (k[c] / k2);
        }
    }
    out
}

/// `A^s u`: multiplies mode `k` by `|k|^{2s}`; the mean mode maps to zero.
pub fn stokes_power(field: &SpectralField, s: f64) -> SpectralField {
    let grid = field.grid().clone();
    field.map_modes(|idx| {
        let k2 = grid.k2(idx);
        if k2 == 0.0 {
            0.0
        } else {
            k2.powf(s)
        }
    })
}

/// `‖A^{s/2} u‖ = (L^3 Σ_k |k|^{2s} |û_k|^2)^{1/2}`.
///
/// `s = 0` is the V₀ norm, `s = 1` the V₁ norm `‖∇u‖`, and `s = -2l` the
/// dual norm of `D(A^l)`.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    sobolev_norm_sq(field, s).sqrt()
}

pub fn sobolev_norm_sq(field: &SpectralField, s: f64) -> f64 {
    let grid = field.grid();
    let mut acc = 0.0;
    for idx in 0..grid.len() {
        let k2 = grid.k2(idx);
        if k2 == 0.0 {
            continue;
        }
        let amp: f64 = (0..3).map(|c| field.component(c)[idx].norm_sqr()).sum();
        if amp == 0.0 {
            continue;
        }
        acc += if s == 0.0 { amp } else { k2.powf(s) * amp };
    }
    acc * grid.volume()
}

fn gradient_component(field: &SpectralField, dir: usize, comp: usize) -> Vec<Complex64> {
    let grid = field.grid();
    let src = field.component(comp);
    (0..grid.len())
        .map(|idx| src[idx] * (I * grid.wavevector(idx)[dir]))
        .collect()
}

fn to_physical_scalar(field: &SpectralField, mut data: Vec<Complex64>) -> Vec<f64> {
    field.grid().transform(&mut data, true);
    data.into_iter().map(|v| v.re).collect()
}

/// `b(u, v, w) = Σ_{i,j} ∫ u_i ∂_i v_j w_j dx`.
///
/// All three arguments are truncated to the two-thirds mask first, so the
/// collocation quadrature of the cubic product is exact.
pub fn trilinear_b(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
) -> Result<f64, SpectralError> {
    u.check_grid(v)?;
    u.check_grid(w)?;
    let grid = u.grid();
    let (u, v, w) = (u.truncated(), v.truncated(), w.truncated());
    let up = u.to_physical();
    let wp = w.to_physical();
    let mut acc = vec![0.0; grid.len()];
    for i in 0..3 {
        for j in 0..3 {
            let dv = to_physical_scalar(&v, gradient_component(&v, i, j));
            for p in 0..grid.len() {
                acc[p] += up[i][p] * dv[p] * wp[j][p];
            }
        }
    }
    let sum: f64 = acc.iter().sum();
    Ok(sum * grid.volume() / grid.len() as f64)
}

/// Leray-projected, dealiased advection `B(u, u) = P[(u·∇)u]`.
pub fn nonlinear_term(u: &SpectralField) -> SpectralField {
    advection_with_speed(u).0
}

/// `B(u, u)` together with `max_x |u(x)|`, which falls out of the same
/// transforms and feeds the CFL check.
///
/// Uses the conservative form `∂_j(u_j u_i)`, equal to `u_j ∂_j u_i` for
/// spectrally divergence-free `u` on every retained mode.
pub(crate) fn advection_with_speed(u: &SpectralField) -> (SpectralField, f64) {
    let grid = u.grid().clone();
    let u = u.truncated();
    let up = u.to_physical();
    let speed = max_speed(&up);

    let mut products: Vec<Vec<Complex64>> = Vec::with_capacity(6);
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    for &(a, b) in &pairs {
        let prod: Vec<f64> = up[a].iter().zip(&up[b]).map(|(x, y)| x * y).collect();
        products.push(forward_real(&grid, &prod));
    }
    let pair_index = |a: usize, b: usize| -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        pairs.iter().position(|&p| p == (a, b)).unwrap()
    };

    let mut out = SpectralField::zeros(&grid);
    let coeffs = out.coeffs_mut();
    for idx in 0..grid.len() {
        if !grid.retained(idx) {
            continue;
        }
        let k = grid.wavevector(idx);
        for (i, comp) in coeffs.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &kj) in k.iter().enumerate() {
                acc += I * kj * products[pair_index(i, j)][idx];
            }
            comp[idx] = acc;
        }
    }
    (leray_project(&out), speed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::random_solenoidal_field;
    use crate::spectral::grid::make_grid;
    use std::f64::consts::PI;

    fn tau() -> f64 {
        2.0 * PI
    }

    #[test]
    fn gradient_mode_is_annihilated() {
        let g = make_grid(8, tau()).unwrap();
        let mut u = SpectralField::zeros(&g);
        let k = [1.0, 2.0, -1.0];
        let phi = Complex64::new(0.3, -0.7);
        let amp = [I * k[0] * phi, I * k[1] * phi, I * k[2] * phi];
        u.set_mode([1, 2, -1], amp).unwrap();
        assert!(leray_project(&u).norm() < 1e-14);
    }

    #[test]
    fn projection_subtracts_component_along_k() {
        let g = make_grid(8, tau()).unwrap();
        let mut u = SpectralField::zeros(&g);
        let one = Complex64::new(1.0, 0.0);
        u.set_mode([1, 0, 0], [one, one, Complex64::new(0.0, 0.0)]).unwrap();
        let p = leray_project(&u);
        let idx = g.index_of_mode([1, 0, 0]).unwrap();
        assert_eq!(p.component(0)[idx], Complex64::new(0.0, 0.0));
        assert_eq!(p.component(1)[idx], one);
        assert_eq!(p.component(2)[idx], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn projection_idempotent_and_nonexpansive() {
        let g = make_grid(8, tau()).unwrap();
        let u = random_solenoidal_field(&g, 1.0, 1.0, 3).unwrap();
        let pu = leray_project(&u);
        assert!(pu.sub(&u).unwrap().norm() <= 1e-12 * u.norm());

        // a generic (non-solenoidal) field
        let raw = SpectralField::from_fn(&g, |x| [x[1].cos(), x[0].sin() + x[1].sin(), x[2].cos()]);
        let p1 = leray_project(&raw);
        let p2 = leray_project(&p1);
        assert!(p2.sub(&p1).unwrap().norm() <= 1e-14 * p1.norm().max(1.0));
        assert!(p1.norm() <= raw.norm() + 1e-12);
        assert!(p1.max_divergence_ratio() < 1e-12);
    }

    #[test]
    fn stokes_power_basics() {
        let g = make_grid(8, tau()).unwrap();
        let u = random_solenoidal_field(&g, 1.0, 1.0, 9).unwrap();
        assert!(stokes_power(&u, 0.0).sub(&u).unwrap().norm() == 0.0);

        let mut single = SpectralField::zeros(&g);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        single.set_mode([0, 2, 0], [one, zero, zero]).unwrap();
        let scaled = stokes_power(&single, 2.0);
        let idx = g.index_of_mode([0, 2, 0]).unwrap();
        assert!((scaled.component(0)[idx] - one * 16.0).norm() < 1e-13);

        let back = stokes_power(&stokes_power(&u, 1.7), -1.7);
        assert!(back.sub(&u).unwrap().norm() <= 1e-12 * u.norm());
    }

    #[test]
    fn sine_shear_norms() {
        let g = make_grid(16, tau()).unwrap();
        let u = SpectralField::from_fn(&g, |x| [0.0, x[0].sin(), 0.0]);
        let expect = tau().powi(3) / 2.0;
        assert!((sobolev_norm(&u, 0.0).powi(2) - expect).abs() < 1e-10 * expect);
        assert!((sobolev_norm(&u, 1.0).powi(2) - expect).abs() < 1e-10 * expect);
        for l in [1.0, 1.5, 2.0, 3.0] {
            assert!((sobolev_norm(&u, -2.0 * l) - sobolev_norm(&u, 0.0)).abs() < 1e-12);
        }
        let z = SpectralField::zeros(&g);
        for s in [-4.0, 0.0, 1.0, 2.5] {
            assert_eq!(sobolev_norm(&z, s), 0.0);
        }
    }

    #[test]
    fn shear_has_no_advection() {
        let g = make_grid(16, tau()).unwrap();
        let u = SpectralField::from_fn(&g, |x| [1.7 * x[1].cos(), 0.0, 0.0]);
        assert!(nonlinear_term(&u).norm() < 1e-13);
        assert!(nonlinear_term(&SpectralField::zeros(&g)).is_zero());
    }

    #[test]
    fn separable_triple_vanishes() {
        let g = make_grid(16, tau()).unwrap();
        let u = SpectralField::from_fn(&g, |x| [x[1].cos(), 0.0, 0.0]);
        let v = SpectralField::from_fn(&g, |x| [0.0, x[0].cos(), 0.0]);
        let w = SpectralField::from_fn(&g, |x| [-x[0].sin() * x[1].cos(), x[0].cos() * x[1].sin(), 0.0]);
        assert!(trilinear_b(&u, &v, &w).unwrap().abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = make_grid(8, tau()).unwrap();
        let b = make_grid(8, PI).unwrap();
        let u = SpectralField::zeros(&a);
        let v = SpectralField::zeros(&b);
        assert!(matches!(
            trilinear_b(&u, &u, &v),
            Err(SpectralError::GridMismatch)
        ));
    }
}
