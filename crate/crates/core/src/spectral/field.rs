use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::grid::WaveGrid;
use crate::error::SpectralError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Velocity field held as Fourier coefficients `û_k`, one array per
/// component, normalized so that `u(x) = Σ_k û_k e^{ik·x}`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<WaveGrid>,
    coeffs: [Vec<Complex64>; 3],
}

impl SpectralField {
    pub fn zeros(grid: &Arc<WaveGrid>) -> Self {
        let len = grid.len();
        Self {
            grid: Arc::clone(grid),
            coeffs: [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]],
        }
    }

    /// Wraps raw coefficient arrays. No invariant is enforced.
    pub fn from_coeffs(
        grid: &Arc<WaveGrid>,
        coeffs: [Vec<Complex64>; 3],
    ) -> Result<Self, SpectralError> {
        if coeffs.iter().any(|c| c.len() != grid.len()) {
            return Err(SpectralError::GridMismatch);
        }
        Ok(Self {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    /// Sets the Fourier mode `m` (signed integers) of every component to
    /// `amp` and its partner `-m` to the conjugate.
    pub fn set_mode(&mut self, m: [i64; 3], amp: [Complex64; 3]) -> Option<()> {
        let idx = self.grid.index_of_mode(m)?;
        let partner = self.grid.partner(idx);
        for c in 0..3 {
            if idx == partner {
                self.coeffs[c][idx] = Complex64::new(amp[c].re, 0.0);
            } else {
                self.coeffs[c][idx] = amp[c];
                self.coeffs[c][partner] = amp[c].conj();
            }
        }
        Some(())
    }

    /// Samples a real vector field given in physical space.
    pub fn from_fn(grid: &Arc<WaveGrid>, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let n = grid.n();
        let h = grid.period() / n as f64;
        let mut phys = [
            vec![0.0; grid.len()],
            vec![0.0; grid.len()],
            vec![0.0; grid.len()],
        ];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let v = f([i as f64 * h, j as f64 * h, l as f64 * h]);
                    let idx = grid.index(i, j, l);
                    for c in 0..3 {
                        phys[c][idx] = v[c];
                    }
                }
            }
        }
        Self::from_physical(grid, &phys)
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>; 3] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Vec<Complex64>; 3] {
        &mut self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    pub fn check_grid(&self, other: &SpectralField) -> Result<(), SpectralError> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch)
        }
    }

    fn zip_with(
        &self,
        other: &SpectralField,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<SpectralField, SpectralError> {
        self.check_grid(other)?;
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.coeffs[c].iter_mut().zip(&other.coeffs[c]) {
                *a = op(*a, *b);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &SpectralField) -> Result<SpectralField, SpectralError> {
        self.zip_with(other, |a, b| a + b * alpha)
    }

    pub fn scale(&self, alpha: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .flat_map(|c| c.iter_mut())
            .for_each(|v| *v *= alpha);
        out
    }

    /// Multiplies every mode by a real per-mode symbol.
    pub fn map_modes(&self, symbol: impl Fn(usize) -> f64) -> SpectralField {
        let mut out = self.clone();
        for comp in out.coeffs.iter_mut() {
            for (idx, v) in comp.iter_mut().enumerate() {
                *v *= symbol(idx);
            }
        }
        out
    }

    /// Drops every mode outside the two-thirds dealiasing mask.
    pub fn truncated(&self) -> SpectralField {
        let grid = Arc::clone(&self.grid);
        self.map_modes(|idx| if grid.retained(idx) { 1.0 } else { 0.0 })
    }

    /// V₀ inner product `∫ u·v dx` (Parseval).
    pub fn inner(&self, other: &SpectralField) -> Result<f64, SpectralError> {
        self.check_grid(other)?;
        let mut acc = 0.0;
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter().zip(&other.coeffs[c]) {
                acc += (a * b.conj()).re;
            }
        }
        Ok(acc * self.grid.volume())
    }

    /// V₀ norm `‖u‖`.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        let acc: f64 = self
            .coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm_sqr())
            .sum();
        acc * self.grid.volume()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flat_map(|c| c.iter()).all(|v| *v == ZERO)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Largest `|k·û_k| / (|k| |û_k|)` over nonzero modes; 0 for the zero field.
    pub fn max_divergence_ratio(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.len() {
            let k2 = self.grid.k2(idx);
            if k2 == 0.0 {
                continue;
            }
            let k = self.grid.wavevector(idx);
            let amp = (0..3)
                .map(|c| self.coeffs[c][idx].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if amp == 0.0 {
                continue;
            }
            let div = (0..3).map(|c| self.coeffs[c][idx] * k[c]).sum::<Complex64>();
            worst = worst.max(div.norm() / (k2.sqrt() * amp));
        }
        worst
    }

    /// Largest `|û_k - conj(û_{-k})|` over modes off the Nyquist planes.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.len() {
            if self.grid.is_nyquist(idx) {
                continue;
            }
            let p = self.grid.partner(idx);
            for c in 0..3 {
                worst = worst.max((self.coeffs[c][idx] - self.coeffs[c][p].conj()).norm());
            }
        }
        worst
    }

    /// Magnitude of the mean mode `û_0`.
    pub fn mean_defect(&self) -> f64 {
        (0..3).map(|c| self.coeffs[c][0].norm()).fold(0.0, f64::max)
    }

    /// Pointwise values on the `N^3` collocation grid.
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let grid = &self.grid;
        let mut out: [Vec<f64>; 3] = Default::default();
        for (c, slot) in out.iter_mut().enumerate() {
            let mut data = self.coeffs[c].clone();
            grid.transform(&mut data, true);
            *slot = data.into_iter().map(|v| v.re).collect();
        }
        out
    }

    pub fn from_physical(grid: &Arc<WaveGrid>, phys: &[Vec<f64>; 3]) -> Self {
        let mut coeffs: [Vec<Complex64>; 3] = Default::default();
        for (c, slot) in coeffs.iter_mut().enumerate() {
            *slot = forward_real(grid, &phys[c]);
        }
        Self {
            grid: Arc::clone(grid),
            coeffs,
        }
    }

    /// Largest pointwise speed `max_x |u(x)|`.
    pub fn max_speed(&self) -> f64 {
        max_speed(&self.to_physical())
    }
}

pub(crate) fn forward_real(grid: &WaveGrid, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.transform(&mut data, false);
    let norm = 1.0 / grid.len() as f64;
    data.iter_mut().for_each(|v| *v *= norm);
    data
}

pub(crate) fn max_speed(phys: &[Vec<f64>; 3]) -> f64 {
    (0..phys[0].len())
        .map(|p| (phys[0][p].powi(2) + phys[1][p].powi(2) + phys[2][p].powi(2)).sqrt())
        .fold(0.0, f64::max)
}

/// Random divergence-free, zero-mean field on the dealiased modes with
/// coefficient magnitudes decaying like `|k|^(-spectrum_decay)`, rescaled so
/// that `‖u‖ = amplitude`.
pub fn random_solenoidal_field(
    grid: &Arc<WaveGrid>,
    spectrum_decay: f64,
    amplitude: f64,
    seed: u64,
) -> Result<SpectralField, SpectralError> {
    if !(spectrum_decay > 0.0) {
        return Err(SpectralError::InvalidDecay(spectrum_decay));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = SpectralField::zeros(grid);
    for idx in 0..grid.len() {
        let partner = grid.partner(idx);
        if partner <= idx || !grid.retained(idx) || grid.k2(idx) == 0.0 {
            continue;
        }
        let k = grid.wavevector(idx);
        let k2 = grid.k2(idx);
        let weight = k2.powf(-0.5 * spectrum_decay);
        let mut v = [ZERO; 3];
        for slot in v.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *slot = Complex64::new(re, im) * weight;
        }
        let kv = v[0] * k[0] + v[1] * k[1] + v[2] * k[2];
        for c in 0..3 {
            let w = v[c] - kv * (k[c] / k2);
            field.coeffs[c][idx] = w;
            field.coeffs[c][partner] = w.conj();
        }
    }
    let norm = field.norm();
    if amplitude == 0.0 || norm == 0.0 {
        return Ok(SpectralField::zeros(grid));
    }
    Ok(field.scale(amplitude / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn random_field_invariants() {
        let g = make_grid(12, 2.0 * PI).unwrap();
        for seed in 0..5 {
            let u = random_solenoidal_field(&g, 1.5, 2.0, seed).unwrap();
            assert!(u.max_divergence_ratio() <= 1e-12);
            assert_eq!(u.hermitian_defect(), 0.0);
            assert_eq!(u.mean_defect(), 0.0);
            assert!((u.norm() - 2.0).abs() < 1e-12);
            for idx in 0..g.len() {
                if !g.retained(idx) {
                    assert!((0..3).all(|c| u.component(c)[idx] == ZERO));
                }
            }
        }
    }

    #[test]
    fn random_field_deterministic_and_zero_amplitude() {
        let g = make_grid(8, 1.0).unwrap();
        let a = random_solenoidal_field(&g, 1.0, 1.0, 42).unwrap();
        let b = random_solenoidal_field(&g, 1.0, 1.0, 42).unwrap();
        for c in 0..3 {
            assert_eq!(a.component(c), b.component(c));
        }
        assert!(random_solenoidal_field(&g, 1.0, 0.0, 42).unwrap().is_zero());
        assert!(random_solenoidal_field(&g, 0.0, 1.0, 42).is_err());
    }

    #[test]
    fn physical_round_trip_and_parseval() {
        let g = make_grid(12, 2.0 * PI).unwrap();
        let u = random_solenoidal_field(&g, 1.0, 3.0, 7).unwrap();
        let phys = u.to_physical();
        let quad: f64 = (0..g.len())
            .map(|p| (0..3).map(|c| phys[c][p].powi(2)).sum::<f64>())
            .sum::<f64>()
            * g.volume()
            / g.len() as f64;
        assert!((quad - u.norm_sq()).abs() <= 1e-10 * u.norm_sq());
        let back = SpectralField::from_physical(&g, &phys);
        assert!(back.sub(&u).unwrap().norm() <= 1e-12 * u.norm());
    }

    #[test]
    fn from_fn_single_mode() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let u = SpectralField::from_fn(&g, |x| [0.0, x[0].sin(), 0.0]);
        // sin x = (e^{ix} - e^{-ix}) / 2i
        let idx = g.index_of_mode([1, 0, 0]).unwrap();
        assert!((u.component(1)[idx] - Complex64::new(0.0, -0.5)).norm() < 1e-14);
    }
}
