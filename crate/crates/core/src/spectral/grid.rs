use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::SpectralError;

/// Cubic periodic box `(0, L)^3` sampled with `N` points per direction.
///
/// Coefficient arrays are stored x-major: flat index `(i * N + j) * N + l`
/// for lattice indices `(i, j, l)`, each mapping to the signed integer mode
/// `m = i` for `i < N/2` and `m = i - N` otherwise.
pub struct WaveGrid {
    n: usize,
    period: f64,
    /// Signed wavenumber per 1D index, already scaled by 2π/L.
    axis_k: Vec<f64>,
    k2: Vec<f64>,
    dealias: Vec<bool>,
    nyquist: Vec<bool>,
    lambda1: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl WaveGrid {
    pub fn new(n: usize, period: f64) -> Result<Self, SpectralError> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(SpectralError::InvalidResolution(n));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(SpectralError::InvalidPeriod(period));
        }
        let scale = 2.0 * PI / period;
        let half = n / 2;
        let axis_m: Vec<i64> = (0..n)
            .map(|i| if i < half { i as i64 } else { i as i64 - n as i64 })
            .collect();
        let axis_k: Vec<f64> = axis_m.iter().map(|&m| scale * m as f64).collect();
        let cutoff = n as f64 / 3.0;

        let total = n * n * n;
        let mut k2 = Vec::with_capacity(total);
        let mut dealias = Vec::with_capacity(total);
        let mut nyquist = Vec::with_capacity(total);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let (kx, ky, kz) = (axis_k[i], axis_k[j], axis_k[l]);
                    k2.push(kx * kx + ky * ky + kz * kz);
                    dealias.push(
                        [axis_m[i], axis_m[j], axis_m[l]]
                            .iter()
                            .all(|&m| (m.abs() as f64) < cutoff),
                    );
                    nyquist.push(i == half || j == half || l == half);
                }
            }
        }

        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            period,
            axis_k,
            k2,
            dealias,
            nyquist,
            lambda1: scale * scale,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Number of lattice points, `N^3`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Box volume `L^3`.
    #[inline]
    pub fn volume(&self) -> f64 {
        self.period.powi(3)
    }

    /// Smallest Stokes eigenvalue on zero-mean fields, `(2π/L)^2`.
    #[inline]
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.n + l
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Index of the mode `-k` paired with `idx` under the reality condition.
    #[inline]
    pub fn partner(&self, idx: usize) -> usize {
        let n = self.n;
        let (i, j, l) = self.unflatten(idx);
        self.index((n - i) % n, (n - j) % n, (n - l) % n)
    }

    /// Index of the lattice point carrying the signed integer mode `m`.
    pub fn index_of_mode(&self, m: [i64; 3]) -> Option<usize> {
        let n = self.n as i64;
        let mut ids = [0usize; 3];
        for (slot, &mi) in ids.iter_mut().zip(m.iter()) {
            if mi.abs() >= n / 2 {
                return None;
            }
            *slot = mi.rem_euclid(n) as usize;
        }
        Some(self.index(ids[0], ids[1], ids[2]))
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let (i, j, l) = self.unflatten(idx);
        [self.axis_k[i], self.axis_k[j], self.axis_k[l]]
    }

    #[inline]
    pub fn k2(&self, idx: usize) -> f64 {
        self.k2[idx]
    }

    pub fn k2_all(&self) -> &[f64] {
        &self.k2
    }

    /// Two-thirds rule: true when every `|m_i| < N/3`.
    #[inline]
    pub fn retained(&self, idx: usize) -> bool {
        self.dealias[idx]
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias
    }

    /// True on the planes `i = N/2`, `j = N/2` or `l = N/2`.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.nyquist[idx]
    }

    pub fn axis_wavenumbers(&self) -> &[f64] {
        &self.axis_k
    }

    /// Largest wavenumber magnitude along one axis, `(2π/L) N/2`.
    pub fn k_max(&self) -> f64 {
        2.0 * PI / self.period * (self.n / 2) as f64
    }

    /// Same `N` and `L`.
    pub fn same_as(&self, other: &WaveGrid) -> bool {
        self.n == other.n && self.period.to_bits() == other.period.to_bits()
    }

    /// In-place 3D transform along all three axes. Unnormalized.
    pub(crate) fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let fft = if inverse { &self.inverse } else { &self.forward };
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        // z is contiguous
        fft.process_with_scratch(data, &mut scratch);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        // y
        for i in 0..n {
            for l in 0..n {
                for j in 0..n {
                    line[j] = data[(i * n + j) * n + l];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for j in 0..n {
                    data[(i * n + j) * n + l] = line[j];
                }
            }
        }
        // x
        for j in 0..n {
            for l in 0..n {
                for i in 0..n {
                    line[i] = data[(i * n + j) * n + l];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for i in 0..n {
                    data[(i * n + j) * n + l] = line[i];
                }
            }
        }
    }
}

impl fmt::Debug for WaveGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveGrid")
            .field("n", &self.n)
            .field("period", &self.period)
            .field("lambda1", &self.lambda1)
            .finish()
    }
}

impl PartialEq for WaveGrid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

/// Builds a shared grid; see [`WaveGrid::new`] for the accepted range.
pub fn make_grid(n: usize, period: f64) -> Result<Arc<WaveGrid>, SpectralError> {
    WaveGrid::new(n, period).map(Arc::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda1_from_period() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        assert!((g.lambda1() - 1.0).abs() < 1e-15);
        let g = make_grid(16, PI).unwrap();
        assert!((g.lambda1() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            make_grid(5, 1.0),
            Err(SpectralError::InvalidResolution(5))
        ));
        assert!(make_grid(2, 1.0).is_err());
        assert!(make_grid(8, 0.0).is_err());
        assert!(make_grid(8, -1.0).is_err());
    }

    #[test]
    fn lambda1_is_min_nonzero_k2() {
        for &(n, period) in &[(4usize, 1.0), (8, 2.0 * PI), (12, 3.5)] {
            let g = make_grid(n, period).unwrap();
            let min = g
                .k2_all()
                .iter()
                .copied()
                .filter(|&v| v > 0.0)
                .fold(f64::INFINITY, f64::min);
            assert!((min - g.lambda1()).abs() <= 1e-12 * g.lambda1());
        }
    }

    #[test]
    fn dealias_mask_two_thirds() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        // 16/3 = 5.33: |m| <= 5 kept on each axis
        let kept_per_axis = (0..16)
            .filter(|&i| g.retained(g.index(i, 0, 0)))
            .count();
        assert_eq!(kept_per_axis, 11);
        assert_eq!(g.dealias_mask().iter().filter(|&&b| b).count(), 11 * 11 * 11);
        for idx in 0..g.len() {
            let k = g.wavevector(idx);
            let expect = k.iter().all(|&c| c.abs() < 16.0 / 3.0);
            assert_eq!(g.retained(idx), expect);
        }
    }

    #[test]
    fn partner_is_involution() {
        let g = make_grid(6, 1.0).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.partner(g.partner(idx)), idx);
            let (k, kp) = (g.wavevector(idx), g.wavevector(g.partner(idx)));
            if !g.is_nyquist(idx) {
                for c in 0..3 {
                    assert_eq!(k[c], -kp[c]);
                }
            }
        }
    }

    #[test]
    fn transform_round_trip() {
        let g = make_grid(6, 1.0).unwrap();
        let orig: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut data = orig.clone();
        g.transform(&mut data, false);
        g.transform(&mut data, true);
        let norm = g.len() as f64;
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / norm - b).norm() < 1e-13);
        }
    }
}
