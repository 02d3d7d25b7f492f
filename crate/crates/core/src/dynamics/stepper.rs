use std::sync::Arc;

use num_complex::Complex64;

use super::PhysicsParams;
use crate::error::DynamicsError;
use crate::spectral::{advection_with_speed, nonlinear_term, SpectralField, WaveGrid};

const COURANT_LIMIT: f64 = 0.5;

/// Which linear dissipation the stepper exponentiates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinearPart {
    /// `ν|k|^2 + ε|k|^{2l}`.
    Regularized { nu: f64, eps: f64, l: f64 },
    /// `ν|k|^2` only.
    Conventional { nu: f64 },
}

impl LinearPart {
    pub fn from_params(p: &PhysicsParams) -> Self {
        LinearPart::Regularized {
            nu: p.nu,
            eps: p.eps,
            l: p.l,
        }
    }

    #[inline]
    pub fn symbol(&self, k2: f64) -> f64 {
        match *self {
            LinearPart::Regularized { nu, eps, l } => nu * k2 + eps * k2.powf(l),
            LinearPart::Conventional { nu } => nu * k2,
        }
    }
}

/// `(e^z - 1) / z`.
fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// `(e^z - 1 - z) / z^2`, by series near zero.
fn phi2(z: f64) -> f64 {
    if z.abs() < 0.5 {
        // Σ z^n / (n + 2)!
        let mut term = 0.5;
        let mut acc = 0.0;
        for n in 0..24 {
            acc += term;
            term *= z / (n as f64 + 3.0);
        }
        acc
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// Second-order exponential Runge–Kutta step (ETD2RK) for
/// `∂_t û = -λ_k û + N̂(u)`, `N(u) = f - B(u, u)`.
///
/// The linear symbol `λ_k` is integrated exactly, so the scheme is exact for
/// any `dt` when `N` is constant along the step (no advection, static
/// forcing).
pub struct Stepper {
    grid: Arc<WaveGrid>,
    forcing: SpectralField,
    linear: LinearPart,
    symbol: Vec<f64>,
    decay: Vec<f64>,
    phi1_dt: Vec<f64>,
    phi2_dt: Vec<f64>,
    dt: f64,
}

/// Result of one step: the new state and `N(u_n)` at the start of the step.
pub struct StepOutput {
    pub next: SpectralField,
    pub explicit_start: SpectralField,
}

impl Stepper {
    pub fn new(params: &PhysicsParams, dt: f64) -> Result<Self, DynamicsError> {
        Self::with_linear(params, LinearPart::from_params(params), dt)
    }

    /// Stepper for the unregularized system; `params.eps` is ignored.
    pub fn conventional(params: &PhysicsParams, dt: f64) -> Result<Self, DynamicsError> {
        Self::with_linear(params, LinearPart::Conventional { nu: params.nu }, dt)
    }

    fn with_linear(
        params: &PhysicsParams,
        linear: LinearPart,
        dt: f64,
    ) -> Result<Self, DynamicsError> {
        params.validate()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(DynamicsError::InvalidStep(dt));
        }
        let forcing = params.forcing.effective();
        let grid = forcing.grid().clone();
        let len = grid.len();
        let mut symbol = Vec::with_capacity(len);
        let mut decay = Vec::with_capacity(len);
        let mut phi1_dt = Vec::with_capacity(len);
        let mut phi2_dt = Vec::with_capacity(len);
        for &k2 in grid.k2_all() {
            let lam = linear.symbol(k2);
            let z = -lam * dt;
            symbol.push(lam);
            decay.push(z.exp());
            phi1_dt.push(dt * phi1(z));
            phi2_dt.push(dt * phi2(z));
        }
        Ok(Self {
            grid,
            forcing,
            linear,
            symbol,
            decay,
            phi1_dt,
            phi2_dt,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        &self.grid
    }

    pub fn linear(&self) -> LinearPart {
        self.linear
    }

    pub fn forcing(&self) -> &SpectralField {
        &self.forcing
    }

    /// Linear symbol `λ_k` per flat mode index.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// `N(u) = f - B(u, u)` and the peak speed of `u`.
    pub fn explicit_part(&self, u: &SpectralField) -> (SpectralField, f64) {
        let (b, speed) = advection_with_speed(u);
        let n = self
            .forcing
            .sub(&b)
            .expect("state and forcing share one grid");
        (n, speed)
    }

    /// `∂_t u = -λ u + N(u)` given a precomputed `N(u)`.
    pub fn time_derivative(&self, u: &SpectralField, explicit: &SpectralField) -> SpectralField {
        let mut out = explicit.clone();
        for c in 0..3 {
            let src = u.component(c);
            for (idx, v) in out.coeffs_mut()[c].iter_mut().enumerate() {
                *v -= src[idx] * self.symbol[idx];
            }
        }
        out
    }

    pub fn step(&self, u: &SpectralField, time: f64) -> Result<StepOutput, DynamicsError> {
        u.check_grid(&self.forcing)?;
        let (n0, speed) = self.explicit_part(u);
        let courant = self.dt * speed * self.grid.k_max();
        if courant > COURANT_LIMIT {
            return Err(DynamicsError::Cfl { courant, time });
        }
        let len = self.grid.len();
        let mut stage = SpectralField::zeros(&self.grid);
        for c in 0..3 {
            let (src, nl) = (u.component(c), n0.component(c));
            let dst = &mut stage.coeffs_mut()[c];
            for idx in 0..len {
                dst[idx] = src[idx] * self.decay[idx] + nl[idx] * self.phi1_dt[idx];
            }
        }
        let (n1, _) = self.explicit_part(&stage);
        let mut next = stage;
        for c in 0..3 {
            let (a, b) = (n0.component(c), n1.component(c));
            let dst = &mut next.coeffs_mut()[c];
            for idx in 0..len {
                let corr: Complex64 = (b[idx] - a[idx]) * self.phi2_dt[idx];
                dst[idx] += corr;
            }
        }
        Ok(StepOutput {
            next,
            explicit_start: n0,
        })
    }
}

/// `f - ε A^l u - ν A u - B(u, u)`.
pub fn rhs(u: &SpectralField, params: &PhysicsParams) -> Result<SpectralField, DynamicsError> {
    let f = params.forcing.effective();
    u.check_grid(&f)?;
    let linear = LinearPart::from_params(params);
    let grid = u.grid().clone();
    let damped = u.map_modes(|idx| linear.symbol(grid.k2(idx)));
    Ok(f.sub(&damped)?.sub(&nonlinear_term(u))?)
}

/// One regularized step of size `dt` from `u`.
pub fn step(u: &SpectralField, params: &PhysicsParams, dt: f64) -> Result<SpectralField, DynamicsError> {
    Ok(Stepper::new(params, dt)?.step(u, 0.0)?.next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Forcing;
    use crate::spectral::{make_grid, shear_flow};
    use std::f64::consts::PI;

    #[test]
    fn phi_functions_are_smooth_across_series_switch() {
        for &z in &[-0.499_999f64, -0.5, -0.500_001, -2.0, -30.0] {
            let direct = (z.exp_m1() - z) / (z * z);
            assert!((phi2(z) - direct).abs() < 1e-14, "z = {z}");
        }
        let z = -1e-6f64;
        assert!((phi2(z) - (0.5 + z / 6.0)).abs() < 1e-13);
        assert_eq!(phi1(0.0), 1.0);
        assert!((phi2(0.0) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn zero_rhs_for_zero_state() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let p = PhysicsParams::new(1.0, 0.1, 2.0, Forcing::zero(&g)).unwrap();
        let u = SpectralField::zeros(&g);
        assert!(rhs(&u, &p).unwrap().is_zero());
        assert!(step(&u, &p, 0.1).unwrap().is_zero());
    }

    #[test]
    fn shear_rhs_is_pure_damping() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let p = PhysicsParams::new(0.7, 0.3, 2.5, Forcing::zero(&g)).unwrap();
        let u = shear_flow(&g, 2.0);
        let r = rhs(&u, &p).unwrap();
        let expect = u.scale(-(0.7 + 0.3));
        assert!(r.sub(&expect).unwrap().norm() < 1e-13 * u.norm());
    }

    #[test]
    fn shear_step_is_exact_decay() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let p = PhysicsParams::new(1.0, 0.5, 2.0, Forcing::zero(&g)).unwrap();
        let u = shear_flow(&g, 0.01);
        for dt in [0.01, 0.3, 2.0] {
            let next = step(&u, &p, dt).unwrap();
            let expect = u.scale((-1.5 * dt).exp());
            assert!(next.sub(&expect).unwrap().norm() <= 1e-14 * u.norm(), "dt = {dt}");
        }
    }

    #[test]
    fn forced_shell_step_is_exact() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let f = shear_flow(&g, 0.4);
        let p = PhysicsParams::new(1.2, 0.1, 2.0, Forcing::new(f.clone())).unwrap();
        let u0 = shear_flow(&g, -0.1);
        let lam = 1.3;
        let dt = 0.9;
        let next = step(&u0, &p, dt).unwrap();
        // û(t) = e^{-λt} û₀ + (1 - e^{-λt}) f̂ / λ
        let expect = u0
            .scale((-lam * dt).exp())
            .axpy((1.0 - (-lam * dt).exp()) / lam, &f)
            .unwrap();
        assert!(next.sub(&expect).unwrap().norm() < 1e-14);
    }

    #[test]
    fn cfl_violation_refused() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let p = PhysicsParams::new(1.0, 0.0, 2.0, Forcing::zero(&g)).unwrap();
        let u = shear_flow(&g, 10.0);
        assert!(matches!(step(&u, &p, 1.0), Err(DynamicsError::Cfl { .. })));
    }

    #[test]
    fn bad_params_rejected() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        assert!(PhysicsParams::new(0.0, 0.0, 2.0, Forcing::zero(&g)).is_err());
        assert!(PhysicsParams::new(1.0, -0.1, 2.0, Forcing::zero(&g)).is_err());
        assert!(PhysicsParams::new(1.0, 0.1, 0.5, Forcing::zero(&g)).is_err());
        let grad = SpectralField::from_fn(&g, |x| [x[0].cos(), 0.0, 0.0]);
        assert!(PhysicsParams::new(1.0, 0.1, 2.0, Forcing::new(grad)).is_err());
        let p = PhysicsParams::new(1.0, 0.1, 2.0, Forcing::zero(&g)).unwrap();
        assert!(matches!(Stepper::new(&p, 0.0), Err(DynamicsError::InvalidStep(_))));
    }
}
