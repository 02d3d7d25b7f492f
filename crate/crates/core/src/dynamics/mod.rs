//! Time integration of `∂_t u + ε A^l u + ν A u + B(u, u) = f`.

mod stepper;
mod trajectory;

use crate::error::DynamicsError;
use crate::spectral::{leray_project, SpectralField};

pub use stepper::{rhs, step, LinearPart, Stepper};
pub use trajectory::{
    integrate, integrate_conventional, integrate_with, steady_state, NormSeries, Snapshot,
    Trajectory,
};

/// Static forcing `f^ε = f + δ g`.
#[derive(Clone, Debug)]
pub struct Forcing {
    pub base: SpectralField,
    pub perturbation: Option<Perturbation>,
}

#[derive(Clone, Debug)]
pub struct Perturbation {
    pub field: SpectralField,
    pub delta: f64,
}

impl Forcing {
    pub fn new(base: SpectralField) -> Self {
        Self {
            base,
            perturbation: None,
        }
    }

    pub fn zero(grid: &std::sync::Arc<crate::spectral::WaveGrid>) -> Self {
        Self::new(SpectralField::zeros(grid))
    }

    pub fn with_perturbation(mut self, field: SpectralField, delta: f64) -> Self {
        self.perturbation = Some(Perturbation { field, delta });
        self
    }

    /// The field actually driving the flow, `f + δ g`.
    pub fn effective(&self) -> SpectralField {
        match &self.perturbation {
            Some(p) if p.delta != 0.0 => self
                .base
                .axpy(p.delta, &p.field)
                .expect("forcing components share one grid"),
            _ => self.base.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PhysicsParams {
    /// Kinematic viscosity ν.
    pub nu: f64,
    /// Artificial dissipation ε; zero gives the conventional system.
    pub eps: f64,
    /// Hyperviscosity exponent l.
    pub l: f64,
    pub forcing: Forcing,
}

impl PhysicsParams {
    pub fn new(nu: f64, eps: f64, l: f64, forcing: Forcing) -> Result<Self, DynamicsError> {
        let p = Self { nu, eps, l, forcing };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(DynamicsError::InvalidParams(format!("nu = {}", self.nu)));
        }
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(DynamicsError::InvalidParams(format!("eps = {}", self.eps)));
        }
        if !(self.l >= 1.0) || !self.l.is_finite() {
            return Err(DynamicsError::InvalidParams(format!("l = {}", self.l)));
        }
        let f = &self.forcing;
        let mut parts = vec![&f.base];
        if let Some(p) = &f.perturbation {
            if !(p.delta >= 0.0) {
                return Err(DynamicsError::InvalidParams(format!("delta = {}", p.delta)));
            }
            f.base.check_grid(&p.field)?;
            parts.push(&p.field);
        }
        for part in parts {
            let projected = leray_project(part);
            let scale = part.norm().max(f64::MIN_POSITIVE);
            if projected.sub(part)?.norm() > 1e-10 * scale {
                return Err(DynamicsError::InvalidParams(
                    "forcing must be solenoidal and zero-mean".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self {
            eps,
            ..self.clone()
        }
    }

    pub fn lambda1(&self) -> f64 {
        self.forcing.base.grid().lambda1()
    }

    /// `‖f^ε‖` of the effective forcing.
    pub fn forcing_norm(&self) -> f64 {
        self.forcing.effective().norm()
    }

    /// Asymptotic radius `ρ₀ = ‖f‖ / (ν λ₁)`.
    pub fn rho0(&self) -> f64 {
        self.forcing_norm() / (self.nu * self.lambda1())
    }
}
