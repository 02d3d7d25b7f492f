use log::debug;

use super::stepper::Stepper;
use super::PhysicsParams;
use crate::error::DynamicsError;
use crate::spectral::SpectralField;

/// Growth over the absorbing-ball envelope tolerated before a run is
/// declared blown up.
pub const BLOWUP_FACTOR: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub field: SpectralField,
}

/// Scalar diagnostics recorded at every step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormSeries {
    /// `‖u‖²`
    pub energy: Vec<f64>,
    /// `‖u‖₁² = ‖∇u‖²`
    pub enstrophy: Vec<f64>,
    /// `‖A^{l/2} u‖²`
    pub hyper: Vec<f64>,
    /// `‖A^{(l+1)/2} u‖²`
    pub hyper_grad: Vec<f64>,
    /// `(f, u)`
    pub work: Vec<f64>,
    /// `‖∂_t u‖_{D(A^l)'}`
    pub dual_dt: Vec<f64>,
}

impl NormSeries {
    pub fn len(&self) -> usize {
        self.energy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energy.is_empty()
    }

    fn push(&mut self, rec: SampleNorms) {
        self.energy.push(rec.energy);
        self.enstrophy.push(rec.enstrophy);
        self.hyper.push(rec.hyper);
        self.hyper_grad.push(rec.hyper_grad);
        self.work.push(rec.work);
        self.dual_dt.push(rec.dual_dt);
    }

    fn is_consistent(&self) -> bool {
        let n = self.energy.len();
        [&self.enstrophy, &self.hyper, &self.hyper_grad, &self.work, &self.dual_dt]
            .iter()
            .all(|s| s.len() == n)
    }
}

struct SampleNorms {
    energy: f64,
    enstrophy: f64,
    hyper: f64,
    hyper_grad: f64,
    work: f64,
    dual_dt: f64,
}

fn sample_norms(
    stepper: &Stepper,
    l: f64,
    u: &SpectralField,
    explicit: &SpectralField,
) -> SampleNorms {
    let grid = stepper.grid();
    let f = stepper.forcing();
    let symbol = stepper.symbol();
    let vol = grid.volume();
    let (mut e, mut z, mut h, mut hg, mut w, mut d) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for idx in 0..grid.len() {
        let k2 = grid.k2(idx);
        if k2 == 0.0 {
            continue;
        }
        let mut amp = 0.0;
        let mut work = 0.0;
        let mut dt2 = 0.0;
        for c in 0..3 {
            let uc = u.component(c)[idx];
            amp += uc.norm_sqr();
            work += (f.component(c)[idx] * uc.conj()).re;
            dt2 += (explicit.component(c)[idx] - uc * symbol[idx]).norm_sqr();
        }
        let kl = k2.powf(l);
        e += amp;
        z += k2 * amp;
        h += kl * amp;
        hg += kl * k2 * amp;
        w += work;
        d += dt2 / (kl * kl);
    }
    SampleNorms {
        energy: e * vol,
        enstrophy: z * vol,
        hyper: h * vol,
        hyper_grad: hg * vol,
        work: w * vol,
        dual_dt: (d * vol).sqrt(),
    }
}

/// Discrete trajectory: dense scalar series at every step and full fields
/// every `snapshot_stride` steps.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub series: NormSeries,
    pub snapshots: Vec<Snapshot>,
    pub dt: f64,
    pub snapshot_stride: usize,
    pub params: PhysicsParams,
    /// `‖f^ε‖` of the forcing that drove the run.
    pub forcing_norm: f64,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one sample")
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t_start()
    }

    pub fn final_snapshot(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    /// `‖u(t)‖` series.
    pub fn norms(&self) -> Vec<f64> {
        self.series.energy.iter().map(|e| e.sqrt()).collect()
    }

    /// Checks the structural invariants: increasing times, equal series
    /// lengths, solenoidal snapshots.
    pub fn is_well_formed(&self) -> bool {
        self.times.windows(2).all(|w| w[1] > w[0])
            && self.series.is_consistent()
            && self.series.len() == self.times.len()
            && self.snapshots.iter().all(|s| s.field.max_divergence_ratio() <= 1e-10)
    }
}

fn step_count(t_final: f64, dt: f64) -> Result<usize, DynamicsError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DynamicsError::InvalidStep(dt));
    }
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(DynamicsError::InvalidParams(format!("T = {t_final}")));
    }
    let steps = (t_final / dt).round();
    if steps < 1.0 || (steps * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(DynamicsError::MisalignedHorizon { t_final, dt });
    }
    Ok(steps as usize)
}

/// Integrates from `u0` at time 0 over `[0, t_final]`.
pub fn integrate(
    u0: &SpectralField,
    params: &PhysicsParams,
    t_final: f64,
    dt: f64,
    snapshot_stride: usize,
) -> Result<Trajectory, DynamicsError> {
    let stepper = Stepper::new(params, dt)?;
    integrate_with(&stepper, params, u0, 0.0, t_final, snapshot_stride)
}

/// Same as [`integrate`] but with the unregularized dissipation `ν A` only.
pub fn integrate_conventional(
    u0: &SpectralField,
    params: &PhysicsParams,
    t_final: f64,
    dt: f64,
    snapshot_stride: usize,
) -> Result<Trajectory, DynamicsError> {
    let stepper = Stepper::conventional(params, dt)?;
    integrate_with(&stepper, params, u0, 0.0, t_final, snapshot_stride)
}

/// Integrates with a prepared stepper from `u0` at `t_start` for `duration`.
///
/// Time only labels samples (the system is autonomous), so continuing a run
/// from its final state reproduces a single longer run bit for bit.
pub fn integrate_with(
    stepper: &Stepper,
    params: &PhysicsParams,
    u0: &SpectralField,
    t_start: f64,
    duration: f64,
    snapshot_stride: usize,
) -> Result<Trajectory, DynamicsError> {
    let dt = stepper.dt();
    let steps = step_count(duration, dt)?;
    let stride = snapshot_stride.max(1);
    u0.check_grid(stepper.forcing())?;

    let forcing_norm = stepper.forcing().norm();
    let rho0 = forcing_norm / (params.nu * stepper.grid().lambda1());
    let limit = BLOWUP_FACTOR * u0.norm().max(rho0);

    let mut times = Vec::with_capacity(steps + 1);
    let mut series = NormSeries::default();
    let mut snapshots = Vec::new();
    let mut u = u0.clone();
    for i in 0..=steps {
        let time = t_start + i as f64 * dt;
        if !u.is_finite() {
            return Err(DynamicsError::BlowUp {
                time,
                norm: f64::NAN,
                limit,
            });
        }
        let norm = u.norm();
        if limit > 0.0 && norm > limit {
            return Err(DynamicsError::BlowUp { time, norm, limit });
        }
        if i % stride == 0 {
            snapshots.push(Snapshot {
                time,
                field: u.clone(),
            });
        }
        times.push(time);
        if i == steps {
            let (explicit, _) = stepper.explicit_part(&u);
            series.push(sample_norms(stepper, params.l, &u, &explicit));
            break;
        }
        let out = stepper.step(&u, time)?;
        series.push(sample_norms(stepper, params.l, &u, &out.explicit_start));
        u = out.next;
    }
    debug!(
        "integrated {steps} steps of {dt} from t = {t_start}, final |u| = {:e}",
        series.energy.last().copied().unwrap_or(0.0).sqrt()
    );
    Ok(Trajectory {
        times,
        series,
        snapshots,
        dt,
        snapshot_stride: stride,
        params: params.clone(),
        forcing_norm,
    })
}

/// Marches `u_init` forward until `‖rhs(u)‖ ≤ tol`.
///
/// The step starts at 0.1 and is halved whenever the CFL limit would be
/// exceeded.
pub fn steady_state(
    params: &PhysicsParams,
    u_init: &SpectralField,
    tol: f64,
    t_max: f64,
) -> Result<SpectralField, DynamicsError> {
    if !(tol > 0.0) {
        return Err(DynamicsError::InvalidParams(format!("tol = {tol}")));
    }
    let mut dt = 0.1;
    let mut stepper = Stepper::new(params, dt)?;
    let mut u = u_init.clone();
    let mut time = 0.0;
    let mut residual;
    loop {
        let (explicit, _) = stepper.explicit_part(&u);
        residual = stepper.time_derivative(&u, &explicit).norm();
        if !residual.is_finite() {
            return Err(DynamicsError::BlowUp {
                time,
                norm: u.norm(),
                limit: f64::INFINITY,
            });
        }
        if residual <= tol {
            return Ok(u);
        }
        if time >= t_max {
            break;
        }
        match stepper.step(&u, time) {
            Ok(out) => {
                u = out.next;
                time += dt;
            }
            Err(DynamicsError::Cfl { .. }) if dt > 1e-8 => {
                dt *= 0.5;
                stepper = Stepper::new(params, dt)?;
            }
            Err(e) => return Err(e),
        }
    }
    Err(DynamicsError::NotConverged {
        t_max,
        residual,
        tol,
    })
}
