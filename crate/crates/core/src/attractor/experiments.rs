use log::warn;
use rayon::prelude::*;

use super::metrics::{directed_hausdorff, field_distance, MetricSpec};
use super::TrajectorySet;
use crate::dynamics::{integrate, integrate_with, Forcing, PhysicsParams, Stepper};
use crate::error::{DynamicsError, LabError};
use crate::estimates::quadrature::cumulative;
use crate::estimates::{RADIUS_FACTOR, TRAILING_FRACTION};
use crate::spectral::{sobolev_norm, SpectralField};

/// Directed semidistance between two attractor proxies.
pub fn hausdorff_semidistance(
    x: &TrajectorySet,
    y: &TrajectorySet,
    m: &MetricSpec,
) -> Result<f64, LabError> {
    if x.points.is_empty() || y.points.is_empty() {
        return Err(LabError::EmptySet);
    }
    x.points[0].check_grid(&y.points[0])?;
    directed_hausdorff(&x.points, &y.points, |a, b| {
        field_distance(a, b, m.norm_index).unwrap_or(f64::NAN)
    })
}

/// Least-squares slope of `ln y` against `ln x` over positive pairs.
pub fn loglog_slope(points: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .into_iter()
        .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// True when no step along the sequence grows by more than 10%.
pub fn non_increasing_trend(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= 1.1 * w[0])
}

fn check_decreasing(eps_list: &[f64]) -> Result<(), LabError> {
    if eps_list.is_empty() {
        return Err(LabError::InvalidSetup("empty eps list".into()));
    }
    if eps_list.iter().any(|&e| !(e >= 0.0) || !e.is_finite()) {
        return Err(LabError::InvalidSetup("eps values must be nonnegative".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(LabError::InvalidSetup("eps list must be strictly decreasing".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    /// `(∫₀ᵀ ‖u^ε - u⁰‖² dt)^{1/2}`; NaN when the run failed.
    pub error: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<SweepRow>,
    pub slope: Option<f64>,
}

/// Strong `L²(0,T;V₀)` distance between the regularized and conventional
/// solutions from a shared initial field, for each `ε`.
///
/// Fields are compared every `stride` steps.
pub fn convergence_sweep(
    u0: &SpectralField,
    p_base: &PhysicsParams,
    eps_list: &[f64],
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<ConvergenceTable, LabError> {
    if p_base.l < 1.5 {
        return Err(LabError::InvalidSetup(format!(
            "strong convergence needs l >= 3/2, got {}",
            p_base.l
        )));
    }
    check_decreasing(eps_list)?;
    let baseline = integrate(u0, &p_base.with_eps(0.0), t_final, dt, stride)?;
    let rows: Vec<SweepRow> = eps_list
        .par_iter()
        .map(|&eps| {
            let run = integrate(u0, &p_base.with_eps(eps), t_final, dt, stride);
            match run {
                Ok(traj) => {
                    let sq: Vec<f64> = traj
                        .snapshots
                        .iter()
                        .zip(&baseline.snapshots)
                        .map(|(a, b)| a.field.sub(&b.field).map(|d| d.norm_sq()))
                        .collect::<Result<_, _>>()
                        .unwrap_or_default();
                    let h = dt * traj.snapshot_stride as f64;
                    let total = cumulative(&sq, h).last().copied().unwrap_or(0.0);
                    SweepRow {
                        eps,
                        error: total.max(0.0).sqrt(),
                        ok: true,
                    }
                }
                Err(e) => {
                    warn!("sweep member eps = {eps} failed: {e}");
                    SweepRow {
                        eps,
                        error: f64::NAN,
                        ok: false,
                    }
                }
            }
        })
        .collect();
    let slope = loglog_slope(rows.iter().filter(|r| r.ok).map(|r| (r.eps, r.error)));
    Ok(ConvergenceTable { rows, slope })
}

/// Initial data and forcing for one run of a continuity check.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub eps: f64,
    pub forcing: Forcing,
    pub u0: SpectralField,
}

#[derive(Clone, Debug)]
pub struct GronwallReport {
    /// Smallest constant with `‖w(t)‖² ≤ C (‖w(0)‖² + (2T/ν)‖g‖²)` on `[0, T]`.
    pub c1_star: f64,
    pub sup_w: f64,
    pub w0: f64,
    pub g: f64,
    pub holds: bool,
    pub times: Vec<f64>,
    pub w_norms: Vec<f64>,
}

/// Integrates two runs in lockstep and measures `w = u_a - u_b` against the
/// data mismatch `‖w(0)‖² + (2T/ν)‖g‖²`, `g = f_a - f_b`.
pub fn continuity_gronwall_check(
    a: &RunSpec,
    b: &RunSpec,
    nu: f64,
    l: f64,
    t_final: f64,
    dt: f64,
) -> Result<GronwallReport, LabError> {
    a.u0.check_grid(&b.u0)?;
    let pa = PhysicsParams::new(nu, a.eps, l, a.forcing.clone())?;
    let pb = PhysicsParams::new(nu, b.eps, l, b.forcing.clone())?;
    let sa = Stepper::new(&pa, dt)?;
    let sb = Stepper::new(&pb, dt)?;
    let steps = (t_final / dt).round() as usize;
    if steps == 0 || ((steps as f64) * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(DynamicsError::MisalignedHorizon { t_final, dt }.into());
    }

    let g = sa.forcing().sub(sb.forcing())?.norm();
    let (mut ua, mut ub) = (a.u0.clone(), b.u0.clone());
    let mut times = Vec::with_capacity(steps + 1);
    let mut w_norms = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = i as f64 * dt;
        if !ua.is_finite() || !ub.is_finite() {
            return Err(DynamicsError::BlowUp {
                time: t,
                norm: f64::NAN,
                limit: f64::INFINITY,
            }
            .into());
        }
        times.push(t);
        w_norms.push(ua.sub(&ub)?.norm());
        if i < steps {
            ua = sa.step(&ua, t)?.next;
            ub = sb.step(&ub, t)?.next;
        }
    }
    let w0 = w_norms[0];
    let sup_w = w_norms.iter().copied().fold(0.0, f64::max);
    let data = w0 * w0 + 2.0 * t_final / nu * g * g;
    let c1_star = if data > 0.0 {
        sup_w * sup_w / data
    } else if sup_w == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(GronwallReport {
        c1_star,
        sup_w,
        w0,
        g,
        holds: c1_star.is_finite(),
        times,
        w_norms,
    })
}

/// `sup_t ‖u^{ε_n}(t) - u^{ε₀}(t)‖` for each member of `eps_seq`, all runs
/// sharing the forcing and initial data of `base`.
pub fn continuity_sequence(
    base: &RunSpec,
    nu: f64,
    l: f64,
    eps_seq: &[f64],
    t_final: f64,
    dt: f64,
) -> Result<Vec<(f64, f64)>, LabError> {
    eps_seq
        .par_iter()
        .map(|&eps| {
            let run = RunSpec {
                eps,
                ..base.clone()
            };
            continuity_gronwall_check(&run, base, nu, l, t_final, dt).map(|r| (eps, r.sup_w))
        })
        .collect()
}

/// Protocol for sampling an omega-limit proxy.
#[derive(Clone, Debug)]
pub struct OmegaSampling {
    pub u0: SpectralField,
    /// Transient discarded before sampling.
    pub t1: f64,
    pub n_samples: usize,
    /// Time between kept snapshots.
    pub gap: f64,
    pub dt: f64,
    /// Largest admissible `t1 + (n_samples - 1) gap`.
    pub budget: f64,
    /// Absolute slack on the absorbing-ball inclusion.
    pub inclusion_tol: f64,
}

impl OmegaSampling {
    pub fn new(u0: SpectralField, t1: f64, n_samples: usize, gap: f64, dt: f64) -> Self {
        Self {
            u0,
            t1,
            n_samples,
            gap,
            dt,
            budget: 1e4,
            inclusion_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OmegaSample {
    pub set: TrajectorySet,
    /// `δ₀ = 1.1 ρ₀`, the V₀ absorbing radius.
    pub delta0: f64,
    /// `δ₁ = 1.1 R₁`, with `R₁` the trailing V₁ radius of the transient.
    pub delta1: f64,
    pub r1: f64,
    /// First time the transient entered `B_{δ₀}`, if it did.
    pub entry_time: Option<f64>,
    /// Samples outside `B_{δ₀} ∩ B_{δ₁}`.
    pub violations: usize,
}

pub fn omega_limit_sample(
    p: &PhysicsParams,
    sampling: &OmegaSampling,
) -> Result<OmegaSample, LabError> {
    let OmegaSampling {
        u0,
        t1,
        n_samples,
        gap,
        dt,
        budget,
        inclusion_tol,
    } = sampling;
    let (t1, gap, dt) = (*t1, *gap, *dt);
    if *n_samples == 0 {
        return Err(LabError::InvalidSetup("n_samples must be positive".into()));
    }
    let span = t1 + (*n_samples as f64 - 1.0) * gap;
    if span > *budget {
        return Err(LabError::InvalidSetup(format!(
            "t1 + (n - 1) gap = {span} exceeds budget {budget}"
        )));
    }
    let stride = (gap / dt).round() as usize;
    if *n_samples > 1 && (stride == 0 || ((stride as f64) * dt - gap).abs() > 1e-9 * gap.max(1.0)) {
        return Err(LabError::InvalidSetup(format!("gap {gap} is not a multiple of dt {dt}")));
    }

    let stepper = Stepper::new(p, dt)?;
    let transient_steps = (t1 / dt).round() as usize;
    let start = if t1 > 0.0 {
        let tr = integrate_with(&stepper, p, u0, 0.0, t1, transient_steps.max(1))?;
        let rho0 = tr.forcing_norm / (p.nu * p.lambda1());
        let delta0 = RADIUS_FACTOR * rho0;
        let entry = tr
            .series
            .energy
            .iter()
            .zip(&tr.times)
            .find(|(&e, _)| e.sqrt() <= delta0 + inclusion_tol)
            .map(|(_, &t)| t);
        let n = tr.series.len();
        let tail = n - 1 - ((n - 1) as f64 * TRAILING_FRACTION).floor() as usize;
        let r1 = tr.series.enstrophy[tail..]
            .iter()
            .fold(0.0f64, |a, &z| a.max(z.sqrt()));
        (tr.final_snapshot().expect("transient keeps its last state").field.clone(), entry, r1)
    } else {
        (u0.clone(), Some(0.0), sobolev_norm(u0, 1.0))
    };
    let (u_start, entry_time, r1) = start;
    if entry_time.is_none_or(|t| t > t1) {
        warn!("sampling starts at t1 = {t1} before the run entered the absorbing ball");
    }

    let points: Vec<(f64, SpectralField)> = if *n_samples == 1 {
        vec![(t1, u_start)]
    } else {
        let tail = integrate_with(
            &stepper,
            p,
            &u_start,
            t1,
            (*n_samples as f64 - 1.0) * gap,
            stride,
        )?;
        tail.snapshots
            .into_iter()
            .map(|s| (s.time, s.field))
            .take(*n_samples)
            .collect()
    };

    let rho0 = p.rho0();
    let delta0 = RADIUS_FACTOR * rho0;
    let delta1 = RADIUS_FACTOR * r1;
    let violations = points
        .iter()
        .filter(|(_, u)| {
            u.norm() > delta0 + inclusion_tol || sobolev_norm(u, 1.0) > delta1 + inclusion_tol
        })
        .count();
    if violations > 0 {
        warn!("{violations} omega-limit samples lie outside the absorbing balls");
    }
    let (times, fields): (Vec<f64>, Vec<SpectralField>) = points.into_iter().unzip();
    Ok(OmegaSample {
        set: TrajectorySet {
            points: fields,
            times,
            eps: p.eps,
            transient: t1,
            sample_gap: gap,
        },
        delta0,
        delta1,
        r1,
        entry_time,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemicontinuityRow {
    pub eps: f64,
    /// `dist(proxy(𝔄_ε), proxy(𝔄_0))` in V₀.
    pub dist: f64,
    pub inclusion_violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemicontinuityTable {
    pub rows: Vec<SemicontinuityRow>,
    /// No halving of ε raised the distance by more than 10%.
    pub monotone: bool,
    pub slope: Option<f64>,
}

/// Semidistance from each regularized attractor proxy to the conventional
/// one, under an identical sampling protocol.
pub fn semicontinuity_experiment(
    p_base: &PhysicsParams,
    eps_list: &[f64],
    sampling: &OmegaSampling,
) -> Result<SemicontinuityTable, LabError> {
    check_decreasing(eps_list)?;
    let metric = MetricSpec::default();
    let baseline = omega_limit_sample(&p_base.with_eps(0.0), sampling)?;
    let rows = eps_list
        .par_iter()
        .map(|&eps| {
            let proxy = omega_limit_sample(&p_base.with_eps(eps), sampling)?;
            Ok(SemicontinuityRow {
                eps,
                dist: hausdorff_semidistance(&proxy.set, &baseline.set, &metric)?,
                inclusion_violations: proxy.violations,
            })
        })
        .collect::<Result<Vec<_>, LabError>>()?;
    let dists: Vec<f64> = rows.iter().map(|r| r.dist).collect();
    Ok(SemicontinuityTable {
        monotone: non_increasing_trend(&dists),
        slope: loglog_slope(rows.iter().map(|r| (r.eps, r.dist))),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedRow {
    pub eps: f64,
    pub delta: f64,
    /// `‖f^ε - f‖`.
    pub forcing_gap: f64,
    /// Perturbed proxy to the unperturbed proxy at the same ε.
    pub dist_unperturbed: f64,
    /// Perturbed proxy to the unperturbed ε = 0 proxy.
    pub dist_baseline: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedReport {
    pub rows: Vec<PerturbedRow>,
    pub slope_unperturbed: Option<f64>,
    pub slope_baseline: Option<f64>,
    pub trend_ok: bool,
}

/// Attractor proxies under the static forcing family `f^ε = f + δ(ε) g`.
pub fn perturbed_forcing_experiment(
    p_base: &PhysicsParams,
    g: &SpectralField,
    delta_of_eps: impl Fn(f64) -> f64 + Sync,
    eps_list: &[f64],
    sampling: &OmegaSampling,
) -> Result<PerturbedReport, LabError> {
    check_decreasing(eps_list)?;
    let limit = delta_of_eps(0.0);
    if !(limit.abs() <= 1e-12) {
        return Err(LabError::InvalidSetup(format!(
            "delta(eps) must vanish as eps -> 0, delta(0) = {limit}"
        )));
    }
    if eps_list.iter().any(|&e| !(delta_of_eps(e) >= 0.0)) {
        return Err(LabError::InvalidSetup("delta(eps) must be nonnegative".into()));
    }
    let f = p_base.forcing.base.clone();
    f.check_grid(g)?;
    let unperturbed = PhysicsParams {
        forcing: Forcing::new(f.clone()),
        ..p_base.clone()
    };
    let metric = MetricSpec::default();
    let baseline = omega_limit_sample(&unperturbed.with_eps(0.0), sampling)?;
    let rows = eps_list
        .par_iter()
        .map(|&eps| {
            let delta = delta_of_eps(eps);
            let forcing = Forcing::new(f.clone()).with_perturbation(g.clone(), delta);
            let forcing_gap = forcing.effective().sub(&f)?.norm();
            let perturbed = PhysicsParams {
                eps,
                forcing,
                ..p_base.clone()
            };
            let pert = omega_limit_sample(&perturbed, sampling)?;
            let plain = omega_limit_sample(&unperturbed.with_eps(eps), sampling)?;
            Ok(PerturbedRow {
                eps,
                delta,
                forcing_gap,
                dist_unperturbed: hausdorff_semidistance(&pert.set, &plain.set, &metric)?,
                dist_baseline: hausdorff_semidistance(&pert.set, &baseline.set, &metric)?,
            })
        })
        .collect::<Result<Vec<_>, LabError>>()?;
    let du: Vec<f64> = rows.iter().map(|r| r.dist_unperturbed).collect();
    let db: Vec<f64> = rows.iter().map(|r| r.dist_baseline).collect();
    Ok(PerturbedReport {
        slope_unperturbed: loglog_slope(rows.iter().map(|r| (r.eps, r.dist_unperturbed))),
        slope_baseline: loglog_slope(rows.iter().map(|r| (r.eps, r.dist_baseline))),
        trend_ok: non_increasing_trend(&du) && non_increasing_trend(&db),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, random_solenoidal_field, shear_flow};
    use std::f64::consts::PI;

    fn shear_params(nu: f64, forcing_amp: f64) -> PhysicsParams {
        let grid = make_grid(8, 2.0 * PI).unwrap();
        PhysicsParams::new(nu, 0.0, 2.0, Forcing::new(shear_flow(&grid, forcing_amp))).unwrap()
    }

    #[test]
    fn slope_of_power_law() {
        let s = loglog_slope((1..6).map(|i| (i as f64, 3.0 * (i as f64).powf(1.5)))).unwrap();
        assert!((s - 1.5).abs() < 1e-12);
        assert!(loglog_slope([(1.0, 1.0)]).is_none());
        assert!(non_increasing_trend(&[1.0, 1.05, 0.5]));
        assert!(!non_increasing_trend(&[1.0, 1.2]));
    }

    #[test]
    fn sweep_rejects_bad_setup() {
        let p = shear_params(1.0, 0.0);
        let u0 = shear_flow(p.forcing.base.grid(), 1.0);
        assert!(convergence_sweep(&u0, &p, &[0.1, 0.2], 1.0, 0.1, 1).is_err());
        let low = PhysicsParams { l: 1.0, ..p };
        assert!(convergence_sweep(&u0, &low, &[0.1], 1.0, 0.1, 1).is_err());
    }

    #[test]
    fn shear_sweep_matches_closed_form() {
        let (nu, a, t) = (0.5, 1.0, 2.0);
        let p = shear_params(nu, 0.0);
        let u0 = shear_flow(p.forcing.base.grid(), a);
        let table = convergence_sweep(&u0, &p, &[0.2, 0.1], t, 0.01, 1).unwrap();
        for row in &table.rows {
            let e = row.eps;
            // ∫ (e^{-(ν+ε)t} - e^{-νt})² dt
            let i = |r: f64| (1.0 - (-r * t).exp()) / r;
            let int = i(2.0 * (nu + e)) - 2.0 * i(2.0 * nu + e) + i(2.0 * nu);
            let exact = (a * a * (2.0 * PI).powi(3) / 2.0 * int).sqrt();
            assert!((row.error - exact).abs() < 1e-3 * exact, "{} vs {exact}", row.error);
        }
        assert!((table.slope.unwrap() - 1.0).abs() < 0.1);
    }

    #[test]
    fn identical_runs_report_unit_constant() {
        let p = shear_params(1.0, 0.0);
        let grid = p.forcing.base.grid().clone();
        let spec = RunSpec {
            eps: 0.1,
            forcing: Forcing::zero(&grid),
            u0: random_solenoidal_field(&grid, 1.5, 0.1, 3).unwrap(),
        };
        let r = continuity_gronwall_check(&spec, &spec, 1.0, 2.0, 1.0, 0.05).unwrap();
        assert_eq!(r.c1_star, 1.0);
        assert_eq!(r.sup_w, 0.0);

        let other = RunSpec {
            u0: random_solenoidal_field(&grid, 1.5, 0.1, 4).unwrap(),
            ..spec.clone()
        };
        let r = continuity_gronwall_check(&spec, &other, 1.0, 2.0, 1.0, 0.05).unwrap();
        assert!(r.holds && r.c1_star <= 1.0 + 1e-12, "c1 = {}", r.c1_star);
        assert_eq!(r.times.len(), 21);
    }

    #[test]
    fn omega_sample_of_forced_shell_is_fixed_point() {
        let (nu, fa) = (1.0, 0.5);
        let p = shear_params(nu, fa);
        let grid = p.forcing.base.grid().clone();
        let sampling = OmegaSampling::new(SpectralField::zeros(&grid), 20.0, 4, 0.5, 0.05);
        let s = omega_limit_sample(&p, &sampling).unwrap();
        assert_eq!(s.set.points.len(), 4);
        assert_eq!(s.violations, 0);
        let fixed = shear_flow(&grid, fa / nu);
        for (u, &t) in s.set.points.iter().zip(&s.set.times) {
            assert!(u.sub(&fixed).unwrap().norm() < 1e-7 * fixed.norm(), "t = {t}");
        }
        assert!(s.set.diameter() < 1e-7);
        let mut bad = sampling.clone();
        bad.budget = 10.0;
        assert!(omega_limit_sample(&p, &bad).is_err());
    }

    #[test]
    fn perturbed_rejects_nonvanishing_delta() {
        let p = shear_params(1.0, 0.5);
        let grid = p.forcing.base.grid().clone();
        let g = shear_flow(&grid, 1.0);
        let sampling = OmegaSampling::new(SpectralField::zeros(&grid), 1.0, 1, 0.5, 0.05);
        let r = perturbed_forcing_experiment(&p, &g, |e| e + 1.0, &[0.1], &sampling);
        assert!(matches!(r, Err(LabError::InvalidSetup(_))));
    }
}
