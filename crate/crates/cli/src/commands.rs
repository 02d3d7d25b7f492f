use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use thiserror::Error;

use hvns_core::attractor::{
    convergence_sweep, directed_hausdorff, perturbed_forcing_experiment,
    semicontinuity_experiment,
};
use hvns_core::dynamics::{integrate, Forcing, PhysicsParams, Trajectory};
use hvns_core::estimates::{
    absorption_time, dual_derivative_sup, estimate_report, sb_norm, uniformity_entry,
    EstimateConfig, EstimateEntry, EstimateReport,
};
use hvns_core::io::{
    decode_snapshot, encode_snapshot, norm_table, report_csv, report_text, write_report,
    write_snapshot, write_table, RunConfig, SnapshotMeta, Table,
};
use hvns_core::spectral::{leray_project, make_grid, shear_flow, SpectralField};
use hvns_core::{DynamicsError, EstimateError, IoError, LabError, SpectralError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    File(#[from] std::io::Error),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("{0}")]
    Setup(String),
}

type Outcome = Result<EstimateReport, CliError>;

fn load(config: &Option<PathBuf>, out: &Option<PathBuf>) -> Result<RunConfig, CliError> {
    let mut cfg = match config {
        Some(path) => RunConfig::parse(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = out {
        cfg.out_dir = dir.clone();
    }
    fs::create_dir_all(&cfg.out_dir)?;
    fs::write(cfg.out_dir.join("config.txt"), cfg.serialize())?;
    Ok(cfg)
}

/// Pass/fail entry for a yes-or-no check.
fn flag_entry(name: &str, tag: &str, pass: bool) -> EstimateEntry {
    if pass {
        EstimateEntry::new(name, tag, 0.0, 0.0, 0.0)
    } else {
        EstimateEntry::failed(name, tag)
    }
}

fn guard_entry(pass: bool) -> EstimateEntry {
    flag_entry("blowup_guard", "dynamics", pass)
}

/// Runs the configured integration; CFL and blow-up aborts become a failed
/// `blowup_guard` entry instead of an error.
fn run(cfg: &RunConfig) -> Result<(Option<Trajectory>, EstimateReport), CliError> {
    let grid = cfg.grid()?;
    let p = cfg.physics(&grid)?;
    let u0 = cfg.initial_field(&grid)?;
    let mut report = EstimateReport::default();
    match integrate(&u0, &p, cfg.t_final, cfg.dt, cfg.stride) {
        Ok(traj) => {
            report.entries.push(guard_entry(true));
            Ok((Some(traj), report))
        }
        Err(e @ (DynamicsError::Cfl { .. } | DynamicsError::BlowUp { .. })) => {
            eprintln!("run aborted: {e}");
            report.entries.push(guard_entry(false));
            Ok((None, report))
        }
        Err(e) => Err(e.into()),
    }
}

fn finish(report: EstimateReport, dir: &Path) -> Outcome {
    write_report(&report, dir.join("report.txt"))?;
    Ok(report)
}

pub fn simulate(config: &Option<PathBuf>, out: &Option<PathBuf>) -> Outcome {
    let cfg = load(config, out)?;
    let (traj, report) = run(&cfg)?;
    if let Some(traj) = traj {
        let snaps = cfg.out_dir.join("snapshots");
        fs::create_dir_all(&snaps)?;
        for (i, s) in traj.snapshots.iter().enumerate() {
            let meta = SnapshotMeta {
                nu: cfg.nu,
                eps: cfg.eps,
                l: cfg.l,
                time: s.time,
            };
            write_snapshot(snaps.join(format!("snap_{i:05}.bin")), &s.field, &meta)?;
        }
        write_table(&norm_table(&traj), cfg.out_dir.join("norms.csv"))?;
        info!("wrote {} snapshots to {}", traj.snapshots.len(), snaps.display());
    }
    finish(report, &cfg.out_dir)
}

pub fn verify(config: &Option<PathBuf>, out: &Option<PathBuf>) -> Outcome {
    let cfg = load(config, out)?;
    let (traj, mut report) = run(&cfg)?;
    if let Some(traj) = traj {
        write_table(&norm_table(&traj), cfg.out_dir.join("norms.csv"))?;
        report.merge(estimate_report(&traj, &cfg.estimate_config())?);
    }
    finish(report, &cfg.out_dir)
}

pub fn sweep_eps(config: &Option<PathBuf>, out: &Option<PathBuf>) -> Outcome {
    let cfg = load(config, out)?;
    let grid = cfg.grid()?;
    let p = cfg.physics(&grid)?;
    let u0 = cfg.initial_field(&grid)?;
    let table = convergence_sweep(&u0, &p, &cfg.eps_list, cfg.t_final, cfg.dt, cfg.stride)?;
    write_table(&Table::from(&table), cfg.out_dir.join("convergence.csv"))?;

    let mut report = EstimateReport::default();
    report.entries.push(guard_entry(table.rows.iter().all(|r| r.ok)));
    let decreasing = table.rows.windows(2).all(|w| w[1].error < w[0].error);
    report
        .entries
        .push(flag_entry("convergence_decreasing", "convergence", decreasing));
    if let Some(s) = table.slope {
        report.scalars.insert("convergence_slope".into(), s);
    }

    // ε-uniformity of the trajectory-space quantities
    let stats = cfg
        .eps_list
        .par_iter()
        .map(|&eps| -> Result<(f64, f64), CliError> {
            let traj = integrate(&u0, &p.with_eps(eps), cfg.t_final, cfg.dt, cfg.stride)?;
            Ok((dual_derivative_sup(&traj)?, sb_norm(&traj)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (duals, sbs): (Vec<f64>, Vec<f64>) = stats.into_iter().unzip();
    report
        .entries
        .push(uniformity_entry("dual_derivative_uniformity", &duals, 0.25));
    report.entries.push(uniformity_entry("sb_norm_uniformity", &sbs, 0.25));
    finish(report, &cfg.out_dir)
}

pub fn attractor_dist(config: &Option<PathBuf>, out: &Option<PathBuf>) -> Outcome {
    let cfg = load(config, out)?;
    let grid = cfg.grid()?;
    let p = cfg.physics(&grid)?;
    let sampling = cfg.sampling(cfg.initial_field(&grid)?);
    let table = semicontinuity_experiment(&p, &cfg.eps_list, &sampling)?;
    write_table(&Table::from(&table), cfg.out_dir.join("semicontinuity.csv"))?;

    let mut report = EstimateReport::default();
    report
        .entries
        .push(flag_entry("semicontinuity_monotone", "semicontinuity", table.monotone));
    let violations: usize = table.rows.iter().map(|r| r.inclusion_violations).sum();
    report
        .entries
        .push(flag_entry("absorbing_inclusion", "semicontinuity", violations == 0));
    if let Some(s) = table.slope {
        report.scalars.insert("semicontinuity_slope".into(), s);
    }
    finish(report, &cfg.out_dir)
}

pub fn perturbed(config: &Option<PathBuf>, out: &Option<PathBuf>) -> Outcome {
    let cfg = load(config, out)?;
    let grid = cfg.grid()?;
    if cfg.perturbation.kind == hvns_core::io::FieldKind::Zero {
        return Err(CliError::Setup(
            "perturbed needs a nonzero perturbation.kind".into(),
        ));
    }
    let g = cfg.perturbation.build(&grid, "perturbation")?;
    let base = cfg.forcing.build(&grid, "forcing")?;
    let p = PhysicsParams::new(cfg.nu, cfg.eps, cfg.l, Forcing::new(base))?;
    let sampling = cfg.sampling(cfg.initial_field(&grid)?);
    let rate = cfg.delta_rate;
    let rep = perturbed_forcing_experiment(&p, &g, |e| rate * e, &cfg.eps_list, &sampling)?;
    write_table(&Table::from(&rep), cfg.out_dir.join("perturbed.csv"))?;

    let mut report = EstimateReport::default();
    report
        .entries
        .push(flag_entry("perturbed_trend", "semicontinuity", rep.trend_ok));
    if let Some(s) = rep.slope_unperturbed {
        report.scalars.insert("slope_unperturbed".into(), s);
    }
    if let Some(s) = rep.slope_baseline {
        report.scalars.insert("slope_baseline".into(), s);
    }
    finish(report, &cfg.out_dir)
}

fn check(name: &str, pass: bool) -> EstimateEntry {
    flag_entry(name, "selftest", pass)
}

pub fn selftest(out: &Option<PathBuf>) -> Outcome {
    let mut report = EstimateReport::default();
    let push = |r: &mut EstimateReport, e: EstimateEntry| r.entries.push(e);

    let t0 = absorption_time(2.0, 0.5, 1.0, 1.0);
    push(&mut report, check("absorption_time_formula", (t0 - 5f64.ln()).abs() < 1e-14));

    let d = |a: &f64, b: &f64| (a - b).abs();
    let h = (
        directed_hausdorff(&[0.0, 1.0], &[0.5], d)?,
        directed_hausdorff(&[0.0], &[1.0, 2.0], d)?,
        directed_hausdorff(&[1.0, 2.0], &[0.0], d)?,
    );
    push(&mut report, check("hausdorff_stand_ins", h == (0.5, 1.0, 2.0)));

    let grid = make_grid(8, 2.0 * PI)?;
    let grad = SpectralField::from_fn(&grid, |x| {
        [x[0].cos() * x[1].sin(), x[0].sin() * x[1].cos(), 0.0]
    });
    push(
        &mut report,
        check("leray_gradient", leray_project(&grad).norm() < 1e-12 * grad.norm()),
    );

    let (nu, eps, amp) = (0.5, 0.1, 1.5);
    let p = PhysicsParams::new(nu, eps, 2.0, Forcing::zero(&grid))?;
    let traj = integrate(&shear_flow(&grid, amp), &p, 12.0, 0.05, 10)?;
    let u0 = shear_flow(&grid, amp).norm();
    let worst = traj
        .times
        .iter()
        .zip(traj.series.energy.iter())
        .map(|(&t, &e)| (e.sqrt() / (u0 * (-(nu + eps) * t).exp()) - 1.0).abs())
        .fold(0.0, f64::max);
    push(&mut report, check("shear_decay", worst < 1e-10));
    let shear_report = estimate_report(&traj, &EstimateConfig::default())?;
    push(&mut report, check("shear_estimates", shear_report.all_pass()));

    let zero = integrate(&SpectralField::zeros(&grid), &p, 12.0, 0.1, 10)?;
    let zr = estimate_report(&zero, &EstimateConfig::default())?;
    push(
        &mut report,
        check("zero_trajectory", zr.all_pass() && sb_norm(&zero)? == 0.0),
    );

    let field = traj.final_snapshot().expect("nonempty run").field.clone();
    let meta = SnapshotMeta {
        nu,
        eps,
        l: 2.0,
        time: traj.t_end(),
    };
    let (back, m) = decode_snapshot(&encode_snapshot(&field, &meta))?;
    let bitwise = (0..3).all(|c| {
        field
            .component(c)
            .iter()
            .zip(back.component(c))
            .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
    });
    push(&mut report, check("snapshot_round_trip", bitwise && m == meta));

    let cfg = RunConfig::default();
    push(
        &mut report,
        check(
            "config_round_trip",
            RunConfig::parse(&cfg.serialize()).map(|c| c == cfg).unwrap_or(false),
        ),
    );
    let empty = EstimateReport::default();
    push(
        &mut report,
        check(
            "empty_report",
            report_text(&empty).lines().count() == 1 && report_csv(&empty).lines().count() == 1,
        ),
    );

    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        return finish(report, dir);
    }
    Ok(report)
}
