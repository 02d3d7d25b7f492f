//! Metrics on state and trajectory spaces, omega-limit proxies of the
//! attractors, and the ε → 0 experiments built on them.
//!
//! An attractor is represented by a finite set of post-transient snapshots.
//! In strongly damped regimes the attractor is a single stable fixed point
//! and the proxy converges to it, which gives every experiment a closed-form
//! reference.

mod experiments;
mod metrics;

pub use experiments::{
    continuity_gronwall_check, continuity_sequence, convergence_sweep, hausdorff_semidistance,
    loglog_slope, non_increasing_trend, omega_limit_sample, perturbed_forcing_experiment,
    semicontinuity_experiment, ConvergenceTable, GronwallReport, OmegaSample, OmegaSampling,
    PerturbedReport, PerturbedRow, RunSpec, SemicontinuityRow, SemicontinuityTable, SweepRow,
};
pub use metrics::{
    directed_hausdorff, field_distance, frechet_from_distances, frechet_metric, path_difference,
    MetricSpec,
};

use crate::spectral::SpectralField;

/// Finite snapshot set standing in for an attractor.
#[derive(Clone, Debug)]
pub struct TrajectorySet {
    pub points: Vec<SpectralField>,
    /// Sample instants, all at or after `transient`.
    pub times: Vec<f64>,
    pub eps: f64,
    pub transient: f64,
    pub sample_gap: f64,
}

impl TrajectorySet {
    /// Largest pairwise V₀ distance.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.max(a.sub(b).map(|x| x.norm()).unwrap_or(f64::NAN));
            }
        }
        d
    }
}
