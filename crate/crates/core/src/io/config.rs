//! Flat `key = value` run configuration with dotted section prefixes.
//!
//! ```text
//! grid.n = 16
//! physics.nu = 0.1
//! forcing.kind = shear
//! experiment.eps_list = 0.1, 0.05, 0.025
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use super::snapshot::read_snapshot;
use crate::attractor::OmegaSampling;
use crate::dynamics::{Forcing, PhysicsParams};
use crate::error::IoError;
use crate::estimates::EstimateConfig;
use crate::spectral::{
    cross_shear_flow, leray_project, make_grid, random_solenoidal_field, shear_flow, taylor_green,
    SpectralField, WaveGrid,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Zero,
    Shear,
    CrossShear,
    TaylorGreen,
    Random,
    Modes,
    Snapshot,
}

impl FieldKind {
    const NAMES: [(&'static str, FieldKind); 7] = [
        ("zero", FieldKind::Zero),
        ("shear", FieldKind::Shear),
        ("cross_shear", FieldKind::CrossShear),
        ("taylor_green", FieldKind::TaylorGreen),
        ("random", FieldKind::Random),
        ("modes", FieldKind::Modes),
        ("snapshot", FieldKind::Snapshot),
    ];

    fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, k)| *k == self).expect("listed").0
    }
}

impl FromStr for FieldKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::NAMES
            .iter()
            .find(|(n, _)| *n == s)
            .map(|(_, k)| *k)
            .ok_or_else(|| {
                let names: Vec<_> = Self::NAMES.iter().map(|(n, _)| *n).collect();
                format!("expected one of {}", names.join(", "))
            })
    }
}

/// One Fourier mode `m` with its complex vector amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeAmp {
    pub m: [i64; 3],
    pub amp: [Complex64; 3],
}

/// Recipe for a velocity field: initial data, forcing, or perturbation.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub amplitude: f64,
    /// Spectral decay exponent for `random`.
    pub decay: f64,
    pub seed: u64,
    pub modes: Vec<ModeAmp>,
    pub path: String,
}

impl FieldSpec {
    pub fn zero() -> Self {
        Self {
            kind: FieldKind::Zero,
            amplitude: 0.0,
            decay: 1.5,
            seed: 0,
            modes: Vec::new(),
            path: String::new(),
        }
    }

    pub fn of(kind: FieldKind, amplitude: f64) -> Self {
        Self {
            kind,
            amplitude,
            ..Self::zero()
        }
    }

    pub fn build(&self, grid: &Arc<WaveGrid>, key: &str) -> Result<SpectralField, IoError> {
        let invalid = |msg: String| IoError::InvalidValue {
            key: format!("{key}.kind"),
            msg,
        };
        Ok(match self.kind {
            FieldKind::Zero => SpectralField::zeros(grid),
            FieldKind::Shear => shear_flow(grid, self.amplitude),
            FieldKind::CrossShear => cross_shear_flow(grid, self.amplitude),
            FieldKind::TaylorGreen => taylor_green(grid, self.amplitude),
            FieldKind::Random => {
                random_solenoidal_field(grid, self.decay, self.amplitude, self.seed)?
            }
            FieldKind::Modes => {
                let mut u = SpectralField::zeros(grid);
                for mode in &self.modes {
                    u.set_mode(mode.m, mode.amp)
                        .ok_or_else(|| invalid(format!("mode {:?} outside the grid", mode.m)))?;
                }
                let projected = leray_project(&u);
                let gap = projected.sub(&u)?.norm();
                if gap > 1e-12 * u.norm().max(1.0) {
                    return Err(invalid("mode list is not divergence-free".into()));
                }
                u
            }
            FieldKind::Snapshot => {
                let (u, _) = read_snapshot(&self.path)?;
                if !u.grid().same_as(grid) {
                    return Err(invalid(format!("snapshot {} is on another grid", self.path)));
                }
                u
            }
        })
    }
}

/// Complete description of a run or experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub period: f64,
    pub nu: f64,
    pub eps: f64,
    pub l: f64,
    pub initial: FieldSpec,
    pub forcing: FieldSpec,
    pub perturbation: FieldSpec,
    /// Static perturbation weight used by `simulate` and `verify`.
    pub delta: f64,
    /// `δ(ε) = delta_rate · ε` in the perturbed-forcing experiment.
    pub delta_rate: f64,
    pub t_final: f64,
    pub dt: f64,
    pub stride: usize,
    pub eps_list: Vec<f64>,
    /// Window length `r` of the sliding-window bounds.
    pub window: f64,
    pub delta0: Option<f64>,
    pub limsup_tol: f64,
    pub envelope_tol: f64,
    pub window_tol: f64,
    pub t1: f64,
    pub n_samples: usize,
    pub gap: f64,
    pub budget: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let est = EstimateConfig::default();
        Self {
            n: 16,
            period: 2.0 * std::f64::consts::PI,
            nu: 0.1,
            eps: 0.0,
            l: 2.0,
            initial: FieldSpec::of(FieldKind::TaylorGreen, 1.0),
            forcing: FieldSpec::zero(),
            perturbation: FieldSpec::zero(),
            delta: 0.0,
            delta_rate: 1.0,
            t_final: 10.0,
            dt: 0.01,
            stride: 10,
            eps_list: vec![0.1, 0.05, 0.025, 0.0125],
            window: est.window,
            delta0: est.delta0,
            limsup_tol: est.limsup_tol,
            envelope_tol: est.envelope_tol,
            window_tol: est.window_tol,
            t1: 20.0,
            n_samples: 8,
            gap: 0.5,
            budget: 1e4,
            seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, IoError>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e: T::Err| IoError::InvalidValue {
        key: key.to_string(),
        msg: format!("`{v}`: {e}"),
    })
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, IoError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

/// `kx ky kz ux_re ux_im uy_re uy_im uz_re uz_im`, modes separated by `;`.
fn parse_modes(key: &str, v: &str) -> Result<Vec<ModeAmp>, IoError> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|chunk| {
            let parts: Vec<&str> = chunk.split_whitespace().collect();
            if parts.len() != 9 {
                return Err(IoError::InvalidValue {
                    key: key.to_string(),
                    msg: format!("mode `{chunk}` needs 9 numbers"),
                });
            }
            let mut m = [0i64; 3];
            for (d, p) in m.iter_mut().zip(&parts[..3]) {
                *d = parse_value(key, p)?;
            }
            let mut amp = [Complex64::new(0.0, 0.0); 3];
            for (c, a) in amp.iter_mut().enumerate() {
                *a = Complex64::new(
                    parse_value(key, parts[3 + 2 * c])?,
                    parse_value(key, parts[4 + 2 * c])?,
                );
            }
            Ok(ModeAmp { m, amp })
        })
        .collect()
}

fn fmt_modes(modes: &[ModeAmp]) -> String {
    let chunks: Vec<String> = modes
        .iter()
        .map(|ma| {
            let mut s = format!("{} {} {}", ma.m[0], ma.m[1], ma.m[2]);
            for a in &ma.amp {
                let _ = write!(s, " {:?} {:?}", a.re, a.im);
            }
            s
        })
        .collect();
    chunks.join("; ")
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    items.join(", ")
}

const FIELD_KEYS: [&str; 6] = ["kind", "amplitude", "decay", "seed", "modes", "path"];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| IoError::Config {
                line: i + 1,
                msg: "expected `key = value`".into(),
            })?;
            let k = k.trim().to_string();
            if seen.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(IoError::Config {
                    line: i + 1,
                    msg: format!("duplicate key `{k}`"),
                });
            }
        }
        let mut cfg = Self::default();
        for (k, v) in &seen {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), IoError> {
        if let Some((section, field)) = key.split_once('.') {
            let spec = match section {
                "initial" => Some(&mut self.initial),
                "forcing" => Some(&mut self.forcing),
                "perturbation" => Some(&mut self.perturbation),
                _ => None,
            };
            if let Some(spec) = spec {
                match field {
                    "kind" => spec.kind = parse_value(key, v)?,
                    "amplitude" => spec.amplitude = parse_value(key, v)?,
                    "decay" => spec.decay = parse_value(key, v)?,
                    "seed" => spec.seed = parse_value(key, v)?,
                    "modes" => spec.modes = parse_modes(key, v)?,
                    "path" => spec.path = v.to_string(),
                    "delta" if section == "perturbation" => self.delta = parse_value(key, v)?,
                    "delta_rate" if section == "perturbation" => {
                        self.delta_rate = parse_value(key, v)?
                    }
                    _ => return Err(IoError::UnknownKey(key.to_string())),
                }
                return Ok(());
            }
        }
        match key {
            "grid.n" => self.n = parse_value(key, v)?,
            "grid.l" => self.period = parse_value(key, v)?,
            "physics.nu" => self.nu = parse_value(key, v)?,
            "physics.eps" => self.eps = parse_value(key, v)?,
            "physics.l" => self.l = parse_value(key, v)?,
            "integration.t_final" => self.t_final = parse_value(key, v)?,
            "integration.dt" => self.dt = parse_value(key, v)?,
            "integration.stride" => self.stride = parse_value(key, v)?,
            "experiment.eps_list" => self.eps_list = parse_list(key, v)?,
            "experiment.window" => self.window = parse_value(key, v)?,
            "experiment.delta0" => {
                self.delta0 = if v == "auto" {
                    None
                } else {
                    Some(parse_value(key, v)?)
                }
            }
            "experiment.limsup_tol" => self.limsup_tol = parse_value(key, v)?,
            "experiment.envelope_tol" => self.envelope_tol = parse_value(key, v)?,
            "experiment.window_tol" => self.window_tol = parse_value(key, v)?,
            "experiment.t1" => self.t1 = parse_value(key, v)?,
            "experiment.n_samples" => self.n_samples = parse_value(key, v)?,
            "experiment.gap" => self.gap = parse_value(key, v)?,
            "experiment.budget" => self.budget = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            _ => return Err(IoError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("grid.n", self.n.to_string());
        kv("grid.l", format!("{:?}", self.period));
        kv("physics.nu", format!("{:?}", self.nu));
        kv("physics.eps", format!("{:?}", self.eps));
        kv("physics.l", format!("{:?}", self.l));
        for (name, spec) in [
            ("initial", &self.initial),
            ("forcing", &self.forcing),
            ("perturbation", &self.perturbation),
        ] {
            for field in FIELD_KEYS {
                let v = match field {
                    "kind" => spec.kind.name().to_string(),
                    "amplitude" => format!("{:?}", spec.amplitude),
                    "decay" => format!("{:?}", spec.decay),
                    "seed" => spec.seed.to_string(),
                    "modes" => fmt_modes(&spec.modes),
                    _ => spec.path.clone(),
                };
                kv(&format!("{name}.{field}"), v);
            }
        }
        kv("perturbation.delta", format!("{:?}", self.delta));
        kv("perturbation.delta_rate", format!("{:?}", self.delta_rate));
        kv("integration.t_final", format!("{:?}", self.t_final));
        kv("integration.dt", format!("{:?}", self.dt));
        kv("integration.stride", self.stride.to_string());
        kv("experiment.eps_list", fmt_list(&self.eps_list));
        kv("experiment.window", format!("{:?}", self.window));
        kv(
            "experiment.delta0",
            self.delta0.map_or("auto".to_string(), |d| format!("{d:?}")),
        );
        kv("experiment.limsup_tol", format!("{:?}", self.limsup_tol));
        kv("experiment.envelope_tol", format!("{:?}", self.envelope_tol));
        kv("experiment.window_tol", format!("{:?}", self.window_tol));
        kv("experiment.t1", format!("{:?}", self.t1));
        kv("experiment.n_samples", self.n_samples.to_string());
        kv("experiment.gap", format!("{:?}", self.gap));
        kv("experiment.budget", format!("{:?}", self.budget));
        kv("seed", self.seed.to_string());
        kv("output.dir", self.out_dir.display().to_string());
        out
    }

    pub fn grid(&self) -> Result<Arc<WaveGrid>, IoError> {
        Ok(make_grid(self.n, self.period)?)
    }

    pub fn initial_field(&self, grid: &Arc<WaveGrid>) -> Result<SpectralField, IoError> {
        self.initial.build(grid, "initial")
    }

    /// Base forcing plus the static perturbation `delta · g`.
    pub fn forcing(&self, grid: &Arc<WaveGrid>) -> Result<Forcing, IoError> {
        let f = Forcing::new(self.forcing.build(grid, "forcing")?);
        Ok(if self.perturbation.kind == FieldKind::Zero {
            f
        } else {
            f.with_perturbation(self.perturbation.build(grid, "perturbation")?, self.delta)
        })
    }

    pub fn physics(&self, grid: &Arc<WaveGrid>) -> Result<PhysicsParams, IoError> {
        PhysicsParams::new(self.nu, self.eps, self.l, self.forcing(grid)?).map_err(|e| {
            IoError::InvalidValue {
                key: "physics".into(),
                msg: e.to_string(),
            }
        })
    }

    pub fn estimate_config(&self) -> EstimateConfig {
        EstimateConfig {
            delta0: self.delta0,
            window: self.window,
            limsup_tol: self.limsup_tol,
            envelope_tol: self.envelope_tol,
            window_tol: self.window_tol,
        }
    }

    pub fn sampling(&self, u0: SpectralField) -> OmegaSampling {
        OmegaSampling {
            budget: self.budget,
            ..OmegaSampling::new(u0, self.t1, self.n_samples, self.gap, self.dt)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_serialize_parse_is_fixed_point() {
        let text = "\
# forced run
grid.n = 8
physics.nu = 0.3
physics.eps = 1e-2
forcing.kind = modes
forcing.modes = 0 1 0 0.5 0 0 0 0 0; 0 0 1 0 0 0 -0.25 0 0
perturbation.kind = shear
perturbation.delta = 0.1
experiment.eps_list = 0.1, 0.05
experiment.delta0 = 2.5
output.dir = /tmp/x
";
        let a = RunConfig::parse(text).unwrap();
        assert_eq!(a.n, 8);
        assert_eq!(a.forcing.modes.len(), 2);
        assert_eq!(a.forcing.modes[1].amp[1], Complex64::new(0.0, -0.25));
        assert_eq!(a.delta0, Some(2.5));
        let b = RunConfig::parse(&a.serialize()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.serialize(), b.serialize());
        let d = RunConfig::default();
        assert_eq!(RunConfig::parse(&d.serialize()).unwrap(), d);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(
            RunConfig::parse("grid.m = 3"),
            Err(IoError::UnknownKey(k)) if k == "grid.m"
        ));
        assert!(matches!(
            RunConfig::parse("forcing.delta = 3"),
            Err(IoError::UnknownKey(_))
        ));
        assert!(matches!(
            RunConfig::parse("grid.n = 8\nnonsense"),
            Err(IoError::Config { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::parse("grid.n = eight"),
            Err(IoError::InvalidValue { .. })
        ));
        assert!(matches!(
            RunConfig::parse("grid.n = 8\ngrid.n = 8"),
            Err(IoError::Config { .. })
        ));
        assert!(RunConfig::parse("forcing.modes = 1 2 3").is_err());
    }

    #[test]
    fn builds_fields() {
        let cfg = RunConfig::parse("grid.n = 8\nforcing.kind = shear\nforcing.amplitude = 2").unwrap();
        let grid = cfg.grid().unwrap();
        let p = cfg.physics(&grid).unwrap();
        assert!((p.forcing_norm() - shear_flow(&grid, 2.0).norm()).abs() < 1e-14);

        // gradient mode is rejected
        let bad = RunConfig::parse("grid.n = 8\nforcing.kind = modes\nforcing.modes = 1 0 0 1 0 0 0 0 0")
            .unwrap();
        assert!(bad.physics(&grid).is_err());
    }
}
