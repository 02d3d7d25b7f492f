use crate::dynamics::Snapshot;
use crate::error::LabError;
use crate::spectral::{sobolev_norm, SpectralField};

/// Norm and truncation used by the trajectory-space metrics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSpec {
    /// Sobolev index `s` of the state norm `‖A^{s/2}·‖`: 0 for V₀, 1 for
    /// V₁, `-2l` for the dual of `D(A^l)`.
    pub norm_index: f64,
    /// Integrability exponent of the `L^p(0, n; X)` seminorms.
    pub p: f64,
    /// Number of terms kept in `Σ_n 2^{-n} min(‖·‖_{L^p(0,n;X)}, 1)`.
    pub n_max: usize,
}

impl Default for MetricSpec {
    fn default() -> Self {
        Self {
            norm_index: 0.0,
            p: 2.0,
            n_max: 16,
        }
    }
}

impl MetricSpec {
    pub fn validate(&self) -> Result<(), LabError> {
        if !(self.p >= 1.0) {
            return Err(LabError::InvalidMetric(format!("p = {}", self.p)));
        }
        if self.n_max < 1 {
            return Err(LabError::InvalidMetric("n_max must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn field_distance(a: &SpectralField, b: &SpectralField, s: f64) -> Result<f64, LabError> {
    Ok(sobolev_norm(&a.sub(b)?, s))
}

/// `sup_{x∈X} inf_{y∈Y} d(x, y)` for an arbitrary distance.
pub fn directed_hausdorff<T>(
    xs: &[T],
    ys: &[T],
    dist: impl Fn(&T, &T) -> f64,
) -> Result<f64, LabError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(LabError::EmptySet);
    }
    let mut sup: f64 = 0.0;
    for x in xs {
        let mut inf = f64::INFINITY;
        for y in ys {
            inf = inf.min(dist(x, y));
            // this x can no longer raise the supremum
            if inf <= sup {
                break;
            }
        }
        sup = sup.max(inf);
    }
    Ok(sup)
}

/// Translation-invariant metric
/// `d(f, g) = Σ_{n=1}^{n_max} 2^{-n} min(‖f - g‖_{L^p(0,n;X)}, 1)`
/// on time-sampled fields.
///
/// Both inputs must be sampled at identical times covering `[t₀, t₀ + n_max]`.
pub fn frechet_metric(a: &[Snapshot], b: &[Snapshot], m: &MetricSpec) -> Result<f64, LabError> {
    m.validate()?;
    if a.len() != b.len() || a.is_empty() {
        return Err(LabError::MismatchedSampling);
    }
    if a.iter().zip(b).any(|(x, y)| x.time != y.time) {
        return Err(LabError::MismatchedSampling);
    }
    let times: Vec<f64> = a.iter().map(|s| s.time).collect();
    let dists = a
        .iter()
        .zip(b)
        .map(|(x, y)| field_distance(&x.field, &y.field, m.norm_index))
        .collect::<Result<Vec<_>, _>>()?;
    frechet_from_distances(&times, &dists, m.p, m.n_max)
}

/// [`frechet_metric`] given the sampled pointwise distances `‖f(t) - g(t)‖_X`.
///
/// The integrand `‖f - g‖^p` is interpolated linearly between samples.
pub fn frechet_from_distances(
    times: &[f64],
    dists: &[f64],
    p: f64,
    n_max: usize,
) -> Result<f64, LabError> {
    if times.len() != dists.len() || times.is_empty() {
        return Err(LabError::MismatchedSampling);
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LabError::MismatchedSampling);
    }
    let t0 = times[0];
    let span = times[times.len() - 1] - t0;
    let need = n_max as f64;
    if span < need * (1.0 - 1e-12) {
        return Err(LabError::HorizonTooShort { have: span, need });
    }
    let g: Vec<f64> = dists.iter().map(|d| d.powf(p)).collect();
    let mut prefix = vec![0.0; g.len()];
    for i in 1..g.len() {
        prefix[i] = prefix[i - 1] + 0.5 * (times[i] - times[i - 1]) * (g[i - 1] + g[i]);
    }

    let mut total = 0.0;
    let mut seg = 0;
    for n in 1..=n_max {
        let end = t0 + n as f64;
        while seg + 1 < times.len() - 1 && times[seg + 1] < end {
            seg += 1;
        }
        let integral = if end >= times[times.len() - 1] {
            prefix[g.len() - 1]
        } else {
            let (ta, tb) = (times[seg], times[seg + 1]);
            let theta = ((end - ta) / (tb - ta)).clamp(0.0, 1.0);
            let g_end = g[seg] + theta * (g[seg + 1] - g[seg]);
            prefix[seg] + 0.5 * (end - ta) * (g[seg] + g_end)
        };
        let seminorm = integral.max(0.0).powf(1.0 / p);
        total += 0.5f64.powi(n as i32) * seminorm.min(1.0);
    }
    Ok(total)
}

/// Pointwise difference of two sampled paths on a common time grid.
pub fn path_difference(a: &[Snapshot], b: &[Snapshot]) -> Result<Vec<Snapshot>, LabError> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.time != y.time) {
        return Err(LabError::MismatchedSampling);
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            Ok(Snapshot {
                time: x.time,
                field: x.field.sub(&y.field)?,
            })
        })
        .collect()
}
