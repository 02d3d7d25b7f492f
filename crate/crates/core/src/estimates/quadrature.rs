//! Quadrature on uniformly sampled scalar series.

/// Logarithmic mean `(a - b) / (ln a - ln b)` of two positive numbers.
fn log_mean(a: f64, b: f64) -> f64 {
    let x = b / a - 1.0;
    if x.abs() < 1e-4 {
        // (x / ln(1 + x)) = 1 + x/2 - x²/12 + x³/24 - ...
        a * (1.0 + x * (0.5 + x * (-1.0 / 12.0 + x / 24.0)))
    } else {
        (a - b) / (a.ln() - b.ln())
    }
}

/// `∫` over one step of length `dt` of a sampled integrand with end values
/// `g0`, `g1`.
///
/// When both ends have the same strict sign the integrand is taken to be
/// exponential between them (exact for single-shell decay); otherwise the
/// rule falls back to the trapezoid. Both are second order.
pub fn interval_integral(g0: f64, g1: f64, dt: f64) -> f64 {
    if g0 > 0.0 && g1 > 0.0 {
        dt * log_mean(g0, g1)
    } else if g0 < 0.0 && g1 < 0.0 {
        -dt * log_mean(-g0, -g1)
    } else {
        0.5 * dt * (g0 + g1)
    }
}

/// Prefix integrals `P[i] = ∫_{t_0}^{t_i} g`, so that the integral over
/// samples `i..j` is `P[j] - P[i]`.
pub fn cumulative(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += interval_integral(w[0], w[1], dt);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_exponentials() {
        let a: f64 = 2.7;
        let dt = 0.3;
        let g = |t: f64| 5.0 * (-a * t).exp();
        let exact = 5.0 * (1.0 - (-a * dt).exp()) / a;
        assert!((interval_integral(g(0.0), g(dt), dt) - exact).abs() < 1e-15 * exact.max(1.0));
        // negative branch
        assert!((interval_integral(-g(0.0), -g(dt), dt) + exact).abs() < 1e-15);
    }

    #[test]
    fn log_mean_series_branch_is_continuous() {
        for &x in &[1e-5f64, 9.9e-5, 1.01e-4, 1e-3] {
            let b = 1.0 + x;
            let direct = (1.0 - b) / (1.0f64.ln() - b.ln());
            assert!((log_mean(1.0, b) - direct).abs() < 1e-12, "x = {x}");
        }
        assert_eq!(log_mean(3.0, 3.0), 3.0);
    }

    #[test]
    fn constants_and_sign_changes() {
        assert_eq!(interval_integral(2.0, 2.0, 0.5), 1.0);
        assert_eq!(interval_integral(-1.0, 1.0, 0.5), 0.0);
        assert_eq!(interval_integral(0.0, 0.0, 0.5), 0.0);
        let p = cumulative(&[1.0, 1.0, 1.0, 1.0], 0.25);
        assert_eq!(p, vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn second_order_on_smooth_integrand() {
        let g = |t: f64| 1.0 + 0.5 * (3.0 * t).sin();
        let exact = 1.0 + 0.5 * (1.0 - 3.0f64.cos()) / 3.0;
        let err = |n: usize| {
            let dt = 1.0 / n as f64;
            let v: Vec<f64> = (0..=n).map(|i| g(i as f64 * dt)).collect();
            (cumulative(&v, dt)[n] - exact).abs()
        };
        let ratio = err(40) / err(80);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }
}
