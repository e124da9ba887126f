//! Least-squares slope on log-log axes, for scaling-exponent readouts.

/// Slope of the best-fit line through `(ln x, ln y)`. Needs at least two
/// distinct x values; returns `None` otherwise.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logged: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if logged.len() < 2 {
        return None;
    }
    let n = logged.len() as f64;
    let mean_x = logged.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logged.iter().map(|p| p.1).sum::<f64>() / n;
    let var: f64 = logged.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if var == 0.0 {
        return None;
    }
    let cov: f64 = logged.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    Some(cov / var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power_laws() {
        let quadratic: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, (i * i) as f64)).collect();
        assert!((log_log_slope(&quadratic).unwrap() - 2.0).abs() < 1e-9);

        let scaled: Vec<(f64, f64)> = [64.0f64, 128.0, 256.0]
            .iter()
            .map(|&x| (x, 7.5 * x.powf(1.5)))
            .collect();
        assert!((log_log_slope(&scaled).unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs_yield_none() {
        assert_eq!(log_log_slope(&[]), None);
        assert_eq!(log_log_slope(&[(2.0, 4.0)]), None);
        assert_eq!(log_log_slope(&[(2.0, 4.0), (2.0, 8.0)]), None);
    }
}
