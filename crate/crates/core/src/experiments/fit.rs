//! Least-squares exponential rate fits.

use serde::Serialize;

use crate::error::{Error, Result};

/// Fit of `log value ≈ intercept − rate · t` on a time window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// `−slope`; negative when the series grows.
    pub rate: f64,
    /// Standard error of the slope.
    pub rate_stderr: f64,
    pub intercept: f64,
    pub t0: f64,
    pub t1: f64,
    /// Coefficient of determination on log values; 0 for a constant series.
    pub r_squared: f64,
    pub points: usize,
    pub series_id: String,
    /// Whether the window was cut short at a nonpositive value.
    pub truncated: bool,
}

/// Default window `[0.2 T, T]`.
pub fn default_window(t_final: f64) -> (f64, f64) {
    (0.2 * t_final, t_final)
}

/// Ordinary least squares of `ln value` against `t` for `t ∈ [t0, t1]`.
///
/// A nonpositive or non-finite value ends the window early with a warning.
pub fn fit_decay(times: &[f64], values: &[f64], window: (f64, f64), series_id: &str) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::Fit(format!("{} times but {} values", times.len(), values.len())));
    }
    let (t0, t1) = window;
    if !(t0 <= t1) {
        return Err(Error::Fit(format!("empty window [{t0}, {t1}]")));
    }
    let slack = 1e-9 * t1.abs().max(1.0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut truncated = false;
    for (&t, &v) in times.iter().zip(values) {
        if t < t0 - slack || t > t1 + slack {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            log::warn!("{series_id}: value {v:e} at t = {t}; fit window truncated");
            truncated = true;
            break;
        }
        xs.push(t);
        ys.push(v.ln());
    }
    let points = xs.len();
    if points < 2 {
        return Err(Error::Fit(format!("{series_id}: {points} usable points in [{t0}, {t1}]")));
    }
    let nf = points as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit(format!("{series_id}: all points at one time")));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON * nf * my.abs().max(1.0).powi(2) {
        0.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    let rate_stderr = if points > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(DecayFit {
        rate: -slope + 0.0,
        rate_stderr,
        intercept,
        t0: xs[0],
        t1: xs[points - 1],
        r_squared,
        points,
        series_id: series_id.to_string(),
        truncated,
    })
}

/// Write fits as CSV rows.
pub fn write_fits_csv<W: std::io::Write>(w: W, fits: &[DecayFit]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    for f in fits {
        w.serialize(f)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, m: usize) -> Vec<f64> {
        (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect()
    }

    #[test]
    fn exact_exponential() {
        let t = grid(0.0, 10.0, 41);
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (-0.3 * t).exp()).collect();
        let f = fit_decay(&t, &v, (0.0, 10.0), "exp").unwrap();
        assert!((f.rate - 0.3).abs() < 1e-10);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(f.points, 41);
    }

    #[test]
    fn constant_series_has_zero_slope() {
        let t = grid(0.0, 1.0, 5);
        let f = fit_decay(&t, &[2.0; 5], (0.0, 1.0), "c").unwrap();
        assert_eq!(f.rate, 0.0);
        assert_eq!(f.r_squared, 0.0);
    }

    #[test]
    fn window_is_respected() {
        let t = grid(0.0, 10.0, 101);
        let v: Vec<f64> = t.iter().map(|&t| if t < 5.0 { (-t).exp() } else { (-5.0 - 0.1 * (t - 5.0)).exp() }).collect();
        let late = fit_decay(&t, &v, (5.0, 10.0), "w").unwrap();
        assert!((late.rate - 0.1).abs() < 1e-10);
        assert_eq!((late.t0, late.t1), (5.0, 10.0));
        assert_eq!(default_window(30.0), (6.0, 30.0));
    }

    #[test]
    fn nonpositive_value_truncates() {
        let t = grid(0.0, 4.0, 5);
        let v = [1.0, 0.5, 0.25, 0.0, 0.1];
        let f = fit_decay(&t, &v, (0.0, 4.0), "z").unwrap();
        assert!(f.truncated);
        assert_eq!(f.points, 3);
        assert!((f.rate - 2f64.ln()).abs() < 1e-12);
        assert!(fit_decay(&t, &[1.0, -1.0, 1.0, 1.0, 1.0], (0.0, 4.0), "e").is_err());
    }

    #[test]
    fn bad_inputs() {
        assert!(fit_decay(&[0.0, 1.0], &[1.0], (0.0, 1.0), "a").is_err());
        assert!(fit_decay(&[0.0, 1.0], &[1.0, 1.0], (1.0, 0.0), "b").is_err());
        assert!(fit_decay(&[0.0, 1.0], &[1.0, 1.0], (5.0, 6.0), "c").is_err());
    }
}
