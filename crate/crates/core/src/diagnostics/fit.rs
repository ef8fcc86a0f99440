//! Least-squares exponential fits `C e^{-tau t}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum goodness of fit for a rate to be reported.
pub const MIN_R_SQUARED: f64 = 0.99;
/// Minimum number of samples inside the window.
pub const MIN_SAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_lo: f64,
    /// `None`: last sample before the signal first drops below `floor`, or the final time.
    pub t_hi: Option<f64>,
    pub floor: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow {
            t_lo: 0.5,
            t_hi: None,
            floor: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub quantity: String,
    /// Fitted rate, present only when `r_squared >= 0.99`.
    pub tau: Option<f64>,
    /// `-slope` regardless of fit quality.
    pub rate: f64,
    pub c_prefactor: f64,
    pub fit_window: (f64, f64),
    pub r_squared: f64,
    pub samples: usize,
}

/// Fits `ln(values)` against `times` by least squares on the window.
pub fn fit_decay_rate(times: &[f64], values: &[f64], window: &FitWindow, quantity: &str) -> Result<DecayReport> {
    if times.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    let t_hi = match window.t_hi {
        Some(t) => t,
        None => {
            let mut last = *times.last().ok_or_else(|| Error::InvalidParameter("empty series".into()))?;
            for (k, (&t, &v)) in times.iter().zip(values).enumerate() {
                if t >= window.t_lo && v >= 0.0 && v < window.floor {
                    last = if k > 0 { times[k - 1] } else { t };
                    break;
                }
            }
            last
        }
    };
    let picked: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window.t_lo && **t <= t_hi)
        .map(|(t, v)| (*t, *v))
        .collect();
    if picked.len() < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "fit window [{}, {t_hi}] holds {} samples, need at least {MIN_SAMPLES}",
            window.t_lo,
            picked.len()
        )));
    }
    if let Some((t, v)) = picked.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("non-positive value {v} at t = {t} inside the fit window")));
    }
    let n = picked.len() as f64;
    let t_mean = picked.iter().map(|p| p.0).sum::<f64>() / n;
    // shifted by the first sample so that a constant series gives an exactly zero slope
    let y0 = picked[0].1.ln();
    let y: Vec<f64> = picked.iter().map(|p| p.1.ln() - y0).collect();
    let y_mean = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((t, _), y) in picked.iter().zip(&y) {
        sxx += (t - t_mean) * (t - t_mean);
        sxy += (t - t_mean) * (y - y_mean);
    }
    if !(sxx > 0.0) {
        return Err(Error::InvalidParameter("fit window has no time spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean + y0;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for ((t, _), y) in picked.iter().zip(&y) {
        let r = y - (intercept - y0 + slope * t);
        ss_res += r * r;
        ss_tot += (y - y_mean) * (y - y_mean);
    }
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    let rate = -slope;
    Ok(DecayReport {
        quantity: quantity.to_string(),
        tau: (r_squared >= MIN_R_SQUARED).then_some(rate),
        rate,
        c_prefactor: intercept.exp(),
        fit_window: (picked[0].0, picked[picked.len() - 1].0),
        r_squared,
        samples: picked.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let t: Vec<f64> = (0..200).map(|k| k as f64 * 0.05).collect();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (-2.0 * t).exp()).collect();
        let r = fit_decay_rate(&t, &v, &FitWindow::default(), "w_l2").unwrap();
        assert!((r.tau.unwrap() - 2.0).abs() < 1e-12);
        assert!((r.c_prefactor - 3.0).abs() < 1e-11);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(r.fit_window.0, 0.5);
    }

    #[test]
    fn constant_series() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let v = vec![0.25; 50];
        let r = fit_decay_rate(&t, &v, &FitWindow::default(), "c").unwrap();
        assert_eq!(r.tau, Some(0.0));
        assert_eq!(r.r_squared, 1.0);
    }

    #[test]
    fn window_stops_at_floor() {
        let t: Vec<f64> = (0..400).map(|k| k as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        let r = fit_decay_rate(&t, &v, &FitWindow::default(), "x").unwrap();
        assert!(r.fit_window.1 <= 20.8 && r.fit_window.1 > 20.0, "{:?}", r.fit_window);
    }

    #[test]
    fn bad_inputs() {
        let t: Vec<f64> = (0..30).map(|k| k as f64 * 0.1).collect();
        let mut v = vec![1.0; 30];
        v[10] = -1.0;
        assert!(matches!(fit_decay_rate(&t, &v, &FitWindow::default(), "x"), Err(Error::Domain(_))));
        let short = FitWindow { t_lo: 0.5, t_hi: Some(1.0), floor: 0.0 };
        assert!(matches!(fit_decay_rate(&t, &[1.0; 30], &short, "x"), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn noisy_fit_withholds_rate() {
        let t: Vec<f64> = (0..60).map(|k| k as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().enumerate().map(|(k, t)| (-0.1 * t).exp() * if k % 2 == 0 { 3.0 } else { 0.3 }).collect();
        let r = fit_decay_rate(&t, &v, &FitWindow::default(), "x").unwrap();
        assert!(r.r_squared < 0.99);
        assert!(r.tau.is_none());
    }
}
