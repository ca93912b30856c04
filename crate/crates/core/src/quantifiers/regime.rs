//! Growth-law fits used to classify regular and chaotic dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination.
    pub r2: f64,
    pub points: usize,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("{} abscissae, {} ordinates", x.len(), y.len())));
    }
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(&a, &b)| (a, b)).filter(|(a, b)| a.is_finite() && b.is_finite()).collect();
    if pts.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 finite points, got {}", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit { slope, intercept: my - slope * mx, r2, points: pts.len() })
}

/// Indices with `t_start ≤ t ≤ t_end`.
pub fn window(times: &[f64], t_start: f64, t_end: f64) -> std::ops::Range<usize> {
    let a = times.partition_point(|&t| t < t_start);
    let b = times.partition_point(|&t| t <= t_end);
    a..b.max(a)
}

fn select(times: &[f64], y: &[f64], t_start: f64, t_end: f64) -> (Vec<f64>, Vec<f64>) {
    let r = window(times, t_start, t_end);
    (times[r.clone()].to_vec(), y[r].to_vec())
}

/// Rate `a` of `y ~ e^{a t}`: slope of `ln y` against `t`.
pub fn exponential_rate(times: &[f64], y: &[f64], t_start: f64, t_end: f64) -> Result<LinearFit> {
    let (t, v) = select(times, y, t_start, t_end);
    let lv: Vec<f64> = v.iter().map(|x| if *x > 0.0 { x.ln() } else { f64::NAN }).collect();
    fit_line(&t, &lv)
}

/// Exponent `a` of `y ~ t^a`: slope of `ln y` against `ln t`.
pub fn power_law_exponent(times: &[f64], y: &[f64], t_start: f64, t_end: f64) -> Result<LinearFit> {
    let (t, v) = select(times, y, t_start.max(f64::MIN_POSITIVE), t_end);
    let lt: Vec<f64> = t.iter().map(|x| x.ln()).collect();
    let lv: Vec<f64> = v.iter().map(|x| if *x > 0.0 { x.ln() } else { f64::NAN }).collect();
    fit_line(&lt, &lv)
}

/// Coefficient `c` of `y ≈ c·ln t + b`.
pub fn logarithmic_coefficient(times: &[f64], y: &[f64], t_start: f64, t_end: f64) -> Result<LinearFit> {
    let (t, v) = select(times, y, t_start.max(f64::MIN_POSITIVE), t_end);
    let lt: Vec<f64> = t.iter().map(|x| x.ln()).collect();
    fit_line(&lt, &v)
}

/// Slope of `y` against `t`.
pub fn linear_slope(times: &[f64], y: &[f64], t_start: f64, t_end: f64) -> Result<LinearFit> {
    let (t, v) = select(times, y, t_start, t_end);
    fit_line(&t, &v)
}

/// Running maximum, which removes the oscillations riding on a growth law.
pub fn envelope(y: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    y.iter()
        .map(|&v| {
            if v > m {
                m = v;
            }
            m
        })
        .collect()
}

/// Dynamical regime of a reference trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Regular,
    Chaotic,
}

/// Time at which fluctuations reach the phase-space scale: `ln N / (2λ)`
/// for chaotic dynamics, `√N` for regular dynamics.
pub fn ehrenfest_time(regime: Regime, n: usize, lambda: f64) -> f64 {
    match regime {
        Regime::Chaotic => (n as f64).ln() / (2.0 * lambda),
        Regime::Regular => (n as f64).sqrt(),
    }
}
