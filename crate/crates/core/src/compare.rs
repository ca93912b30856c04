//! Deviation between exact and semiclassical curves sampled on one grid.

use crate::error::{Error, Result};

/// Smallest scale a deviation is measured against, so that roundoff on a
/// curve that starts at zero does not read as a large relative error.
pub const SCALE_FLOOR: f64 = 1e-9;

/// `|ed − sc| / max(max_{t' ≤ t} |sc|, SCALE_FLOOR)`, so early points near
/// zero are measured against the scale the curve has reached so far.
pub fn scale_relative_deviation(ed: &[f64], sc: &[f64]) -> Result<Vec<f64>> {
    if ed.len() != sc.len() {
        return Err(Error::Dimension(format!("{} exact points, {} semiclassical", ed.len(), sc.len())));
    }
    let mut scale = SCALE_FLOOR;
    Ok(ed
        .iter()
        .zip(sc)
        .map(|(e, s)| {
            scale = scale.max(s.abs());
            (e - s).abs() / scale
        })
        .collect())
}

/// Largest scale-relative deviation for `t ≤ t_end`, skipping points where
/// either curve is not finite.
pub fn max_deviation(times: &[f64], ed: &[f64], sc: &[f64], t_end: f64) -> Result<f64> {
    let dev = scale_relative_deviation(ed, sc)?;
    Ok(times
        .iter()
        .zip(&dev)
        .zip(ed.iter().zip(sc))
        .filter(|((t, _), (e, s))| **t <= t_end && e.is_finite() && s.is_finite())
        .map(|((_, d), _)| *d)
        .fold(0.0, f64::max))
}

/// First time the deviation exceeds `threshold`.
pub fn divergence_time(times: &[f64], ed: &[f64], sc: &[f64], threshold: f64) -> Result<Option<f64>> {
    let dev = scale_relative_deviation(ed, sc)?;
    Ok(times.iter().zip(&dev).find(|(_, d)| **d > threshold).map(|(t, _)| *t))
}

/// Mean of `y` over `t_start ≤ t ≤ t_end`.
pub fn time_average(times: &[f64], y: &[f64], t_start: f64, t_end: f64) -> Option<f64> {
    let v: Vec<f64> =
        times.iter().zip(y).filter(|(t, v)| **t >= t_start && **t <= t_end && v.is_finite()).map(|(_, v)| *v).collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}
