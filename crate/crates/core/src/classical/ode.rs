//! Adaptive Dormand–Prince 5(4) integrator with PI step control.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const EXPO_ERR: f64 = 0.17;
const EXPO_PREV: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrator state carried between successive calls to [`Dopri5::advance`].
#[derive(Debug, Clone)]
pub struct OdeCursor {
    pub t: f64,
    pub y: Vec<f64>,
    h: Option<f64>,
    prev_err: f64,
    k1: Option<Vec<f64>>,
    pub stats: OdeStats,
}

impl OdeCursor {
    pub fn new(t: f64, y: Vec<f64>) -> Self {
        OdeCursor { t, y, h: None, prev_err: 1e-4, k1: None, stats: OdeStats::default() }
    }

    /// Replaces the state (e.g. after renormalising tangent vectors). The
    /// step size is kept, the cached derivative is dropped.
    pub fn reset_state(&mut self, y: Vec<f64>) {
        self.y = y;
        self.k1 = None;
    }
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Dopri5 { rtol: tol, atol: tol, max_steps: 100_000_000 }
    }

    fn error_norm(&self, y: &[f64], y_new: &[f64], err: &[f64]) -> f64 {
        let n = y.len() as f64;
        let s: f64 = y
            .iter()
            .zip(y_new)
            .zip(err)
            .map(|((a, b), e)| {
                let sc = self.atol + self.rtol * a.abs().max(b.abs());
                (e / sc).powi(2)
            })
            .sum();
        (s / n).sqrt()
    }

    fn initial_step<F>(&self, f: &mut F, t: f64, y: &[f64], k1: &[f64], dir: f64, stats: &mut OdeStats) -> Result<f64>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let sc: Vec<f64> = y.iter().map(|v| self.atol + self.rtol * v.abs()).collect();
        let d0 = rms(y.iter().zip(&sc).map(|(v, s)| v / s));
        let d1 = rms(k1.iter().zip(&sc).map(|(v, s)| v / s));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: Vec<f64> = y.iter().zip(k1).map(|(v, k)| v + dir * h0 * k).collect();
        let mut k2 = vec![0.0; y.len()];
        f(t + dir * h0, &y1, &mut k2)?;
        stats.evaluations += 1;
        let d2 = rms(k2.iter().zip(k1).zip(&sc).map(|((a, b), s)| (a - b) / s)) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        Ok((100.0 * h0).min(h1))
    }

    /// Integrates until `cursor.t == t_end`, landing exactly on `t_end`.
    pub fn advance<F>(&self, f: &mut F, cursor: &mut OdeCursor, t_end: f64) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = cursor.y.len();
        if t_end == cursor.t {
            return Ok(());
        }
        let dir = (t_end - cursor.t).signum();
        let mut k1 = match cursor.k1.take() {
            Some(k) => k,
            None => {
                let mut k = vec![0.0; n];
                f(cursor.t, &cursor.y, &mut k)?;
                cursor.stats.evaluations += 1;
                k
            }
        };
        let mut h = match cursor.h {
            Some(h) => h,
            None => self.initial_step(f, cursor.t, &cursor.y, &k1, dir, &mut cursor.stats)?,
        };
        let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut ys = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        let mut err = vec![0.0; n];
        let mut steps = 0usize;

        loop {
            let remaining = (t_end - cursor.t) * dir;
            if remaining <= 0.0 {
                break;
            }
            let h_min = 16.0 * f64::EPSILON * cursor.t.abs().max(1.0);
            if h < h_min {
                return Err(Error::StepUnderflow { t: cursor.t });
            }
            let landing = h >= remaining;
            let hs = if landing { remaining } else { h } * dir;
            let t = cursor.t;
            let y = &cursor.y;

            for i in 0..n {
                ys[i] = y[i] + hs * A21 * k1[i];
            }
            f(t + C2 * hs, &ys, &mut k2)?;
            for i in 0..n {
                ys[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            f(t + C3 * hs, &ys, &mut k3)?;
            for i in 0..n {
                ys[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(t + C4 * hs, &ys, &mut k4)?;
            for i in 0..n {
                ys[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(t + C5 * hs, &ys, &mut k5)?;
            for i in 0..n {
                ys[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(t + hs, &ys, &mut k6)?;
            for i in 0..n {
                y_new[i] = y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            let t_new = if landing { t_end } else { t + hs };
            f(t_new, &y_new, &mut k7)?;
            cursor.stats.evaluations += 6;
            for i in 0..n {
                err[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let e = self.error_norm(y, &y_new, &err);
            if !e.is_finite() {
                cursor.stats.rejected += 1;
                h *= FAC_MIN;
                continue;
            }
            if e <= 1.0 {
                let fac = if e == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * e.powf(-EXPO_ERR) * cursor.prev_err.powf(EXPO_PREV)).clamp(FAC_MIN, FAC_MAX)
                };
                cursor.prev_err = e.max(1e-4);
                cursor.t = t_new;
                std::mem::swap(&mut cursor.y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                cursor.stats.accepted += 1;
                // A clipped landing step says nothing about the natural step size.
                if !landing || hs.abs() >= h {
                    h *= fac;
                }
            } else {
                cursor.stats.rejected += 1;
                h *= (SAFETY * e.powf(-EXPO_ERR)).clamp(FAC_MIN, 1.0);
            }
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::StepUnderflow { t: cursor.t });
            }
        }
        cursor.h = Some(h);
        cursor.k1 = Some(k1);
        Ok(())
    }
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    (s / n.max(1) as f64).sqrt()
}
