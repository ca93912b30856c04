use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::dicke::{dicke_rhs, DickeParams, DickeState};
use super::Trajectory;

/// One piercing of the surface `P = 0`, `Q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub t: f64,
    pub phi: f64,
    pub cos_theta: f64,
}

/// Cubic Hermite interpolant on `[0, h]` evaluated at `s·h`.
fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1
}

fn hermite_slope(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    ((6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * h * d0 + (-6.0 * s2 + 6.0 * s) * y1
        + (3.0 * s2 - 2.0 * s) * h * d1)
        / h
}

/// Downward crossings of `P = 0` on the `Q > 0` side, located between
/// samples by a Hermite interpolant of `P(t)` and refined by Newton
/// iteration. Samples where the flow cannot be evaluated are skipped.
pub fn poincare_section(traj: &Trajectory<DickeState>, params: &DickeParams) -> Vec<SectionPoint> {
    let mut out = Vec::new();
    for k in 1..traj.len() {
        let (a, b) = (&traj.states[k - 1], &traj.states[k]);
        if !(a.p > 0.0 && b.p <= 0.0) {
            continue;
        }
        let (Ok(da), Ok(db)) = (dicke_rhs(a, params), dicke_rhs(b, params)) else {
            continue;
        };
        let h = traj.times[k] - traj.times[k - 1];
        let mut s = a.p / (a.p - b.p);
        for _ in 0..3 {
            let f = hermite(a.p, b.p, da[1], db[1], h, s);
            let fp = hermite_slope(a.p, b.p, da[1], db[1], h, s) * h;
            if fp == 0.0 {
                break;
            }
            let next = s - f / fp;
            if !(0.0..=1.0).contains(&next) {
                break;
            }
            s = next;
        }
        let q = hermite(a.q, b.q, da[0], db[0], h, s);
        if q <= 0.0 {
            continue;
        }
        let mut dphi = b.angles.phi - a.angles.phi;
        dphi -= 2.0 * PI * (dphi / (2.0 * PI)).round();
        let phi = hermite(a.angles.phi, a.angles.phi + dphi, da[2], db[2], h, s).rem_euclid(2.0 * PI);
        let (sa, ca) = a.angles.theta.sin_cos();
        let (sb, cb) = b.angles.theta.sin_cos();
        let cos_theta = hermite(ca, cb, -sa * da[3], -sb * db[3], h, s).clamp(-1.0, 1.0);
        out.push(SectionPoint { t: traj.times[k - 1] + s * h, phi, cos_theta });
    }
    out
}
